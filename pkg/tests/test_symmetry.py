"""Group flows, jet prolongation, and scheme invariance checks."""
from __future__ import annotations

import math

import numpy as np
import pytest

from schwarzfd import (
    GENERATORS,
    JOINT_GENERATORS,
    DomainError,
    Jet3,
    MobiusMap,
    Ode2ExactParams,
    PoleError,
    SchwarzSolutionParams,
    Trajectory,
    WinternitzExactParams,
    exact_scheme_params,
    flow,
    infinitesimal_invariance,
    invariance_max_residual,
    invariance_row,
    invariance_table,
    ode2_exact_trajectory,
    prolong_jet,
    schwarz_solution,
    schwarzian,
    winternitz_exact_trajectory,
)

S = 0.3


def _xu(count=13):
    # rho = 15 keeps ordinates clear of the inversion-flow pole at 1/S
    eps = 0.01
    par = Ode2ExactParams(a=1.0, b=2.0, c=2.0, eps=eps, rho=15.0)
    return ode2_exact_trajectory(par, range(1, count + 1)), par


def _ty(count=13):
    p = WinternitzExactParams(1.0, 0.25, 0.0, 0.5, 0.3, 0.2)
    return winternitz_exact_trajectory(p, range(0, count))


# -- Mobius maps -------------------------------------------------------------

def test_mobius_composition_values():
    m = MobiusMap.translation(0.7)
    assert m.apply(1.0) == pytest.approx(1.7)
    m = MobiusMap.scaling(0.5)
    assert m.apply(2.0) == pytest.approx(2.0 * math.exp(0.5))
    m = MobiusMap.inversion(0.25)
    assert m.apply(2.0) == pytest.approx(2.0 / (1.0 - 0.25 * 2.0))


def test_mobius_rejects_singular():
    with pytest.raises(DomainError):
        MobiusMap(1.0, 2.0, 2.0, 4.0)


def test_mobius_pole_guard():
    m = MobiusMap.inversion(1.0)
    with pytest.raises(PoleError):
        m.apply(1.0)


def test_flow_acts_on_named_variable():
    xs = np.array([1.0, 2.0, 3.0])
    us = np.array([4.0, 5.0, 6.0])
    x2, u2 = flow("x_translate", S)(xs, us)
    assert np.allclose(x2, xs + S) and np.array_equal(u2, us)
    x2, u2 = flow("u_scale", S)(xs, us)
    assert np.array_equal(x2, xs) and np.allclose(u2, us * math.exp(S))
    x2, u2 = flow("xu_translate", S)(xs, us)
    assert np.allclose(x2, xs + S) and np.allclose(u2, us + S)


def test_flow_rejects_unknown_generator():
    with pytest.raises((KeyError, ValueError)):
        flow("rotate", S)


# -- jet prolongation --------------------------------------------------------

def test_prolongation_matches_chain_rule():
    # compare against derivatives of m(y(x)) computed from a closed form
    p = SchwarzSolutionParams(c1=1.3, c2=0.4, c3=0.2)
    m = MobiusMap.inversion(0.15)
    x = 0.6
    j = prolong_jet(m, schwarz_solution(p, x))
    h = 1e-5

    def f(xx):
        return m.apply(schwarz_solution(p, xx).y)

    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    assert j.y == pytest.approx(f(x), rel=1e-12)
    assert j.y1 == pytest.approx(d1, rel=1e-8)
    assert j.y2 == pytest.approx(d2, rel=1e-5)


def test_prolongation_preserves_schwarzian():
    # the Schwarzian is unchanged under Mobius maps of the dependent variable
    p = SchwarzSolutionParams(c1=0.9, c2=-0.3, c3=0.1)
    base = schwarz_solution(p, 0.4)
    for m in (MobiusMap.translation(0.5), MobiusMap.scaling(0.3),
              MobiusMap.inversion(0.2)):
        j = prolong_jet(m, base)
        assert schwarzian(j) == pytest.approx(schwarzian(base), abs=1e-10)


# -- invariance checks -------------------------------------------------------

def test_winternitz_invariant_under_all_flows():
    ty = _ty()
    p = exact_scheme_params(2.0, 0.01)
    for gen in GENERATORS:
        assert invariance_max_residual("winternitz", ty, gen, S, p) <= 1e-9


def test_three_point_scheme_invariant_under_joint_flows():
    tr, par = _xu()
    p = exact_scheme_params(par.c, par.eps)
    for gen in JOINT_GENERATORS:
        assert invariance_max_residual("ode2", tr, gen, S, p) <= 1e-9
        assert invariance_max_residual("derived", tr, gen, S) <= 1e-9


def test_single_variable_flows_break_three_point_schemes():
    tr, par = _xu()
    p = exact_scheme_params(par.c, par.eps)
    broken = invariance_max_residual("ode2", tr, "u_translate", S, p)
    assert broken > 1e-3
    broken = invariance_max_residual("derived", tr, "u_translate", S)
    assert broken > 1e-3


def test_invariance_requires_a_solution():
    tr, par = _xu()
    pts = np.column_stack([tr.xs, tr.us + 0.05])
    off = Trajectory(n0=0, points=pts)
    p = exact_scheme_params(par.c, par.eps)
    with pytest.raises(DomainError):
        invariance_max_residual("ode2", off, "xu_translate", S, p)


def test_infinitesimal_rate_separates_generators():
    tr, par = _xu()
    p = exact_scheme_params(par.c, par.eps)
    admitted = infinitesimal_invariance("ode2", tr, "xu_scale", 1e-7, p)
    rejected = infinitesimal_invariance("ode2", tr, "u_scale", 1e-7, p)
    assert admitted <= 1e-6
    assert rejected > 1e-3


def test_invariance_row_and_table():
    tr, par = _xu()
    p = exact_scheme_params(par.c, par.eps)
    row = invariance_row("ode2", tr, "xu_invert", S, p)
    assert row["scheme"] == "ode2"
    assert row["generator"] == "xu_invert"
    assert row["pass"] is True
    rows = invariance_table([
        ("ode2", tr, g, S, p) for g in GENERATORS])
    assert len(rows) == len(GENERATORS)
    passing = {r["generator"] for r in rows if r["pass"]}
    assert passing == set(JOINT_GENERATORS)


def test_row_reports_unreachable_flow_as_infinite():
    tr, par = _xu()
    p = exact_scheme_params(par.c, par.eps)
    # x-translation slides the abscissae off the mesh equation entirely and
    # can put stencils on the wrong branch; the row must still come back
    row = invariance_row("ode2", tr, "x_translate", S, p)
    assert row["pass"] is False
