"""First integrals: edge and interior forms, constancy reports."""
from __future__ import annotations

import math

import numpy as np
import pytest

from schwarzfd import (
    BranchError,
    IntegralReport,
    Ode2ExactParams,
    WinternitzExactParams,
    constancy_report,
    ctilde_from_c,
    exact_scheme_params,
    integral_form_c,
    integral_form_ctilde,
    j1,
    j2,
    j3,
    j4,
    ode2_exact_trajectory,
    winternitz_exact_trajectory,
    winternitz_integral,
)


def _exact(c=2.0, eps=0.01, a=1.0, b=2.0, margin=1.5, count=12):
    rho = math.sqrt((1.0 + eps) / eps) + margin
    par = Ode2ExactParams(a=a, b=b, c=c, eps=eps, rho=rho)
    return ode2_exact_trajectory(par, range(0, count)), par


def _edge_values(tr, fn):
    xs, us = tr.xs, tr.us
    return [fn(xs[i], us[i], xs[i + 1], us[i + 1])
            for i in range(len(tr) - 1)]


def test_j1_j2_recover_family_parameters():
    tr, par = _exact()
    p = exact_scheme_params(par.c, par.eps)
    v1 = _edge_values(tr, lambda *a: j1(*a, p))
    v2 = _edge_values(tr, lambda *a: j2(*a, p))
    assert np.max(np.abs(np.array(v1) - par.a)) <= 1e-9
    assert np.max(np.abs(np.array(v2) - par.b)) <= 1e-9


def test_j3_equals_eps():
    tr, par = _exact(eps=0.001)
    v3 = _edge_values(tr, j3)
    assert np.max(np.abs(np.array(v3) - par.eps)) <= 1e-12


def test_j4_recovers_origin_shift():
    tr, par = _exact()
    xs, us = tr.xs, tr.us
    sign = 1.0 if par.c > 0 else -1.0
    vals = [j4(xs[i], us[i], xs[i + 1], us[i + 1], i, sign)
            for i in range(len(tr) - 1)]
    assert np.max(np.abs(np.array(vals) - par.rho)) <= 1e-7


def test_j4_branch_guard():
    with pytest.raises(BranchError):
        # u0 - x0 and up - xp with opposite signs: negative radicand
        j4(0.0, 0.5, 1.0, 0.9, 0, 1.0)


def test_interior_form_recovers_c():
    for eps in (0.1, 0.01):
        tr, par = _exact(eps=eps)
        p = exact_scheme_params(par.c, par.eps)
        xs, us = tr.xs, tr.us
        for i in range(1, len(tr) - 1):
            args = (xs[i - 1], xs[i], xs[i + 1], us[i - 1], us[i], us[i + 1])
            assert integral_form_c(*args, eps, p.theta) == pytest.approx(
                par.c, abs=1e-9)


def test_interior_forms_are_coupled():
    tr, par = _exact()
    p = exact_scheme_params(par.c, par.eps)
    xs, us = tr.xs, tr.us
    i = 4
    args = (xs[i - 1], xs[i], xs[i + 1], us[i - 1], us[i], us[i + 1])
    cv = integral_form_c(*args, par.eps, p.theta)
    ctv = integral_form_ctilde(*args, par.eps, p.theta)
    assert ctv == pytest.approx(ctilde_from_c(cv, par.eps), rel=1e-9)


def test_ctilde_from_c_ratio():
    eps = 0.01
    r = (math.sqrt(eps) - math.sqrt(1 + eps)) / (
        math.sqrt(eps) + math.sqrt(1 + eps))
    assert ctilde_from_c(2.0, eps) == pytest.approx(2.0 * r, rel=1e-14)


def test_winternitz_integral_on_harmonic_sequence():
    # a_n = 1/n gives the constant value 2 for K = 4
    vals = [winternitz_integral(1.0 / n, 1.0 / (n + 1), 1.0 / (n + 2))
            for n in range(1, 8)]
    assert np.max(np.abs(np.array(vals) - 2.0)) <= 1e-10


def test_winternitz_integral_constant_on_family():
    p = WinternitzExactParams(1.0, 0.25, 0.0, 0.5, 0.3, 0.2)
    tr = winternitz_exact_trajectory(p, range(0, 10))
    for seq in (tr.xs, tr.us):
        vals = [winternitz_integral(seq[i - 1], seq[i], seq[i + 1])
                for i in range(1, len(seq) - 1)]
        assert np.max(np.abs(np.diff(vals))) <= 1e-10


def test_constancy_report_structure():
    tr, par = _exact()
    p = exact_scheme_params(par.c, par.eps)
    rep = constancy_report(tr, "j1", p)
    assert isinstance(rep, IntegralReport)
    assert rep.name == "j1"
    assert len(rep.values) == len(tr) - 1
    assert rep.mean == pytest.approx(par.a, abs=1e-9)
    assert rep.max_abs_drift <= 1e-9
    d = rep.to_dict()
    assert list(d) == ["name", "mean", "max_abs_drift", "values"]


def test_constancy_report_interior_names():
    tr, par = _exact()
    p = exact_scheme_params(par.c, par.eps)
    rep = constancy_report(tr, "c", p)
    assert len(rep.values) == len(tr) - 2
    assert rep.mean == pytest.approx(par.c, abs=1e-9)


def test_constancy_report_rejects_unknown():
    tr, par = _exact()
    p = exact_scheme_params(par.c, par.eps)
    with pytest.raises(ValueError):
        constancy_report(tr, "j9", p)
