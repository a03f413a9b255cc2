"""Two-scheme coupling: alpha fitting, compatibility, continuous limit."""
from __future__ import annotations

import math

import numpy as np
import pytest

from schwarzfd import (
    AlphaPair,
    DomainError,
    Ode2ExactParams,
    PairedTrajectories,
    Trajectory,
    WinternitzExactParams,
    compatibility_backward,
    compatibility_forward,
    construct_xu_side,
    continuous_limit_report,
    fit_alphas,
    mesh_residual_profile,
    ode2_exact_trajectory,
    residual_profiles,
    winternitz_exact_trajectory,
)

EPS = 0.01


def _pair(count=16):
    rho = math.sqrt((1.0 + EPS) / EPS) + 2.0
    epar = Ode2ExactParams(a=1.0, b=2.0, c=2.0, eps=EPS, rho=rho)
    xu = ode2_exact_trajectory(epar, range(1, count + 1))
    wpar = WinternitzExactParams(1.0, 0.25, 0.0, 0.5, 0.3, 0.2)
    ty = winternitz_exact_trajectory(wpar, range(1, count + 1))
    return PairedTrajectories(xu=xu, ty=ty)


def test_pairing_validates_sides():
    pair = _pair()
    assert len(list(pair.common_indices)) >= 4
    bad = np.column_stack([pair.xu.xs, pair.xu.us + 0.01])
    with pytest.raises(DomainError):
        PairedTrajectories(xu=Trajectory(n0=1, points=bad), ty=pair.ty)


def test_fit_alphas_methods_agree():
    pair = _pair()
    a = fit_alphas(pair)
    b = fit_alphas(pair, method="lstsq")
    assert a.alpha1 == pytest.approx(b.alpha1, rel=1e-12)
    assert a.alpha2 == pytest.approx(b.alpha2, rel=1e-12)
    assert a.alpha1 != 0.0 and a.alpha2 != 0.0


def test_relations_hold_at_fitted_alphas():
    pair = _pair()
    alphas = fit_alphas(pair)
    b1s, b2s = residual_profiles(pair, alphas)
    assert np.max(np.abs(b1s)) <= 1e-9
    assert np.max(np.abs(b2s)) <= 1e-9


def test_alpha_pair_validates():
    with pytest.raises(DomainError):
        AlphaPair(alpha1=0.0, alpha2=1.0)
    with pytest.raises(DomainError):
        AlphaPair(alpha1=1.0, alpha2=math.inf)


def test_forward_compatibility_and_detection():
    pair = _pair()
    alphas = fit_alphas(pair)
    rep = compatibility_forward(pair.ty, alphas, EPS)
    assert rep["verdict"] == "compatible"
    assert rep["max_residual"] <= 1e-8
    off = AlphaPair(alphas.alpha1 * 1.1, alphas.alpha2)
    rep = compatibility_forward(pair.ty, off, EPS)
    assert rep["verdict"] == "incompatible"
    assert rep["max_residual"] >= 1e-3


def test_backward_compatibility_and_detection():
    pair = _pair()
    alphas = fit_alphas(pair)
    rep = compatibility_backward(pair.xu, alphas, EPS, ty_ref=pair.ty)
    assert rep["verdict"] == "compatible"
    assert rep["max_residual"] <= 1e-8
    off = AlphaPair(alphas.alpha1, alphas.alpha2 * 1.1)
    rep = compatibility_backward(pair.xu, off, EPS, ty_ref=pair.ty)
    assert rep["verdict"] == "incompatible"
    assert rep["max_residual"] >= 1e-3


def test_joint_rescaling_is_detected():
    # alpha1 fixes the constructed side's scheme constant, and the mesh
    # ratio then pins the coupled integral, so even a joint rescaling that
    # preserves alpha2/alpha1 moves the pairing off the compatible branch
    pair = _pair()
    alphas = fit_alphas(pair)
    both = AlphaPair(alphas.alpha1 * 2.0, alphas.alpha2 * 2.0)
    rep = compatibility_forward(pair.ty, both, EPS)
    assert rep["verdict"] == "incompatible"
    assert rep["max_residual"] >= 1e-3


def test_construct_xu_side_solves_scheme():
    pair = _pair()
    alphas = fit_alphas(pair)
    xu = construct_xu_side(pair.ty, alphas, EPS)
    assert len(xu) >= 4
    assert np.max(np.abs(mesh_residual_profile(xu, EPS))) <= 1e-8


def test_forward_requires_winternitz_side():
    # a single bumped node breaks the cross-ratio scheme (a constant shift
    # of the whole sequence would not, being one of its symmetries)
    pair = _pair()
    alphas = fit_alphas(pair)
    ys = pair.ty.us.copy()
    ys[4] += 0.02
    bad = np.column_stack([pair.ty.xs, ys])
    with pytest.raises(DomainError):
        compatibility_forward(Trajectory(n0=1, points=bad), alphas, EPS)


def test_continuous_limit_closes():
    rep = continuous_limit_report()
    gaps = rep["gap"]
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    assert rep["observed_order"] >= 1.0
