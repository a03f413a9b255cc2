"""First integrals of the schemes and constancy reporting.

Edge integrals j1 .. j4 are conserved by the three-point scheme together
with the mesh equation; on the exact solution family they recover the
constants directly: j1 = A, j2 = B, j3 = eps, j4 = rho.

The integral forms c / ctilde are three-point quantities conserved by the
four-point scheme; on solutions of the three-point pair they equal the
scheme constant C and its companion

  Ctilde = C (sqrt(eps) - sqrt(1+eps)) / (sqrt(eps) + sqrt(1+eps)).

The Winternitz integral is the telescoping combination
4/(y_+ - y_-) - 1/(y_+ - y) - 1/(y - y_-), equal to 2 c1 on
y_n = 1/(c1 n + c2) + c3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, DegenerateStencilError, DomainError
from .schemes import c_bracket, ctilde_bracket
from .stencil import SchemeParams, Trajectory, mixed_cross_ratio


def _den(d: float, what: str) -> float:
    if abs(d) < 1e-300:
        raise DegenerateStencilError(f"zero denominator in {what}")
    return d


def _edge_radicand(x0, u0, xp, up):
    ux = (up - u0) / _den(xp - x0, "edge step")
    return ux, ux * (x0 - u0) * (xp - up)


def j1(x0: float, u0: float, xp: float, up: float, p: SchemeParams) -> float:
    """Edge integral equal to A on the exact family:

    c/(x_+ - u) - theta (u_x + 1)/sqrt(u_x (x - u)(x_+ - u_+)).
    """
    ux, rad = _edge_radicand(x0, u0, xp, up)
    if not rad > 0.0:
        raise BranchError(f"nonpositive radicand in j1: {float(rad)!r}")
    return p.c / _den(xp - u0, "x_+ - u") \
        - p.theta * (ux + 1.0) / math.sqrt(rad)


def j2(x0: float, u0: float, xp: float, up: float, p: SchemeParams) -> float:
    """Edge integral equal to B on the exact family:

    c x_+/(x_+ - u) - theta (x_+ u_x + u)/sqrt(u_x (x - u)(x_+ - u_+)).
    """
    ux, rad = _edge_radicand(x0, u0, xp, up)
    if not rad > 0.0:
        raise BranchError(f"nonpositive radicand in j2: {float(rad)!r}")
    return p.c * xp / _den(xp - u0, "x_+ - u") \
        - p.theta * (xp * ux + u0) / math.sqrt(rad)


def j3(x0: float, u0: float, xp: float, up: float) -> float:
    """Mixed cross-ratio of the edge; the mesh equation keeps it at eps."""
    return mixed_cross_ratio(x0, u0, xp, up)


def j4(x0: float, u0: float, xp: float, up: float, n: int,
       c_sign: float) -> float:
    """Edge integral equal to rho on the exact family.

    (u - x + sgn sqrt(u_x (u - x)(u_+ - x_+)))/(x_+ - x - u_+ + u) - (n+1),
    with sgn the sign of the scheme constant c.
    """
    if c_sign == 0.0:
        raise DomainError("c_sign must be nonzero")
    sgn = 1.0 if c_sign > 0 else -1.0
    ux = (up - u0) / _den(xp - x0, "edge step")
    rad = ux * (u0 - x0) * (up - xp)
    if rad < 0.0:
        raise BranchError(f"negative radicand in j4: {float(rad)!r}")
    den = _den(xp - x0 - up + u0, "j4 denominator")
    return (u0 - x0 + sgn * math.sqrt(rad)) / den - (n + 1)


def integral_form_c(xm: float, x0: float, xp: float,
                    um: float, u0: float, up: float,
                    eps: float, theta: float) -> float:
    """Three-point integral form recovering the scheme constant:
    equals c on every solution of the scheme with parameters (c, eps, theta).
    Conserved (generally not equal to c) along solutions of the four-point
    scheme.
    """
    return -theta * c_bracket(xm, x0, xp, um, u0, up) / math.sqrt(1.0 + eps)


def integral_form_ctilde(xm: float, x0: float, xp: float,
                         um: float, u0: float, up: float,
                         eps: float, theta: float) -> float:
    """Companion integral form: equals ctilde_from_c(c, eps) on solutions."""
    return -theta * ctilde_bracket(xm, x0, xp, um, u0, up) / math.sqrt(1.0 + eps)


def ctilde_from_c(c: float, eps: float) -> float:
    """Ctilde = C (sqrt(eps) - sqrt(1+eps))/(sqrt(eps) + sqrt(1+eps))."""
    if not eps > 0.0:
        raise DomainError("eps must be positive")
    se, s1 = math.sqrt(eps), math.sqrt(1.0 + eps)
    return c * (se - s1) / (se + s1)


def winternitz_integral(a_m: float, a0: float, a_p: float) -> float:
    """4/(a_+ - a_-) - 1/(a_+ - a) - 1/(a - a_-); conserved by the
    cross-ratio scheme at K = 4, equal to 2 c1 on 1/(c1 n + c2) + c3."""
    return 4.0 / _den(a_p - a_m, "a_+ - a_-") \
        - 1.0 / _den(a_p - a0, "a_+ - a") \
        - 1.0 / _den(a0 - a_m, "a - a_-")


@dataclass(frozen=True)
class IntegralReport:
    """Constancy summary of one integral along a trajectory."""

    name: str
    values: np.ndarray
    mean: float
    max_abs_drift: float

    @classmethod
    def from_values(cls, name: str, values) -> "IntegralReport":
        vals = np.asarray(values, dtype=float)
        if vals.size == 0:
            raise ValueError("no values to report on")
        mean = float(np.mean(vals))
        drift = float(np.max(np.abs(vals - mean)))
        return cls(name=name, values=vals, mean=mean, max_abs_drift=drift)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mean": self.mean,
            "max_abs_drift": self.max_abs_drift,
            "values": [float(v) for v in self.values],
        }


INTEGRAL_NAMES = ("j1", "j2", "j3", "j4", "c", "ctilde")


def constancy_report(tr: Trajectory, which: str,
                     p: SchemeParams) -> IntegralReport:
    """Evaluate one integral along a trajectory and report its drift.

    Edge integrals (j1 .. j4) are evaluated on every forward edge; the
    three-point forms (c, ctilde) on every interior node. Drift is measured
    against the mean value, not the first one, so a single bad edge cannot
    hide by being the reference.
    """
    if which not in INTEGRAL_NAMES:
        raise ValueError(f"unknown integral {which!r}")
    xs, us = tr.xs, tr.us
    if which in ("j1", "j2", "j3", "j4"):
        if len(tr) < 2:
            raise ValueError("insufficient nodes: edge integrals need >= 2")
        vals = []
        for i in range(len(tr) - 1):
            if which == "j1":
                vals.append(j1(xs[i], us[i], xs[i + 1], us[i + 1], p))
            elif which == "j2":
                vals.append(j2(xs[i], us[i], xs[i + 1], us[i + 1], p))
            elif which == "j3":
                vals.append(j3(xs[i], us[i], xs[i + 1], us[i + 1]))
            else:
                vals.append(j4(xs[i], us[i], xs[i + 1], us[i + 1],
                               tr.n0 + i, p.c))
        return IntegralReport.from_values(which, vals)
    if len(tr) < 3:
        raise ValueError("insufficient nodes: three-point forms need >= 3")
    form = integral_form_c if which == "c" else integral_form_ctilde
    vals = [
        form(xs[i - 1], xs[i], xs[i + 1], us[i - 1], us[i], us[i + 1],
             p.eps, p.theta)
        for i in range(1, len(tr) - 1)
    ]
    return IntegralReport.from_values(which, vals)
