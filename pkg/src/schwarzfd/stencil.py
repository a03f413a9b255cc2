"""Discrete data model: four-point stencils, trajectories, cross-ratios.

The cross-ratio in its two roles is the structural core of the package:
the same-variable form (d - b)(c - a) / ((d - c)(b - a)) drives the
Winternitz scheme, and the mixed (x, u) form
(x+ - x)(u+ - u) / ((x - u+)(x+ - u)) is the mesh equation of the
second-order scheme. Both are Mobius invariants.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateStencilError, DomainError

# cross-ratios legitimately get large near solution poles, so only a true
# zero denominator is an error; near-degeneracy is left to diagnostics
DEGENERATE_TOL = 1e-300


def _check_den(d: float, what: str) -> float:
    if abs(d) < DEGENERATE_TOL:
        raise DegenerateStencilError(f"zero denominator in {what}")
    return d


@dataclass(frozen=True)
class Stencil4:
    """One four-point sample (x_m, x0, x_p, x_pp, u_m, u0, u_p, u_pp).

    Abscissae must be strictly monotone, increasing or decreasing; a
    trajectory keeps a single orientation throughout.
    """

    x_m: float
    x0: float
    x_p: float
    x_pp: float
    u_m: float
    u0: float
    u_p: float
    u_pp: float

    def __post_init__(self):
        vals = (self.x_m, self.x0, self.x_p, self.x_pp,
                self.u_m, self.u0, self.u_p, self.u_pp)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("stencil fields must be finite")
        xs = (self.x_m, self.x0, self.x_p, self.x_pp)
        inc = all(xs[i] < xs[i + 1] for i in range(3))
        dec = all(xs[i] > xs[i + 1] for i in range(3))
        if not (inc or dec):
            raise DomainError("stencil abscissae must be strictly monotone")


@dataclass(frozen=True)
class SchemeParams:
    """Scheme constants (c, eps, theta, k).

    k defaults to the linked value (eps c^2 + 4)/(eps + 1); passing an
    explicit k decouples it (the Winternitz stepper accepts any k).
    """

    c: float
    eps: float
    theta: float
    k: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if not self.eps > 0.0:
            raise DomainError("mesh density eps must be positive")
        if self.theta == 0.0 or not math.isfinite(self.theta):
            raise DomainError("theta must be finite and nonzero")
        if self.k is None:
            object.__setattr__(
                self, "k", (self.eps * self.c**2 + 4.0) / (self.eps + 1.0))
        if not math.isfinite(self.k):
            raise DomainError("k must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Indexed node sequence {(n, x_n, u_n)}, n = n0, n0+1, ...

    Abscissae are strictly monotone (either direction). Four-point residual
    evaluations additionally need at least four nodes; shorter trajectories
    are allowed and rejected at evaluation time.
    """

    n0: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise DomainError("points must be an (N >= 2, 2) array of (x, u)")
        if not np.all(np.isfinite(pts)):
            raise DomainError("trajectory nodes must be finite")
        dx = np.diff(pts[:, 0])
        if not (np.all(dx > 0) or np.all(dx < 0)):
            raise DomainError("abscissae must be strictly monotone")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def xs(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def us(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def indices(self) -> np.ndarray:
        return self.n0 + np.arange(len(self))


def diff_forward(tr: Trajectory, i: int) -> float:
    """Forward difference quotient (u_{i+1} - u_i)/(x_{i+1} - x_i)."""
    if i < 0 or i + 1 >= len(tr):
        raise IndexError(f"forward difference needs nodes {i}, {i + 1}")
    dx = _check_den(tr.xs[i + 1] - tr.xs[i], "diff_forward")
    return (tr.us[i + 1] - tr.us[i]) / dx


def cross_ratio_same(a: float, b: float, c: float, d: float) -> float:
    """Cross-ratio (d - b)(c - a) / ((d - c)(b - a)) of four values.

    Equals 4 for arithmetic progressions and for the sequence 1/n, and is
    invariant under a Mobius map applied to all four arguments.
    """
    _check_den(d - c, "cross_ratio_same")
    _check_den(b - a, "cross_ratio_same")
    return (d - b) * (c - a) / ((d - c) * (b - a))


def mixed_cross_ratio(x0: float, u0: float, x_p: float, u_p: float) -> float:
    """Mixed cross-ratio (x+ - x)(u+ - u) / ((x - u+)(x+ - u)) of one edge."""
    _check_den(x0 - u_p, "mixed_cross_ratio")
    _check_den(x_p - u0, "mixed_cross_ratio")
    return (x_p - x0) * (u_p - u0) / ((x0 - u_p) * (x_p - u0))


def cross_ratio_mixed(s: Stencil4) -> float:
    """Mixed cross-ratio of the stencil's forward edge (x0, u0) -> (x_p, u_p)."""
    return mixed_cross_ratio(s.x0, s.u0, s.x_p, s.u_p)


def stencil_at(tr: Trajectory, i: int) -> Stencil4:
    """Stencil centered so (x_m, x0, x_p, x_pp) are nodes i-1 .. i+2."""
    if i - 1 < 0 or i + 2 >= len(tr):
        raise IndexError(f"stencil at {i} needs nodes {i - 1} .. {i + 2}")
    xs, us = tr.xs, tr.us
    return Stencil4(xs[i - 1], xs[i], xs[i + 1], xs[i + 2],
                    us[i - 1], us[i], us[i + 1], us[i + 2])


# full round-trip precision: 17 significant digits
_FMT = "{:.16e}"


def write_trajectory_csv(tr: Trajectory, path) -> None:
    """Write a trajectory as CSV with header n,x,u."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "x", "u"])
        for k in range(len(tr)):
            w.writerow([tr.n0 + k, _FMT.format(tr.xs[k]), _FMT.format(tr.us[k])])


def read_trajectory_csv(path) -> Trajectory:
    """Read a trajectory written by write_trajectory_csv."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["n", "x", "u"]:
        raise ValueError(f"{path}: expected header n,x,u")
    ns = [int(r[0]) for r in rows[1:]]
    pts = [(float(r[1]), float(r[2])) for r in rows[1:]]
    if ns != list(range(ns[0], ns[0] + len(ns))):
        raise ValueError(f"{path}: node indices must be consecutive")
    return Trajectory(n0=ns[0], points=np.array(pts))
