"""Residual evaluators, steppers, and exact solutions for the three schemes.

Schemes covered:

  * the three-point scheme for the second-order equation, paired with the
    mixed cross-ratio mesh equation (both cross-ratios equal eps),
  * the Winternitz scheme: same-variable cross-ratio = K for the dependent
    and the independent sequence separately,
  * the four-point scheme obtained by forward-differencing the integral
    forms; it is parameter-free and shares its solution set with the
    three-point pair.

The exact solution families are

  u_n = 1/(A (B - A x_n)) + (B - C)/A,
  x_n = sgn(C) sqrt(1+eps) / (A sqrt(eps) (rho + n)) + (B - sgn(C))/A

for the (x, u) schemes (theta from theta_exact makes them exact on it), and
y_n = 1/(c1 n + c2) + c3, t_n = 1/(c4 n + c5) + c6 for the Winternitz
scheme at K = 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BranchError,
    ConvergenceError,
    DegenerateStencilError,
    DomainError,
    PoleError,
)
from .stencil import SchemeParams, Stencil4, Trajectory, cross_ratio_same


def _den(d: float, what: str) -> float:
    if abs(d) < 1e-300:
        raise DegenerateStencilError(f"zero denominator in {what}")
    return d


def _sqrt_pos(v: float, what: str) -> float:
    if not v > 0.0:
        raise BranchError(f"nonpositive radicand in {what}: {float(v)!r}")
    return math.sqrt(v)


# ---------------------------------------------------------------------------
# parameter relations


def theta_exact(c: float, eps: float) -> float:
    """The theta making the three-point scheme exact:
    sqrt(1+eps)/2 * (|c| sqrt(eps) - sqrt(eps c^2 + 4)).

    Always negative, and tends to -1 as eps -> 0.
    """
    if not eps > 0.0:
        raise DomainError("eps must be positive")
    return math.sqrt(1.0 + eps) / 2.0 * (
        abs(c) * math.sqrt(eps) - math.sqrt(eps * c * c + 4.0))


def k_from_c(c: float, eps: float) -> float:
    """Winternitz constant implied by (c, eps): K = (eps c^2 + 4)/(eps + 1).

    Equals 4 exactly when c^2 = 4, for every eps; this is the bridge between
    the mixed-cross-ratio mesh and the same-variable cross-ratio scheme.
    """
    if not eps > -1.0:
        raise DomainError("eps must exceed -1")
    return (eps * c * c + 4.0) / (eps + 1.0)


def exact_scheme_params(c: float, eps: float) -> SchemeParams:
    """SchemeParams with theta = theta_exact(c, eps) and the linked k."""
    return SchemeParams(c=c, eps=eps, theta=theta_exact(c, eps))


# ---------------------------------------------------------------------------
# three-point scheme and mesh


def _slope_terms(xm, x0, xp, um, u0, up):
    """Backward and forward slope-root terms shared by the scheme residual
    and the integral brackets."""
    uxb = (u0 - um) / _den(x0 - xm, "backward step")
    ux = (up - u0) / _den(xp - x0, "forward step")
    pb = (x0 - um) * (xm - u0)
    pf = (x0 - up) * (xp - u0)
    bk = _sqrt_pos(uxb, "u_xbar") / _sqrt_pos(pb, "(x - u_-)(x_- - u)")
    fw = (xp - u0) / _den(xm - u0, "x_- - u") \
        * _sqrt_pos(ux, "u_x") / _sqrt_pos(pf, "(x - u_+)(x_+ - u)")
    return bk, fw, uxb, pb


def _residual8(xm, x0, xp, um, u0, up, c, eps, theta):
    bk, fw, uxb, pb = _slope_terms(xm, x0, xp, um, u0, up)
    return theta * (bk - fw) + c * math.sqrt(1.0 + eps) * (x0 - xm) * uxb / pb


def ode2_scheme_residual(s: Stencil4, p: SchemeParams) -> float:
    """Residual of the three-point scheme on (x_m, x0, x_p, u_m, u0, u_p):

      theta (sqrt(u_xbar)/sqrt((x-u_-)(x_- - u))
             - (x_+ - u)/(x_- - u) sqrt(u_x)/sqrt((x-u_+)(x_+ - u)))
      + c sqrt(1+eps) (x - x_-) u_xbar / ((x-u_-)(x_- - u))

    All radicands must be positive (BranchError otherwise).
    """
    return _residual8(s.x_m, s.x0, s.x_p, s.u_m, s.u0, s.u_p,
                      p.c, p.eps, p.theta)


def scheme_residual_raw(xm, x0, xp, um, u0, up, p: SchemeParams) -> float:
    """Scalar three-point residual on raw values, no stencil validation.

    Used where the window may not form a valid Stencil4, e.g. after a group
    flow was applied to the nodes.
    """
    return _residual8(xm, x0, xp, um, u0, up, p.c, p.eps, p.theta)


def mesh_residual(x0: float, u0: float, x_p: float, u_p: float, eps: float) -> float:
    """Forward mesh residual: mixed cross-ratio of the edge minus eps."""
    num = (x_p - x0) * (u_p - u0)
    d = _den((x0 - u_p) * (x_p - u0), "mesh cross-ratio")
    return num / d - eps


def ode2_mesh_residuals(s: Stencil4, eps: float) -> tuple[float, float]:
    """(forward, backward) mesh residuals at the stencil's center node."""
    fwd = mesh_residual(s.x0, s.u0, s.x_p, s.u_p, eps)
    bwd = mesh_residual(s.x_m, s.u_m, s.x0, s.u0, eps)
    return fwd, bwd


# ---------------------------------------------------------------------------
# integral brackets and the four-point scheme

def c_bracket(xm, x0, xp, um, u0, up) -> float:
    """Three-point bracket constant along scheme solutions:

      ((x - u_-)(x_- - u)/(u - u_-)) * (backward term - forward term)

    On solutions it equals -(c/theta) sqrt(1+eps); its forward difference is
    the first equation of the four-point scheme.
    """
    bk, fw, _, pb = _slope_terms(xm, x0, xp, um, u0, up)
    return pb / _den(u0 - um, "u - u_-") * (bk - fw)


def ctilde_bracket(xm, x0, xp, um, u0, up) -> float:
    """Companion bracket with the roles of x and u interchanged."""
    return c_bracket(um, u0, up, xm, x0, xp)


def derived_scheme_residuals(s: Stencil4) -> tuple[float, float]:
    """Residuals of the four-point scheme: forward differences of the two
    integral brackets across the stencil. Parameter-free."""
    r1 = c_bracket(s.x0, s.x_p, s.x_pp, s.u0, s.u_p, s.u_pp) \
        - c_bracket(s.x_m, s.x0, s.x_p, s.u_m, s.u0, s.u_p)
    r2 = ctilde_bracket(s.x0, s.x_p, s.x_pp, s.u0, s.u_p, s.u_pp) \
        - ctilde_bracket(s.x_m, s.x0, s.x_p, s.u_m, s.u0, s.u_p)
    return r1, r2


# ---------------------------------------------------------------------------
# trajectory-wide residual profiles

def scheme_residual_profile(tr: Trajectory, p: SchemeParams) -> np.ndarray:
    """Three-point scheme residual at each interior node (1 .. N-2)."""
    xs, us = tr.xs, tr.us
    return np.array([
        _residual8(xs[i - 1], xs[i], xs[i + 1], us[i - 1], us[i], us[i + 1],
                   p.c, p.eps, p.theta)
        for i in range(1, len(tr) - 1)
    ])


def mesh_residual_profile(tr: Trajectory, eps: float) -> np.ndarray:
    """Forward mesh residual on each edge (0 .. N-2)."""
    xs, us = tr.xs, tr.us
    return np.array([
        mesh_residual(xs[i], us[i], xs[i + 1], us[i + 1], eps)
        for i in range(len(tr) - 1)
    ])


def derived_residual_profile(tr: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Four-point scheme residuals on each interior stencil (1 .. N-3)."""
    xs, us = tr.xs, tr.us
    r1s, r2s = [], []
    for i in range(1, len(tr) - 2):
        r1 = c_bracket(xs[i], xs[i + 1], xs[i + 2], us[i], us[i + 1], us[i + 2]) \
            - c_bracket(xs[i - 1], xs[i], xs[i + 1], us[i - 1], us[i], us[i + 1])
        r2 = ctilde_bracket(xs[i], xs[i + 1], xs[i + 2], us[i], us[i + 1], us[i + 2]) \
            - ctilde_bracket(xs[i - 1], xs[i], xs[i + 1], us[i - 1], us[i], us[i + 1])
        r1s.append(r1)
        r2s.append(r2)
    return np.array(r1s), np.array(r2s)


# ---------------------------------------------------------------------------
# Winternitz scheme

def winternitz_residuals(y4, t4, k: float) -> tuple[float, float]:
    """Cross-ratio residuals (y-sequence, t-sequence) minus k for two
    four-value windows."""
    ry = cross_ratio_same(y4[0], y4[1], y4[2], y4[3]) - k
    rt = cross_ratio_same(t4[0], t4[1], t4[2], t4[3]) - k
    return ry, rt


def winternitz_step(y_m: float, y0: float, y_p: float, k: float) -> float:
    """Solve the cross-ratio equation for the fourth value in closed form.

    (y_pp - y0)(y_p - y_m) = k (y_pp - y_p)(y0 - y_m) is fractional-linear
    in y_pp; degenerate when the leading coefficient vanishes.
    """
    lead = (y_p - y_m) - k * (y0 - y_m)
    _den(lead, "winternitz_step leading coefficient")
    return (y0 * (y_p - y_m) - k * y_p * (y0 - y_m)) / lead


@dataclass(frozen=True)
class WinternitzExactParams:
    """Constants of y_n = 1/(c1 n + c2) + c3 and t_n = 1/(c4 n + c5) + c6."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float

    def __post_init__(self):
        if self.c1 == 0.0 and self.c2 == 0.0:
            raise DomainError("(c1, c2) = (0, 0) is not a solution")
        if self.c4 == 0.0 and self.c5 == 0.0:
            raise DomainError("(c4, c5) = (0, 0) is not a solution")


def winternitz_exact_trajectory(p: WinternitzExactParams, n_range) -> Trajectory:
    """Paired (t_n, y_n) trajectory over n_range.

    Stored as a Trajectory with t as abscissa and y as ordinate; both
    sequences separately satisfy the cross-ratio scheme with K = 4.
    Constant sequences (c1 = 0 or c4 = 0) have degenerate cross-ratios and
    are rejected.
    """
    if p.c1 == 0.0 or p.c4 == 0.0:
        raise DegenerateStencilError("constant sequence: cross-ratio undefined")
    ns = list(n_range)
    if len(ns) < 2:
        raise DomainError("need at least two indices")
    pts = []
    for n in ns:
        dy = p.c1 * n + p.c2
        dt = p.c4 * n + p.c5
        if abs(dy) < 2e-13 or abs(dt) < 2e-13:
            raise PoleError(f"node n={n} sits at a pole of the solution")
        pts.append((1.0 / dt + p.c6, 1.0 / dy + p.c3))
    return Trajectory(n0=ns[0], points=np.array(pts))


# ---------------------------------------------------------------------------
# exact (x, u) trajectories

@dataclass(frozen=True)
class Ode2ExactParams:
    """Constants (a, b, c, eps, rho) of the exact (x, u) solution family.

    The family requires c^2 = 4 (the K = 4 case); rho shifts the index so
    that rho + n stays clear of zero and of the pole of the u-formula over
    the requested range.
    """

    a: float
    b: float
    c: float
    eps: float
    rho: float

    def __post_init__(self):
        if self.a == 0.0:
            raise DomainError("a must be nonzero")
        if not self.eps > 0.0:
            raise DomainError("eps must be positive")
        if self.c * self.c != 4.0:
            raise DomainError("exact family needs c^2 = 4")


def ode2_exact_node(p: Ode2ExactParams, n: int) -> tuple[float, float]:
    """Closed-form node (x_n, u_n) of the exact family at index n."""
    s = 1.0 if p.c > 0 else -1.0
    m = p.rho + n
    se, s1 = math.sqrt(p.eps), math.sqrt(1.0 + p.eps)
    if abs(m) < 2e-13:
        raise PoleError(f"rho + n = {float(m)!r} at n = {n}")
    upole = se * m - s1
    if abs(upole) < 2e-13 * (1.0 + abs(se * m)):
        raise PoleError(f"u-formula pole at n = {n}")
    x = s * s1 / (p.a * se * m) + (p.b - s) / p.a
    u = s * se * m / (p.a * upole) + (p.b - p.c) / p.a
    return x, u


def ode2_exact_trajectory(p: Ode2ExactParams, n_range) -> Trajectory:
    """Exact trajectory over n_range. With theta = theta_exact(c, eps) every
    interior stencil satisfies the scheme and both mesh residuals."""
    ns = list(n_range)
    if len(ns) < 2:
        raise DomainError("need at least two indices")
    pts = [ode2_exact_node(p, n) for n in ns]
    return Trajectory(n0=ns[0], points=np.array(pts))


# ---------------------------------------------------------------------------
# implicit stepper

@dataclass(frozen=True)
class StepperConfig:
    """Damped-Newton settings for the implicit step.

    guess_mode "extrapolate" continues each coordinate fractionally-linearly
    through the last three nodes; "exact_seed" lets the caller supply the
    next node of a closed-form solution as the initial guess.
    """

    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    guess_mode: str = "extrapolate"

    def __post_init__(self):
        if not self.newton_tol > 0.0:
            raise DomainError("newton_tol must be positive")
        if self.newton_max_iter < 1:
            raise DomainError("newton_max_iter must be >= 1")
        if self.guess_mode not in ("extrapolate", "exact_seed"):
            raise DomainError(f"unknown guess_mode {self.guess_mode!r}")


DEFAULT_STEPPER = StepperConfig()


def _scale8(xm, x0, xp, um, u0, up, theta):
    # magnitude of the residual's constituent terms; the backward and forward
    # slope-root terms individually grow like 1/gap^2 near the solution pole
    # while their difference stays O(1), so the convergence test is applied
    # to the residual divided by this scale
    uxb = (u0 - um) / (x0 - xm)
    ux = (up - u0) / (xp - x0)
    pb = (x0 - um) * (xm - u0)
    pf = (x0 - up) * (xp - u0)
    bk = math.sqrt(uxb) / math.sqrt(pb)
    fw = abs((xp - u0) / (xm - u0)) * math.sqrt(ux) / math.sqrt(abs(pf))
    return 1.0 + abs(theta) * (bk + fw)


def _system(xm, um, x0, u0, xp, up, p: SchemeParams):
    """Guarded residual vector [mesh, scheme/scale]; inf outside the branch."""
    try:
        s8 = _scale8(xm, x0, xp, um, u0, up, p.theta)
        return np.array([
            mesh_residual(x0, u0, xp, up, p.eps),
            _residual8(xm, x0, xp, um, u0, up, p.c, p.eps, p.theta) / s8,
        ])
    except (BranchError, DegenerateStencilError, ValueError,
            ZeroDivisionError, OverflowError):
        return np.array([np.inf, np.inf])


def _mesh_project_u(x0, u0, xp, eps):
    # u_p making the forward mesh residual vanish for a given x_p
    num = u0 * (xp - x0) + eps * x0 * (xp - u0)
    den = (xp - x0) + eps * (xp - u0)
    return num / den


def _first_guess(xm, um, x0, u0, p: SchemeParams):
    """Coarse scan over step-contraction ratios with mesh-projected u."""
    best, bestr = None, np.inf
    h = x0 - xm
    for r in np.linspace(0.05, 1.4, 28):
        xg = x0 + r * h
        try:
            ug = _mesh_project_u(x0, u0, xg, p.eps)
        except ZeroDivisionError:
            continue
        res = _system(xm, um, x0, u0, xg, ug, p)
        nr = np.max(np.abs(res))
        if nr < bestr:
            bestr, best = nr, (xg, ug)
    if best is None:
        raise ConvergenceError("no admissible initial guess found")
    return best


def ode2_step(x_m: float, u_m: float, x0: float, u0: float,
              p: SchemeParams, cfg: StepperConfig = DEFAULT_STEPPER,
              prev: tuple[float, float] | None = None,
              seed: tuple[float, float] | None = None) -> tuple[float, float]:
    """Advance one node: solve {forward mesh residual = 0, scheme residual = 0}
    for (x_p, u_p) by damped 2-D Newton.

    prev is the node before (x_m, u_m), used for the extrapolation guess;
    seed is an externally supplied guess honored in exact_seed mode. The
    Jacobian is finite-difference (relative step 1e-7) and the line search
    halves the step until the residual norm decreases. The convergence test
    uses the scheme residual divided by the magnitude of its terms, which
    leaves the Newton directions unchanged and keeps the tolerance
    meaningful where the slope-root terms are individually large.
    """
    if cfg.guess_mode == "exact_seed" and seed is not None:
        xg, ug = seed
    elif prev is not None:
        try:
            xg = winternitz_step(prev[0], x_m, x0, 4.0)
            ug = winternitz_step(prev[1], u_m, u0, 4.0)
        except DegenerateStencilError:
            xg, ug = _first_guess(x_m, u_m, x0, u0, p)
        if not np.isfinite(_system(x_m, u_m, x0, u0, xg, ug, p)).all():
            xg, ug = _first_guess(x_m, u_m, x0, u0, p)
    else:
        xg, ug = _first_guess(x_m, u_m, x0, u0, p)

    v = np.array([xg, ug])
    r = _system(x_m, u_m, x0, u0, v[0], v[1], p)
    it = 0
    while np.max(np.abs(r)) > cfg.newton_tol:
        if it >= cfg.newton_max_iter:
            raise ConvergenceError(
                f"no convergence in {cfg.newton_max_iter} iterations "
                f"(|r| = {np.max(np.abs(r)):.3e})")
        jac = np.zeros((2, 2))
        for k in range(2):
            dv = 1e-7 * (1.0 + abs(v[k]))
            vv = v.copy()
            vv[k] += dv
            rp = _system(x_m, u_m, x0, u0, vv[0], vv[1], p)
            if not np.isfinite(rp).all():
                # forward step left the branch; probe backward instead
                vv = v.copy()
                vv[k] -= dv
                rp = _system(x_m, u_m, x0, u0, vv[0], vv[1], p)
                dv = -dv
            jac[:, k] = (rp - r) / dv
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian: {exc}") from exc
        norm0 = np.max(np.abs(r))
        lam = 1.0
        vn, rn = v, r
        while lam > 1e-12:
            vn = v + lam * step
            rn = _system(x_m, u_m, x0, u0, vn[0], vn[1], p)
            if np.isfinite(rn).all() and np.max(np.abs(rn)) < norm0:
                break
            lam /= 2.0
        v, r = vn, rn
        it += 1
        if not np.isfinite(r).all():
            raise ConvergenceError("iteration left the admissible branch")
    return float(v[0]), float(v[1])


def ode2_run(x0: float, u0: float, x1: float, u1: float, count: int,
             p: SchemeParams, cfg: StepperConfig = DEFAULT_STEPPER,
             n0: int = 0, seed_fn=None) -> Trajectory:
    """Integrate count new nodes forward from the seed pair.

    seed_fn, when given, maps a node index to an initial-guess pair and is
    consulted in exact_seed mode.
    """
    xs, us = [x0, x1], [u0, u1]
    for _ in range(count):
        prev = (xs[-3], us[-3]) if len(xs) >= 3 else None
        seed = seed_fn(n0 + len(xs)) if seed_fn is not None else None
        xp, up = ode2_step(xs[-2], us[-2], xs[-1], us[-1], p, cfg,
                           prev=prev, seed=seed)
        xs.append(xp)
        us.append(up)
    return Trajectory(n0=n0, points=np.column_stack([xs, us]))


# ---------------------------------------------------------------------------
# singular line solutions

def singular_recursion_step(x_n: float, a: float, b: float, eps: float) -> float:
    """Advance the abscissa along the line u = a x + b so that the forward
    mesh residual vanishes exactly.

    The map is affine in x_n:

      x_{n+1} = eps/(2 a (eps+1)) * ( ((a^2+1) + 2a/eps + (a-1) R) x_n
                                      + b ((a-1) + R) ),
      R = sqrt(a^2 + 2a(eps+2)/eps + 1).

    At a = 1 the linear coefficient is 1 and the map is a pure shift by
    b sqrt(eps/(1+eps)).
    """
    if a == 0.0:
        raise DomainError("slope a must be nonzero")
    if not eps > 0.0:
        raise DomainError("eps must be positive")
    rad = a * a + 2.0 * a * (eps + 2.0) / eps + 1.0
    if rad < 0.0:
        raise BranchError(f"negative radicand {rad!r} in singular recursion")
    r = math.sqrt(rad)
    lin = (a * a + 1.0) + 2.0 * a / eps + (a - 1.0) * r
    return eps / (2.0 * a * (eps + 1.0)) * (lin * x_n + b * ((a - 1.0) + r))


def singular_trajectory(a: float, b: float, eps: float, x0: float = 1.0,
                        count: int = 6, n0: int = 0) -> Trajectory:
    """Line trajectory u = a x + b on the mesh generated by the recursion."""
    xs = [x0]
    for _ in range(count - 1):
        xs.append(singular_recursion_step(xs[-1], a, b, eps))
    pts = [(x, a * x + b) for x in xs]
    return Trajectory(n0=n0, points=np.array(pts))


def singular_consistency_residual(a: float, c: float, eps: float,
                                  p_theta: float) -> float:
    """Scheme residual on three consecutive nodes of the line trajectory.

    Stands in for the mesh-density consistency condition: for admissible
    (a, c, p_theta) it changes sign in eps over (0, 1] and its root marks
    the eps at which the line solves the scheme. Evaluated on the frozen
    window x0 = 1, b = 1.
    """
    tr = singular_trajectory(a, 1.0, eps, x0=1.0, count=3)
    xs, us = tr.xs, tr.us
    return _residual8(xs[0], xs[1], xs[2], us[0], us[1], us[2],
                      c, eps, p_theta)


def singular_eps_root(a: float, c: float, p_theta: float,
                      lo: float = 0.05, hi: float = 1.0,
                      iters: int = 200) -> float:
    """Bisection root of the consistency residual in eps over [lo, hi]."""
    flo = singular_consistency_residual(a, c, lo, p_theta)
    fhi = singular_consistency_residual(a, c, hi, p_theta)
    if flo * fhi > 0.0:
        raise DomainError("consistency residual does not change sign on [lo, hi]")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if singular_consistency_residual(a, c, mid, p_theta) * flo <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
