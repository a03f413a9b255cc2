"""Closed-form continuous-side objects.

The two equations everything else discretizes:

  * the Schwarzian equation  y'''/y' - (3/2)(y''/y')^2 = 0, whose general
    solution is the fractional-linear family y = 1/(C1 x + C2) + C3, and
  * the second-order equation
        y'' + 2 (y' + C0 y'^{3/2} + y'^2) / (x - y) = 0
    with general solution y = 1/(A0 (B0 - A0 x)) + (B0 - C0)/A0 and the
    singular line family y = a0 x + b0, a0 (a0 + C0 sqrt(a0) + 1) = 0.

All jets are evaluated analytically; the only finite differencing in this
module is multiplier_identity_check, which is by construction a
finite-difference test. Operations taking 3/2 powers of y' require y' > 0
and raise DomainError otherwise; we never continue into complex branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, PoleError

# denominators closer to a pole than this (relative to the numerator) are
# treated as the pole itself, keeping property sweeps deterministic
POLE_GUARD = 1e-13


def _guard_pole(num: float, den: float, what: str) -> None:
    if abs(den) < POLE_GUARD * (1.0 + abs(num)):
        raise PoleError(f"{what}: denominator {float(den)!r} is at a pole")


@dataclass(frozen=True)
class Jet3:
    """Third-order jet (x, y, y', y'', y''') of a scalar function."""

    x: float
    y: float
    y1: float
    y2: float
    y3: float

    def __post_init__(self):
        for name in ("x", "y", "y1", "y2", "y3"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"Jet3.{name} must be finite")


@dataclass(frozen=True)
class SchwarzSolutionParams:
    """Constants (c1, c2, c3) of the fractional-linear solution family."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if self.c1 == 0.0 and self.c2 == 0.0:
            raise DomainError("(c1, c2) = (0, 0) does not define a solution")


@dataclass(frozen=True)
class Ode2SolutionParams:
    """Constants (a0, b0, c0) of the second-order equation's solution."""

    a0: float
    b0: float
    c0: float

    def __post_init__(self):
        if self.a0 == 0.0:
            raise DomainError("a0 must be nonzero")


def schwarzian(j: Jet3) -> float:
    """Schwarzian derivative y'''/y' - (3/2)(y''/y')^2 of a jet."""
    if j.y1 == 0.0:
        raise DomainError("schwarzian undefined at y' = 0")
    r = j.y2 / j.y1
    return j.y3 / j.y1 - 1.5 * r * r


def schwarz_solution(p: SchwarzSolutionParams, x: float) -> Jet3:
    """Jet of y = 1/(c1 x + c2) + c3 at x.

    The Schwarzian of the returned jet vanishes to rounding whenever
    y' != 0 (c1 = 0 gives the constant branch, flagged by the caller).
    """
    den = p.c1 * x + p.c2
    _guard_pole(1.0, den, "schwarz_solution")
    return Jet3(
        x=x,
        y=1.0 / den + p.c3,
        y1=-p.c1 / den**2,
        y2=2.0 * p.c1**2 / den**3,
        y3=-6.0 * p.c1**3 / den**4,
    )


def ode2_residual(j: Jet3, c0: float) -> float:
    """Left-hand side of y'' + 2(y' + c0 y'^{3/2} + y'^2)/(x - y).

    Requires y' >= 0 (real 3/2 power) and x != y. Vanishes on the general
    solution branch with b0 - a0 x < 0 and on admissible lines y = a0 x + b0.
    """
    if j.y1 < 0.0:
        raise DomainError("ode2_residual needs y' >= 0")
    gap = j.x - j.y
    _guard_pole(j.y1, gap, "ode2_residual")
    return j.y2 + 2.0 * (j.y1 + c0 * j.y1**1.5 + j.y1**2) / gap


def ode2_solution(p: Ode2SolutionParams, x: float) -> Jet3:
    """Jet of y = 1/(a0 (b0 - a0 x)) + (b0 - c0)/a0 at x.

    y' = 1/(b0 - a0 x)^2 is positive on both sides of the pole x = b0/a0;
    the returned jet satisfies the equation with constant c0 on the side
    where b0 - a0 x < 0 and with -c0 on the other side.
    """
    den = p.b0 - p.a0 * x
    _guard_pole(1.0, den, "ode2_solution")
    return Jet3(
        x=x,
        y=1.0 / (p.a0 * den) + (p.b0 - p.c0) / p.a0,
        y1=1.0 / den**2,
        y2=2.0 * p.a0 / den**3,
        y3=6.0 * p.a0**2 / den**4,
    )


def singular_slope_residual(a0: float, c0: float) -> float:
    """a0 (a0 + c0 sqrt(a0) + 1); zero iff the line y = a0 x + b0 solves the equation."""
    if a0 < 0.0:
        raise DomainError("slope must be >= 0 for a real sqrt")
    return a0 * (a0 + c0 * math.sqrt(a0) + 1.0)


def ode2_first_integral(j: Jet3) -> float:
    """((y - x) y'' - 2 y'(1 + y')) / (2 y'^{3/2}).

    Constant (equal to c0) along solutions of the second-order equation,
    and a first integral of the Schwarzian equation as well.
    """
    if j.y1 <= 0.0:
        raise DomainError("first integral needs y' > 0")
    return ((j.y - j.x) * j.y2 - 2.0 * j.y1 * (1.0 + j.y1)) / (2.0 * j.y1**1.5)


def multiplier_identity_check(p: SchwarzSolutionParams, x: float, h: float = 1e-4) -> float:
    """|d/dx(first integral) - multiplier * schwarzian| along the fractional-linear family.

    The derivative of the first integral factors as
    ((y - x)/(2 sqrt(y'))) * (Schwarzian of y), so both sides vanish on the
    solution family and the central-difference mismatch is O(h^2).
    """
    fp = ode2_first_integral(schwarz_solution(p, x + h))
    fm = ode2_first_integral(schwarz_solution(p, x - h))
    j = schwarz_solution(p, x)
    if j.y1 <= 0.0:
        raise DomainError("multiplier check needs y' > 0")
    mult = (j.y - j.x) / (2.0 * math.sqrt(j.y1))
    return abs((fp - fm) / (2.0 * h) - mult * schwarzian(j))


def continuous_backlund_invariants(j: Jet3) -> tuple[float, float]:
    """The pair (I1, I2) = (y''/y'^{3/2}, y - 2 y'^2 / y'').

    Both are first integrals of the Schwarzian equation; together they chart
    the solution family up to the known degeneracies of the constant shift.
    """
    if j.y1 <= 0.0:
        raise DomainError("invariants need y' > 0")
    if j.y2 == 0.0:
        raise DomainError("I2 undefined at y'' = 0")
    return j.y2 / j.y1**1.5, j.y - 2.0 * j.y1**2 / j.y2


def continuous_backlund_residual(ju: Jet3, jy: Jet3, alpha: float) -> float:
    """I2(u) + alpha * I1(y): the residual coupling two solutions.

    With alpha fitted at one point the residual stays at rounding level for
    all other points, because both invariants are constant along solutions.
    """
    i1u, i2u = continuous_backlund_invariants(ju)
    i1y, _ = continuous_backlund_invariants(jy)
    del i1u
    return i2u + alpha * i1y
