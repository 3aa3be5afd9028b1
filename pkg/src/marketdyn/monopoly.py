"""Single-supplier adoption models without market feedback.

All models resolve to closed forms. The normalized share u(t) starts at
u0 and climbs toward an asymptote (1 for a constant rate; possibly less
for decaying or truncated rate schedules). Demand is D(t) = N du/dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from . import numerics
from .errors import ParameterError
from .trajectory import Trajectory, from_channels

#: Relative threshold below which near-confluent denominators switch to
#: the analytic limit expression (avoids catastrophic cancellation).
CONFLUENT_EPS = 1e-9


# ---------------------------------------------------------------------------
# Rate schedules a(t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantRate:
    """a(t) = a."""

    a: float

    def __post_init__(self):
        if self.a < 0:
            raise ParameterError("rate must be nonnegative")

    def rate(self, t: float) -> float:
        return self.a

    def cumulative(self, t: float) -> float:
        return self.a * t


@dataclass(frozen=True)
class LinearRate:
    """a(t) = a0 + a1 t, linearly growing adoption pressure."""

    a0: float
    a1: float

    def __post_init__(self):
        if self.a0 < 0 or self.a1 < 0:
            raise ParameterError("rate coefficients must be nonnegative")

    def rate(self, t: float) -> float:
        return self.a0 + self.a1 * t

    def cumulative(self, t: float) -> float:
        return self.a0 * t + 0.5 * self.a1 * t * t


@dataclass(frozen=True)
class ExpDecayRate:
    """a(t) = a0 exp(-beta t): interest fades before saturation.

    The reachable share is capped at 1 - exp(-a0/beta) < 1.
    """

    a0: float
    beta: float

    def __post_init__(self):
        if self.a0 < 0 or self.beta < 0:
            raise ParameterError("rate coefficients must be nonnegative")

    def rate(self, t: float) -> float:
        return self.a0 * math.exp(-self.beta * t)

    def cumulative(self, t: float) -> float:
        if self.beta == 0.0:
            return self.a0 * t
        return (self.a0 / self.beta) * (1.0 - math.exp(-self.beta * t))

    def asymptotic_share(self, u0: float = 0.0) -> float:
        if self.beta == 0.0:
            return 1.0
        return 1.0 - (1.0 - u0) * math.exp(-self.a0 / self.beta)


@dataclass(frozen=True)
class CutoffRate:
    """a(t) = a up to time T, zero afterwards; the share freezes at T."""

    a: float
    T: float

    def __post_init__(self):
        if self.a < 0 or self.T < 0:
            raise ParameterError("rate and cutoff time must be nonnegative")

    def rate(self, t: float) -> float:
        return self.a if t <= self.T else 0.0

    def cumulative(self, t: float) -> float:
        return self.a * min(t, self.T)


@dataclass(frozen=True)
class TabulatedRate:
    """Piecewise-linear a(t) through the given (time, rate) points.

    The first value is held before the table and the last value after it.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 1:
            raise ParameterError("tabulated schedule needs at least one point")
        for (t0, r0), (t1, _) in zip(self.points, self.points[1:]):
            if not t1 > t0:
                raise ParameterError("tabulated times must be strictly increasing")
        if any(r < 0 for _, r in self.points):
            raise ParameterError("tabulated rates must be nonnegative")

    def rate(self, t: float) -> float:
        pts = self.points
        if t <= pts[0][0]:
            return pts[0][1]
        if t >= pts[-1][0]:
            return pts[-1][1]
        for (t0, r0), (t1, r1) in zip(pts, pts[1:]):
            if t0 <= t <= t1:
                w = (t - t0) / (t1 - t0)
                return r0 + w * (r1 - r0)
        raise AssertionError("unreachable")

    def cumulative(self, t: float) -> float:
        # The integrand is piecewise linear, so per-segment quadrature is exact.
        knots = [p[0] for p in self.points]
        total = 0.0
        prev = 0.0
        for knot in knots:
            if knot >= t:
                break
            if knot > prev:
                total += numerics.quadrature(self.rate, prev, knot, tol=1e-12)
                prev = knot
        if t > prev:
            total += numerics.quadrature(self.rate, prev, t, tol=1e-12)
        return total


RateSchedule = Union[ConstantRate, LinearRate, ExpDecayRate, CutoffRate, TabulatedRate]


# ---------------------------------------------------------------------------
# Model parameter sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimpleAdoption:
    """Constant adoption rate a for everyone; tau = 1/a is the mean wait."""

    a: float
    u0: float = 0.0
    N: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError("adoption rate a must be positive")
        if not 0.0 <= self.u0 <= 1.0:
            raise ParameterError("initial share u0 must lie in [0, 1]")
        if not self.N > 0:
            raise ParameterError("population N must be positive")

    @property
    def tau(self) -> float:
        return 1.0 / self.a


@dataclass(frozen=True)
class Segment:
    """One independent market segment of normalized size n_i."""

    n: float
    schedule: RateSchedule

    def __post_init__(self):
        if not 0.0 < self.n <= 1.0:
            raise ParameterError("segment size must lie in (0, 1]")


@dataclass(frozen=True)
class HesitationParams:
    """Three-state adoption with a hesitation stage.

    ``absorbing_hesitation``: hesitants eventually subscribe (P -> H -> U
    with intensity c). ``returning_hesitation``: hesitants drop back to
    the potential pool (H -> P with intensity c); adoption happens only
    from P.
    """

    a: float
    b: float
    c: float
    variant: str = "absorbing_hesitation"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise ParameterError("intensities a, b, c must be positive")
        if self.variant not in ("absorbing_hesitation", "returning_hesitation"):
            raise ParameterError(f"unknown hesitation variant {self.variant!r}")
        if self.variant == "returning_hesitation":
            lam1, lam2, _ = self.eigenvalues()
            assert lam2 < lam1 < 0.0, "transition eigenvalues must be negative"

    def eigenvalues(self) -> tuple[float, float, float]:
        """(lambda1, lambda2, r) of the (p, h) transition matrix.

        r = sqrt((a+b+c)^2 - 4ac); the eigenvalues are real, negative and
        satisfy lambda1*lambda2 = ac, lambda1+lambda2 = -(a+b+c).
        """
        s = self.a + self.b + self.c
        r = math.sqrt(s * s - 4.0 * self.a * self.c)
        return 0.5 * (-s + r), 0.5 * (-s - r), r


@dataclass(frozen=True)
class BirthDeathParams:
    """Adoption with arrivals into the potential pool and attrition.

    d: birth rate into the pool, f: death rate of potentials, g: death
    rate of subscribers. Assumes a + f > d + g so the pool drains.
    """

    a: float
    d: float
    f: float
    g: float

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError("adoption rate a must be positive")
        if min(self.d, self.f, self.g) < 0:
            raise ParameterError("birth/death rates must be nonnegative")
        if not self.a + self.f > self.d + self.g:
            raise ParameterError("requires a + f > d + g")


@dataclass(frozen=True)
class LatencyTimes:
    """Strategic latency indicators of a single-supplier market."""

    t50: float
    t10: float
    t10_already_reached: bool = False


# ---------------------------------------------------------------------------
# Paths and metrics
# ---------------------------------------------------------------------------

def simple_path(m: SimpleAdoption, grid: Sequence[float]) -> Trajectory:
    """u(t) = 1 - (1 - u0) e^{-a t} and demand D(t) = a N (1 - u0) e^{-a t}."""
    u = [1.0 - (1.0 - m.u0) * math.exp(-m.a * t) for t in grid]
    d = [m.a * m.N * (1.0 - m.u0) * math.exp(-m.a * t) for t in grid]
    return from_channels(grid, {"u": u, "D": d})


def simple_latency(m: SimpleAdoption) -> LatencyTimes:
    """Times to reach 50% and 10% of the market.

    With an empty start these are ln 2 / a and ln(10/9) / a, hence
    T10 = 0.152 T50. A positive initial share is handled by root
    solving on the closed form.
    """
    if m.u0 == 0.0:
        return LatencyTimes(t50=math.log(2.0) / m.a, t10=math.log(10.0 / 9.0) / m.a)
    if m.u0 >= 0.5:
        return LatencyTimes(t50=0.0, t10=0.0, t10_already_reached=True)
    horizon = 10.0 * math.log(2.0) / m.a

    def time_to(share: float) -> float:
        return numerics.solve_root(
            lambda t: 1.0 - (1.0 - m.u0) * math.exp(-m.a * t) - share,
            0.0, horizon, tol=1e-13)

    if m.u0 >= 0.1:
        return LatencyTimes(t50=time_to(0.5), t10=0.0, t10_already_reached=True)
    return LatencyTimes(t50=time_to(0.5), t10=time_to(0.1))


def scheduled_path(schedule: RateSchedule, u0: float, grid: Sequence[float],
                   N: float = 1.0) -> Trajectory:
    """Share under a time-dependent rate: u = 1 - (1 - u0) exp(-int a).

    The integral of a(t) is exact for every schedule kind; tabulated
    schedules integrate their piecewise-linear interpolant.
    """
    if not 0.0 <= u0 <= 1.0:
        raise ParameterError("initial share u0 must lie in [0, 1]")
    u, d = [], []
    for t in grid:
        decay = math.exp(-schedule.cumulative(t))
        u.append(1.0 - (1.0 - u0) * decay)
        d.append(schedule.rate(t) * N * (1.0 - u0) * decay)
    return from_channels(grid, {"u": u, "D": d})


def segmented_path(segments: Sequence[Segment], N: float,
                   grid: Sequence[float]) -> Trajectory:
    """Independent segments: u = 1 - sum_i n_i exp(-int a_i)."""
    total = math.fsum(s.n for s in segments)
    if abs(total - 1.0) > 1e-12:
        raise ParameterError(f"segment sizes must sum to 1, got {total!r}")
    u, d = [], []
    for t in grid:
        drop = 0.0
        dem = 0.0
        for s in segments:
            decay = math.exp(-s.schedule.cumulative(t))
            drop += s.n * decay
            dem += s.schedule.rate(t) * (s.n * N) * decay
        u.append(1.0 - drop)
        d.append(dem)
    return from_channels(grid, {"u": u, "D": d})


def _hesitation_absorbing(p: HesitationParams, t: float) -> tuple[float, float, float]:
    a, b, c = p.a, p.b, p.c
    s = a + b
    pot = math.exp(-s * t)
    denom = s - c
    if abs(denom) < CONFLUENT_EPS * (a + b + c):
        # Limit of the generic form as c -> a + b.
        u = 1.0 - math.exp(-s * t) * (1.0 + b * t)
        h = b * t * math.exp(-s * t)
    else:
        u = 1.0 - (b * math.exp(-c * t) + (a - c) * math.exp(-s * t)) / denom
        h = (b / denom) * (math.exp(-c * t) - math.exp(-s * t))
    return pot, h, u


def _hesitation_returning(p: HesitationParams, t: float) -> tuple[float, float, float]:
    lam1, lam2, r = p.eigenvalues()
    c = p.c
    e1, e2 = math.exp(lam1 * t), math.exp(lam2 * t)
    pot = ((c + lam1) * e1 - (c + lam2) * e2) / r
    h = p.b * (e1 - e2) / r
    return pot, h, 1.0 - pot - h


def hesitation_path(p: HesitationParams, grid: Sequence[float],
                    N: float = 1.0) -> Trajectory:
    """Potential / hesitant / subscriber shares from a clean start.

    p(0) = 1, h(0) = u(0) = 0, and p + h + u = 1 at every sample.
    Demand is N(a p + c h) for the absorbing variant and N a p for the
    returning variant (subscriptions only happen out of P there).
    """
    closed = (_hesitation_absorbing if p.variant == "absorbing_hesitation"
              else _hesitation_returning)
    pot, hes, sub, dem = [], [], [], []
    for t in grid:
        pp, hh, uu = closed(p, t)
        pot.append(pp)
        hes.append(hh)
        sub.append(uu)
        if p.variant == "absorbing_hesitation":
            dem.append(N * (p.a * pp + p.c * hh))
        else:
            dem.append(N * p.a * pp)
    return from_channels(grid, {"p": pot, "h": hes, "u": sub, "D": dem})


def birth_death_path(p: BirthDeathParams, grid: Sequence[float],
                     N: float = 1.0) -> Trajectory:
    """Share with pool churn: u = a/(a+f-d-g) e^{-gt} (1 - e^{-(a+f-d-g)t}).

    Demand is the subscription inflow a N p(t) = a N e^{-(a+f-d)t}; the
    printed exponent deliberately omits g, because the pool p(t) does
    not feel the subscriber death rate.
    """
    k = p.a + p.f - p.d
    drain = k - p.g
    pot, sub, dem = [], [], []
    for t in grid:
        pool = math.exp(-k * t)
        if abs(drain) < CONFLUENT_EPS * (p.a + p.f + p.d + p.g):
            u = p.a * t * math.exp(-p.g * t)
        else:
            u = (p.a / drain) * math.exp(-p.g * t) * (1.0 - math.exp(-drain * t))
        pot.append(pool)
        sub.append(u)
        dem.append(p.a * N * pool)
    return from_channels(grid, {"p": pot, "u": sub, "D": dem})


def ode_field(kind: str, params) -> numerics.VectorField:
    """Defining ODE system of a monopoly model, for cross-validation.

    Returns the field whose closed-form solution the corresponding
    ``*_path`` function implements. State layouts: ``simple``/
    ``scheduled`` -> (u,), ``segmented`` -> per-segment shares,
    ``hesitation`` -> (p, h, u), ``birth_death`` -> (p, u).
    """
    if kind == "simple":
        m: SimpleAdoption = params
        return numerics.VectorField(1, lambda t, y: [m.a * (1.0 - y[0])])
    if kind == "scheduled":
        schedule: RateSchedule = params
        return numerics.VectorField(1, lambda t, y: [schedule.rate(t) * (1.0 - y[0])])
    if kind == "segmented":
        segments: Sequence[Segment] = params

        def rhs(t, y):
            return [s.schedule.rate(t) * (s.n - y[i]) for i, s in enumerate(segments)]

        return numerics.VectorField(len(segments), rhs)
    if kind == "hesitation":
        h: HesitationParams = params
        if h.variant == "absorbing_hesitation":
            return numerics.VectorField(3, lambda t, y: [
                -(h.a + h.b) * y[0],
                h.b * y[0] - h.c * y[1],
                h.a * y[0] + h.c * y[1],
            ])
        return numerics.VectorField(3, lambda t, y: [
            -(h.a + h.b) * y[0] + h.c * y[1],
            h.b * y[0] - h.c * y[1],
            h.a * y[0],
        ])
    if kind == "birth_death":
        bd: BirthDeathParams = params
        return numerics.VectorField(2, lambda t, y: [
            (bd.d - bd.a - bd.f) * y[0],
            bd.a * y[0] - bd.g * y[1],
        ])
    raise ValueError(f"unknown monopoly model kind {kind!r}")
