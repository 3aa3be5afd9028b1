"""Single-market growth with a feedback kernel F(u).

The market obeys du/dt = rate * (1 - u) * F(u). The kernel family
covers no feedback, the innovator+imitator mix, pure imitation at
several strengths (sqrt(u), u, u^2, u^n), and trend-style kernels whose
attractiveness decays as the product spreads (1-u, 1/u, (1-u)/u, and
1/u with a hard cutoff share).

Where the separable integral has an elementary antiderivative the exact
t(u) and u(t) are used; the remaining kernels invert t(u) numerically.
All models are calibrated by the time T50 to reach half the market,
which makes their latency times directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import numerics
from .errors import DomainError, NeverReachedError, ParameterError
from .trajectory import Trajectory, from_channels

KERNEL_KINDS = ("none", "bass", "linear", "sqrt", "quadratic", "power",
                "one_minus_u", "inverse_u", "inverse_u_cutoff", "trend_linear_zero")

#: Offset used when a growth integral starts at an integrable singularity.
SINGULAR_EPS = 1e-9


@dataclass(frozen=True)
class FeedbackKernel:
    """Feedback term F(u) of the growth equation.

    ``ratio`` is the imitator/innovator strength for the ``bass`` kind,
    ``n`` the exponent for ``power``, and ``u1`` the freeze share for
    ``inverse_u_cutoff``.
    """

    kind: str
    ratio: float | None = None
    n: float | None = None
    u1: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "bass" and not (self.ratio is not None and self.ratio > 0):
            raise ParameterError("bass kernel needs ratio > 0")
        if self.kind == "power" and not (self.n is not None and self.n > 0):
            raise ParameterError("power kernel needs exponent n > 0")
        if self.kind == "inverse_u_cutoff" and not (
                self.u1 is not None and 0.0 < self.u1 < 1.0):
            raise ParameterError("cutoff kernel needs 0 < u1 < 1")

    def F(self, u: float) -> float:
        kind = self.kind
        if kind == "none":
            return 1.0
        if kind == "bass":
            return 1.0 + self.ratio * u
        if kind == "linear":
            return u
        if kind == "sqrt":
            return math.sqrt(u)
        if kind == "quadratic":
            return u * u
        if kind == "power":
            return u ** self.n
        if kind == "one_minus_u":
            return 1.0 - u
        if kind == "inverse_u":
            return math.inf if u == 0.0 else 1.0 / u
        if kind == "inverse_u_cutoff":
            if u >= self.u1:
                return 0.0
            return math.inf if u == 0.0 else 1.0 / u
        if kind == "trend_linear_zero":
            return math.inf if u == 0.0 else (1.0 - u) / u
        raise AssertionError(kind)

    def growth(self, u: float) -> float:
        """(1 - u) F(u), the unit-rate right-hand side."""
        if u == 0.0 and self.kind in ("inverse_u", "inverse_u_cutoff",
                                      "trend_linear_zero"):
            return math.inf
        return (1.0 - u) * self.F(u)

    @property
    def needs_positive_start(self) -> bool:
        """Kernels whose growth never leaves u = 0."""
        if self.kind in ("linear", "quadratic"):
            return True
        return self.kind == "power" and self.n >= 1.0


def kernel(kind: str, *, ratio: float | None = None, n: float | None = None,
           u1: float | None = None) -> FeedbackKernel:
    return FeedbackKernel(kind, ratio=ratio, n=n, u1=u1)


@dataclass(frozen=True)
class FeedbackModel:
    """A kernel plus growth rate, initial share and population size.

    The rate field is the kernel's own growth coefficient: the innovator
    rate a for ``none``/``bass`` (imitation then runs at ratio * a) and
    the kernel-specific gamma for everything else.
    """

    kernel: FeedbackKernel
    rate: float
    u0: float = 0.0
    N: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ParameterError("growth rate must be positive")
        if not 0.0 <= self.u0 < 1.0:
            raise ParameterError("initial share must lie in [0, 1)")
        if not self.N > 0:
            raise ParameterError("population N must be positive")

    @staticmethod
    def calibrated(kern: FeedbackKernel, t50: float, u0: float = 0.0,
                   N: float = 1.0) -> "FeedbackModel":
        return FeedbackModel(kern, calibrate_rate(kern, t50, u0), u0, N)


@dataclass(frozen=True)
class InflectionPoint:
    """Share, time and growth gradient at the demand peak."""

    u: float
    t: float
    gradient: float


@dataclass(frozen=True)
class MarketMetrics:
    """Latency and inflection indicators of a calibrated model."""

    t50: float
    t10: float
    t60_minus_t50: float
    u_infl: float | None
    t_infl: float | None
    gradient_at_infl: float | None
    t10_already_reached: bool = False


@dataclass(frozen=True)
class EquilibriumPoint:
    u: float
    kind: str  # attractor | repeller | not_equilibrium


# ---------------------------------------------------------------------------
# Unit-rate time integral phi(u; u0) with t = phi / rate
# ---------------------------------------------------------------------------

def _phi(kern: FeedbackKernel, u: float, u0: float) -> float:
    kind = kern.kind
    if kind == "none":
        return math.log((1.0 - u0) / (1.0 - u))
    if kind == "bass":
        rho = kern.ratio
        return math.log((1.0 + rho * u) * (1.0 - u0)
                        / ((1.0 + rho * u0) * (1.0 - u))) / (1.0 + rho)
    if kind == "linear":
        return math.log(u * (1.0 - u0) / (u0 * (1.0 - u)))
    if kind == "sqrt":
        ru, r0 = math.sqrt(u), math.sqrt(u0)
        return math.log((1.0 - r0) * (1.0 + ru) / ((1.0 + r0) * (1.0 - ru)))
    if kind == "quadratic":
        return (math.log(u * (1.0 - u0) / (u0 * (1.0 - u)))
                + 1.0 / u0 - 1.0 / u)
    if kind == "power":
        return _phi_power(kern.n, u, u0)
    if kind == "one_minus_u":
        return 1.0 / (1.0 - u) - 1.0 / (1.0 - u0)
    if kind in ("inverse_u", "inverse_u_cutoff"):
        return (u0 - u) + math.log((1.0 - u0) / (1.0 - u))
    if kind == "trend_linear_zero":
        return (math.log((1.0 - u) / (1.0 - u0))
                + u / (1.0 - u) - u0 / (1.0 - u0))
    raise AssertionError(kind)


def _phi_power(n: float, u: float, u0: float) -> float:
    """Growth integral of dv / (v^n (1 - v)) from u0 to u.

    The 1/(1 - v) pole is integrated analytically; the quadrature only
    sees the remainder (1 - v^n)/(v^n (1 - v)), which stays bounded near
    v = 1, so shares arbitrarily close to saturation are handled. A zero
    start is admissible for n < 1 (integrable singularity): the lower
    limit is shifted by a small offset whose contribution is added back
    from the leading series terms.
    """
    lo = u0
    head = 0.0
    if u0 == 0.0:
        if n >= 1.0:
            raise NeverReachedError("u^n feedback with n >= 1 never leaves u = 0")
        lo = min(SINGULAR_EPS, 0.5 * u)
        # int_0^lo v^-n (1 + v + O(v^2)) dv, truncated after two terms.
        head = lo ** (1.0 - n) / (1.0 - n) + lo ** (2.0 - n) / (2.0 - n)
    if u <= lo:
        return 0.0

    def regular_part(v: float) -> float:
        if v >= 1.0:
            return float(n)
        vn = v ** n
        return (1.0 - vn) / (vn * (1.0 - v))

    tail = math.log((1.0 - lo) / (1.0 - u))
    return head + tail + numerics.quadrature(regular_part, lo, u, tol=1e-11)


def _check_share_args(m: FeedbackModel, u: float) -> None:
    if not m.u0 <= u < 1.0:
        raise DomainError(f"share {u!r} outside [u0, 1)")
    if m.u0 == 0.0 and u > 0.0 and m.kernel.needs_positive_start:
        raise NeverReachedError(
            "market share stays 0 forever without an initial customer base")


def t_of_u(m: FeedbackModel, u: float) -> float:
    """Time at which the share reaches u; exact where a closed form exists."""
    if u == m.u0:
        return 0.0
    _check_share_args(m, u)
    kern = m.kernel
    if kern.kind == "inverse_u_cutoff" and u > kern.u1:
        raise DomainError(f"share never exceeds the cutoff u1 = {kern.u1}")
    return _phi(kern, u, m.u0) / m.rate


def u_of_t(m: FeedbackModel, t: float) -> float:
    """Share at time t.

    Closed forms cover the none, bass, linear, sqrt and 1-u kernels (and
    the cutoff kernel piecewise); the rest invert t(u) on a monotone
    bracket.
    """
    if t < 0:
        raise DomainError("time must be nonnegative")
    if t == 0.0:
        return m.u0
    kind = m.kernel.kind
    u0 = m.u0
    if kind == "none":
        return 1.0 - (1.0 - u0) * math.exp(-m.rate * t)
    if kind == "bass":
        rho = m.kernel.ratio
        e = math.exp(-m.rate * (1.0 + rho) * t)
        return ((1.0 + rho * u0 - (1.0 - u0) * e)
                / (1.0 + rho * u0 + rho * (1.0 - u0) * e))
    if kind == "linear":
        if u0 == 0.0:
            raise NeverReachedError(
                "market share stays 0 forever without an initial customer base")
        e = math.exp(-m.rate * t)
        return u0 / (u0 + (1.0 - u0) * e)
    if kind == "sqrt":
        r0 = math.sqrt(u0)
        e = math.exp(-m.rate * t)
        v = (1.0 + r0 - (1.0 - r0) * e) / (1.0 + r0 + (1.0 - r0) * e)
        return v * v
    if kind == "one_minus_u":
        return 1.0 - (1.0 - u0) / (1.0 + (1.0 - u0) * m.rate * t)
    if kind == "inverse_u_cutoff":
        u1 = m.kernel.u1
        if t >= cutoff_time(m):
            return u1
        return _invert_phi(m, t, hi_limit=u1)
    if m.kernel.needs_positive_start and u0 == 0.0:
        raise NeverReachedError(
            "market share stays 0 forever without an initial customer base")
    return _invert_phi(m, t)


def _invert_phi(m: FeedbackModel, t: float, hi_limit: float = 1.0) -> float:
    # Expand the upper end geometrically toward the limit share; the
    # exponent stops where 1 - u would fall below double resolution, so
    # shares are reported saturated at that point.
    target = m.rate * t
    lo = m.u0
    hi = None
    for k in range(1, 51):
        cand = hi_limit - (hi_limit - m.u0) * 0.5 ** k
        if cand <= lo or cand >= hi_limit:
            continue
        if _phi(m.kernel, cand, m.u0) >= target:
            hi = cand
            break
        lo = cand
    if hi is None:
        return lo
    return numerics.solve_root(
        lambda u: _phi(m.kernel, u, m.u0) - target, lo, hi, tol=1e-14)


def calibrate_rate(kern: FeedbackKernel, t50: float, u0: float = 0.0) -> float:
    """Growth rate that puts the model at half the market after t50.

    Closed per kernel since t(u) scales as 1 / rate throughout; for the
    u^n kernel the growth integral is evaluated numerically.
    """
    if not t50 > 0:
        raise ParameterError("T50 must be positive")
    if u0 >= 0.5:
        raise ParameterError("calibration impossible: u0 already at or above 50%")
    if u0 == 0.0 and kern.needs_positive_start:
        raise NeverReachedError(
            "market share stays 0 forever without an initial customer base")
    if kern.kind == "inverse_u_cutoff" and kern.u1 < 0.5:
        raise ParameterError("calibration impossible: cutoff u1 below 50%")
    return _phi(kern, 0.5, u0) / t50


def latency_metrics(m: FeedbackModel) -> MarketMetrics:
    """T10, T50 and T60 - T50 plus the inflection summary."""
    if m.u0 >= 0.5:
        raise ParameterError("latency metrics need u0 < 0.5")
    t50 = t_of_u(m, 0.5)
    t60 = t_of_u(m, 0.6) if not (
        m.kernel.kind == "inverse_u_cutoff" and m.kernel.u1 < 0.6) else math.nan
    if m.u0 >= 0.1:
        t10, reached = 0.0, True
    else:
        t10, reached = t_of_u(m, 0.1), False
    infl = inflection(m)
    return MarketMetrics(
        t50=t50, t10=t10, t60_minus_t50=t60 - t50,
        u_infl=infl.u if infl else None,
        t_infl=infl.t if infl else None,
        gradient_at_infl=infl.gradient if infl else None,
        t10_already_reached=reached)


def inflection(m: FeedbackModel) -> Optional[InflectionPoint]:
    """Demand peak of the growth curve, or None when none exists.

    The inflection share depends only on the kernel: 1/2 for linear
    feedback, 1/3 for sqrt, 2/3 for quadratic, n/(n+1) for u^n, and
    (ratio - 1)/(2 ratio) for the innovator+imitator mix (which has an
    interior peak only when imitation exceeds innovation). The decaying
    kernels have monotone demand.
    """
    kind = m.kernel.kind
    if kind == "linear":
        u_star = 0.5
    elif kind == "sqrt":
        u_star = 1.0 / 3.0
    elif kind == "quadratic":
        u_star = 2.0 / 3.0
    elif kind == "power":
        u_star = m.kernel.n / (m.kernel.n + 1.0)
    elif kind == "bass":
        rho = m.kernel.ratio
        if rho <= 1.0:
            return None
        u_star = (rho - 1.0) / (2.0 * rho)
    else:
        return None
    if u_star <= m.u0:
        return None
    gradient = m.rate * m.kernel.growth(u_star)
    return InflectionPoint(u=u_star, t=t_of_u(m, u_star), gradient=gradient)


def demand_curve(m: FeedbackModel, grid: Sequence[float]) -> Trajectory:
    """Sales per unit time D(t) = N * rate * (1 - u) F(u) along the grid."""
    kind = m.kernel.kind
    u0, rate, N = m.u0, m.rate, m.N
    out = []
    if kind == "none":
        for t in grid:
            out.append(rate * N * (1.0 - u0) * math.exp(-rate * t))
    elif kind == "bass":
        rho = m.kernel.ratio
        a = rate
        g = rho * a
        for t in grid:
            e = math.exp(-(a + g) * t)
            den = a + g * u0 + g * (1.0 - u0) * e
            out.append(N * (a + g) ** 2 * (1.0 - u0) * (a + g * u0) * e / (den * den))
    elif kind == "linear":
        # Differentiating u(t) = u0/(u0 + (1-u0)e^{-rate t}) carries a
        # (1-u0) factor; D(0) = N rate u0 (1-u0), which the small-u0
        # shorthand N rate u0 approximates.
        for t in grid:
            e = math.exp(-rate * t)
            den = u0 + (1.0 - u0) * e
            out.append(N * rate * u0 * (1.0 - u0) * e / (den * den))
    elif kind == "sqrt":
        r0 = math.sqrt(u0)
        for t in grid:
            e = math.exp(-rate * t)
            den = 1.0 + r0 + (1.0 - r0) * e
            num = 1.0 + r0 - (1.0 - r0) * e
            out.append(4.0 * N * (1.0 - u0) * rate * e * num / den ** 3)
    elif kind == "one_minus_u":
        for t in grid:
            one_minus = (1.0 - u0) / (1.0 + (1.0 - u0) * rate * t)
            out.append(N * rate * one_minus * one_minus)
    else:
        for t in grid:
            u = u_of_t(m, t)
            out.append(N * rate * m.kernel.growth(u))
    return from_channels(grid, {"D": out})


def feedback_path(m: FeedbackModel, grid: Sequence[float]) -> Trajectory:
    """Share and demand along the grid."""
    u = [u_of_t(m, t) for t in grid]
    d = []
    for ui in u:
        d.append(m.N * m.rate * m.kernel.growth(ui))
    return from_channels(grid, {"u": u, "D": d})


def cutoff_time(m: FeedbackModel) -> float:
    """Time at which a cutoff kernel freezes: t1 = phi(u1) / rate."""
    if m.kernel.kind != "inverse_u_cutoff":
        raise ParameterError("cutoff_time applies to the inverse_u_cutoff kernel")
    return _phi(m.kernel, m.kernel.u1, m.u0) / m.rate


def cutoff_path(m: FeedbackModel, grid: Sequence[float]) -> Trajectory:
    """1/u growth frozen at the cutoff share u1 from t1 onward."""
    if m.kernel.kind != "inverse_u_cutoff":
        raise ParameterError("cutoff_path applies to the inverse_u_cutoff kernel")
    return feedback_path(m, grid)


def classify_equilibria(kern: FeedbackKernel) -> list[EquilibriumPoint]:
    """Roots of (1 - u) F(u) on [0, 1] with their stability.

    Classification samples the growth sign on each side (restricted to
    [0, 1]): positive below and nonpositive above means attractor,
    negative below or positive above means repeller. The sqrt and sub-
    linear power kernels report u = 0 as not an equilibrium: the kernel
    is not smooth there, the market accelerates away from an empty
    start (for sqrt(u) the initial acceleration is rate^2 / 2 > 0).
    """
    kind = kern.kind
    if kind == "inverse_u_cutoff":
        # Growth is positive below u1 and zero on [u1, 1]; the flow
        # parks at u1 no matter where it starts below.
        return [EquilibriumPoint(kern.u1, "attractor")]

    roots: list[float] = []
    if kind in ("linear", "quadratic", "sqrt", "power"):
        roots.append(0.0)
    roots.append(1.0)

    out = []
    delta = 1e-6
    for r in roots:
        if r == 0.0 and (kind == "sqrt" or (kind == "power" and kern.n < 1.0)):
            out.append(EquilibriumPoint(0.0, "not_equilibrium"))
            continue
        below = kern.growth(r - delta) if r - delta >= 0.0 else None
        above = kern.growth(r + delta) if r + delta <= 1.0 else None
        if below is None:
            label = "repeller" if above > 0 else "attractor"
        elif above is None:
            label = "attractor" if below > 0 else "repeller"
        else:
            if below > 0 and above <= 0:
                label = "attractor"
            elif below < 0 and above >= 0:
                label = "repeller"
            else:
                label = "attractor" if below > 0 else "repeller"
        out.append(EquilibriumPoint(r, label))
    return out


def ode_field(m: FeedbackModel) -> numerics.VectorField:
    """du/dt = rate (1 - u) F(u), for cross-validation against the closed forms."""
    return numerics.VectorField(1, lambda t, y: [m.rate * m.kernel.growth(y[0])])


def discrepancy_notes(kern: FeedbackKernel) -> tuple[str, ...]:
    """Ledger notes surfaced whenever a kernel with a known reference
    inconsistency is evaluated; the CLI prints them with the results."""
    if kern.kind == "quadratic":
        return (
            "quadratic kernel: the reference table lists T10/T50 = 0.88 at "
            "u0 = 0.01; the t(u) consistent with the growth equation itself "
            "(checked against direct integration) gives 0.90. Both are shown.",
        )
    if kern.kind == "trend_linear_zero":
        return (
            "(1-u)/u kernel: the reference table prints a 33-day latency at "
            "T50 = 5 years where the formula value 0.01874*T50 is 34 days.",
        )
    return ()
