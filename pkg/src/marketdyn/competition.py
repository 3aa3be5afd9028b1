"""Markets with several suppliers competing for shares.

Covers growth without churn (fixed points and the innovators-only
closed form), spontaneous churn (asymptotic shares from the balance
system, matrix-exponential dynamics and the two-supplier closed form),
periodically modulated churn rates, and stimulated churn with its
winner-take-all behavior.

Churn never changes the total customer count: the flow functions C_i
sum to zero identically, so all fixed points of a fully developed
market lie on the hyperplane sum(u_i) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from . import numerics
from .errors import (
    DegenerateMarketError,
    InconsistentSpecError,
    InfeasibleMarketError,
    IntegrationInvariantError,
    ParameterError,
    SingularMatrixError,
)
from .numerics import SquareMatrix, VectorField
from .trajectory import Trajectory, from_channels


# ---------------------------------------------------------------------------
# Parameter sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BassCompetition:
    """Per-supplier innovation (m_i) and imitation (r_i) coefficients.

    Supplier i gains new customers at rate (1 - sum u_j)(m_i + r_i u_i).
    """

    m: tuple[float, ...]
    r: tuple[float, ...]
    u0: tuple[float, ...]

    def __post_init__(self):
        n = len(self.m)
        if n < 1 or len(self.r) != n or len(self.u0) != n:
            raise ParameterError("m, r and u0 must have one entry per supplier")
        if any(v < 0 for v in self.m) or any(v < 0 for v in self.r):
            raise ParameterError("coefficients must be nonnegative")
        if any(not m + r > 0 for m, r in zip(self.m, self.r)):
            raise ParameterError("each supplier needs m_i + r_i > 0")
        if any(v < 0 for v in self.u0) or math.fsum(self.u0) > 1.0 + 1e-12:
            raise ParameterError("initial shares must be nonnegative with sum <= 1")
        if all(v == 0 for v in self.m) and all(v == 0 for v in self.u0):
            raise ParameterError("an all-imitator market needs a nonzero initial share")

    @property
    def n(self) -> int:
        return len(self.m)


@dataclass(frozen=True)
class ChurnMatrix:
    """Spontaneous churn rates; a[i][j] is the flow intensity i -> j.

    The diagonal must be zero; the total outflow rate of supplier i is
    derived as the row sum over j != i.
    """

    a: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        n = len(self.a)
        if n < 1 or any(len(row) != n for row in self.a):
            raise ParameterError("churn rates must form a square grid")
        for i, row in enumerate(self.a):
            if row[i] != 0.0:
                raise ParameterError("diagonal churn entries must be zero (derived)")
            if any(v < 0 for v in row):
                raise ParameterError("churn rates must be nonnegative")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[float]]) -> "ChurnMatrix":
        return ChurnMatrix(tuple(tuple(float(v) for v in r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.a)

    def outflow(self, i: int) -> float:
        return math.fsum(self.a[i][j] for j in range(self.n) if j != i)

    def scaled(self, factor: float) -> "ChurnMatrix":
        return ChurnMatrix(tuple(tuple(factor * v for v in row) for row in self.a))


@dataclass(frozen=True)
class Sinusoid:
    """amplitude * sin(2 pi t / period + phase); zero mean over one period."""

    amplitude: float
    period: float
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0 or not self.period > 0:
            raise ParameterError("sinusoid needs amplitude >= 0 and period > 0")

    def value(self, t: float) -> float:
        return self.amplitude * math.sin(2.0 * math.pi * t / self.period + self.phase)

    def integral(self, t: float) -> float:
        """Exact integral from 0 to t (kept as a test oracle)."""
        w = 2.0 * math.pi / self.period
        return (self.amplitude / w) * (math.cos(self.phase) - math.cos(w * t + self.phase))


@dataclass(frozen=True)
class PairModulation:
    """Periodic modulation of one churn rate a_ij."""

    i: int
    j: int
    terms: tuple[Sinusoid, ...]

    def value(self, t: float) -> float:
        return math.fsum(s.value(t) for s in self.terms)

    def amplitude_bound(self) -> float:
        return math.fsum(s.amplitude for s in self.terms)


@dataclass(frozen=True)
class PeriodicChurnSpec:
    """Baseline churn rates plus zero-mean periodic modulations."""

    a0: ChurnMatrix
    eps: tuple[PairModulation, ...] = field(default=())

    def __post_init__(self):
        n = self.a0.n
        for mod in self.eps:
            if not (0 <= mod.i < n and 0 <= mod.j < n and mod.i != mod.j):
                raise ParameterError("modulation indices must address an off-diagonal pair")
            if self.a0.a[mod.i][mod.j] - mod.amplitude_bound() < -1e-12:
                raise ParameterError("modulated churn rate can become negative")

    @property
    def n(self) -> int:
        return self.a0.n

    def epsilon(self, i: int, j: int, t: float) -> float:
        return math.fsum(m.value(t) for m in self.eps if m.i == i and m.j == j)

    def rate(self, i: int, j: int, t: float) -> float:
        return self.a0.a[i][j] + self.epsilon(i, j, t)

    def shortest_period(self) -> float:
        periods = [s.period for m in self.eps for s in m.terms]
        return min(periods) if periods else math.inf


@dataclass(frozen=True)
class StimulatedChurnSpec:
    """Churn whose popularity feedback is f_i(u) = b_i u_i + eps_i.

    eps_i in {0, 1} switches the spontaneous component per supplier;
    purely stimulated markets (all eps_i = 0) are winner-take-all.
    """

    churn: ChurnMatrix
    b: tuple[float, ...]
    eps: tuple[int, ...]

    def __post_init__(self):
        n = self.churn.n
        if len(self.b) != n or len(self.eps) != n:
            raise ParameterError("b and eps need one entry per supplier")
        if any(v < 0 for v in self.b):
            raise ParameterError("stimulation strengths must be nonnegative")
        if any(e not in (0, 1) for e in self.eps):
            raise ParameterError("eps entries must be 0 or 1")
        if all(v == 0 for v in self.b) and all(e == 0 for e in self.eps):
            raise ParameterError("at least one of b_i, eps_i must be nonzero")

    @property
    def n(self) -> int:
        return self.churn.n

    @property
    def purely_stimulated(self) -> bool:
        return all(e == 0 for e in self.eps)


ChurnSpec = Union[ChurnMatrix, StimulatedChurnSpec, PeriodicChurnSpec]


@dataclass(frozen=True)
class StimulatedFixedPoint:
    u: tuple[float, ...]
    classification: str  # winner_take_all | shared
    vertices: tuple[tuple[float, ...], ...] | None = None


# ---------------------------------------------------------------------------
# Churn flow functions
# ---------------------------------------------------------------------------

def churn_flows(churn: Optional[ChurnSpec], t: float,
                u: Sequence[float]) -> list[float]:
    """Net churn flow C_i for each supplier; sums to zero identically."""
    if churn is None:
        return [0.0] * len(u)
    if isinstance(churn, ChurnMatrix):
        a = churn.a
        n = churn.n
        return [
            math.fsum(a[j][i] * u[j] - a[i][j] * u[i] for j in range(n) if j != i)
            for i in range(n)
        ]
    if isinstance(churn, PeriodicChurnSpec):
        n = churn.n
        return [
            math.fsum(churn.rate(j, i, t) * u[j] - churn.rate(i, j, t) * u[i]
                      for j in range(n) if j != i)
            for i in range(n)
        ]
    if isinstance(churn, StimulatedChurnSpec):
        a = churn.churn.a
        b, eps = churn.b, churn.eps
        n = churn.n

        def f(i: int, ui: float) -> float:
            return b[i] * ui + eps[i]

        return [
            math.fsum(a[j][i] * u[j] * f(i, u[i]) - a[i][j] * u[i] * f(j, u[j])
                      for j in range(n) if j != i)
            for i in range(n)
        ]
    raise ParameterError(f"unsupported churn specification {type(churn).__name__}")


# ---------------------------------------------------------------------------
# Markets without churning
# ---------------------------------------------------------------------------

def fixed_point_no_churn(market: BassCompetition) -> list[float]:
    """Asymptotic shares of the no-churn market.

    All-innovator markets split in proportion to m_i; all-imitator
    markets amplify the initial shares through the exponents r_i / r_k;
    the mixed case solves the share-sum condition for the reference
    supplier by root finding and maps the rest through the first
    integral u_i(u_k).
    """
    m, r, u0 = market.m, market.r, market.u0
    n = market.n
    s0 = math.fsum(u0)

    if all(v == 0 for v in r):
        total_m = math.fsum(m)
        return [u0i + mi * (1.0 - s0) / total_m for u0i, mi in zip(u0, m)]

    if all(v == 0 for v in m):
        k = max(range(n), key=lambda i: u0[i])

        def share(i: int, x: float) -> float:
            if u0[i] == 0.0:
                return 0.0
            return u0[i] * (x / u0[k]) ** (r[i] / r[k])

        def gap(x: float) -> float:
            return math.fsum(share(i, x) for i in range(n)) - 1.0

        try:
            root = numerics.solve_root(gap, u0[k], 1.0, tol=1e-14)
        except numerics.BracketInvalidError as exc:
            raise InfeasibleMarketError(str(exc)) from exc
        return [share(i, root) for i in range(n)]

    if any(v == 0 for v in r):
        raise ParameterError(
            "fixed point solve needs r_i > 0 for all suppliers (or all zero); "
            "use the numeric path for mixed markets")

    k = max(range(n), key=lambda i: m[i] + r[i] * u0[i])
    base = m[k] + r[k] * u0[k]

    def share(i: int, x: float) -> float:
        grow = ((m[k] + r[k] * x) / base) ** (r[i] / r[k])
        return (m[i] / r[i] + u0[i]) * grow - m[i] / r[i]

    def gap(x: float) -> float:
        return math.fsum(share(i, x) for i in range(n)) - 1.0

    if gap(u0[k]) >= 0.0:
        return list(u0)
    try:
        root = numerics.solve_root(gap, u0[k], 1.0, tol=1e-14)
    except numerics.BracketInvalidError as exc:
        raise InfeasibleMarketError(str(exc)) from exc
    return [share(i, root) for i in range(n)]


def innovators_only_path(m: Sequence[float], grid: Sequence[float]) -> Trajectory:
    """u_i(t) = (m_i / sum m)(1 - e^{-sum(m) t}); shares stay proportional to m."""
    total = math.fsum(m)
    if any(v < 0 for v in m) or not total > 0:
        raise ParameterError("innovation coefficients must be nonnegative with positive sum")
    channels = {}
    for i, mi in enumerate(m):
        channels[f"u{i + 1}"] = [(mi / total) * (1.0 - math.exp(-total * t)) for t in grid]
    return from_channels(grid, channels)


# ---------------------------------------------------------------------------
# Spontaneous churning
# ---------------------------------------------------------------------------

def _balance_matrix(c: ChurnMatrix) -> SquareMatrix:
    """n-1 zero-net-churn rows plus the developed-market row sum(u) = 1."""
    n = c.n
    rows = []
    for i in range(n - 1):
        row = [c.a[j][i] if j != i else -c.outflow(i) for j in range(n)]
        rows.append(row)
    rows.append([1.0] * n)
    return SquareMatrix.from_rows(rows)


def spontaneous_equilibrium(c: ChurnMatrix) -> list[float]:
    """Asymptotic shares of a fully developed market with spontaneous churn.

    Raises:
        DegenerateMarketError: When the balance system is singular
            (two or more suppliers lose no customers); solve the
            dynamic path and take its long-time limit instead.
    """
    n = c.n
    if n == 1:
        return [1.0]
    a = _balance_matrix(c)
    rhs = [0.0] * (n - 1) + [1.0]
    try:
        return numerics.linear_solve(a, rhs)
    except SingularMatrixError as exc:
        raise DegenerateMarketError(
            "churn balance system is singular (several suppliers lose no "
            "customers); use the dynamic path and take t -> infinity") from exc


def spontaneous_equilibrium_cofactor(c: ChurnMatrix) -> list[float]:
    """Same fixed point via cofactors of the balance matrix: u_i = A_ni / D."""
    n = c.n
    if n == 1:
        return [1.0]
    a = _balance_matrix(c)
    d = numerics.det(a)
    if d == 0.0:
        raise DegenerateMarketError("churn balance system is singular")
    return [numerics.cofactor(a, n - 1, i) / d for i in range(n)]


def _innovator_churn_matrix(m: Sequence[float], c: ChurnMatrix) -> SquareMatrix:
    """Coefficient matrix Q of du/dt = m - Q u for innovators plus churn."""
    n = c.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(m[i] + c.outflow(i))
            else:
                row.append(m[i] - c.a[j][i])
        rows.append(row)
    return SquareMatrix.from_rows(rows)


def spontaneous_path(m: Sequence[float], c: ChurnMatrix,
                     grid: Sequence[float]) -> Trajectory:
    """Shares of an innovators-only market with spontaneous churn, from zero.

    Evaluates u(t) = (I - e^{-Qt}) Q^{-1} m through the matrix
    exponential; if Q is singular the path falls back to direct
    integration (noted on the trajectory).
    """
    n = c.n
    if len(m) != n:
        raise ParameterError("m must have one entry per supplier")
    q = _innovator_churn_matrix(m, c)
    notes: tuple[str, ...] = ()
    try:
        v = numerics.linear_solve(q, list(m))
        neg_q = q.scaled(-1.0)
        rows = []
        for t in grid:
            decay = numerics.mat_exp_apply(neg_q, t, v)
            rows.append(tuple(vi - di for vi, di in zip(v, decay)))
    except SingularMatrixError:
        field_ = VectorField(n, lambda t, y: [
            m[i] - math.fsum(q.entries[i][j] * y[j] for j in range(n))
            for i in range(n)])
        rows = numerics.sample_ivp(field_, [0.0] * n, grid)
        notes = ("matrix-exponential route unavailable (singular Q); integrated numerically",)
    channels = {f"u{i + 1}": [row[i] for row in rows] for i in range(n)}
    return from_channels(grid, channels, notes=notes)


def two_supplier_spontaneous_path(m1: float, m2: float, a12: float, a21: float,
                                  grid: Sequence[float]) -> Trajectory:
    """Closed two-exponential form of the two-supplier innovator+churn path.

    The decay rates are a12 + a21 (churn mixing) and m1 + m2 (market
    fill); the near-confluent case delegates to the matrix exponential.
    """
    s = a12 + a21
    sigma = m1 + m2
    if not s > 0 or not sigma > 0:
        raise ParameterError("needs positive total churn and innovation rates")
    if abs(sigma - s) < 1e-9 * (sigma + s):
        return spontaneous_path((m1, m2), ChurnMatrix.from_rows([[0, a12], [a21, 0]]), grid)
    share1 = a21 / s
    share2 = a12 / s
    k_mix = (a21 * m2 - a12 * m1) / (s * (sigma - s))
    k1 = (m1 - a21) / (sigma - s)
    k2 = (m2 - a12) / (sigma - s)
    u1 = [share1 - k_mix * math.exp(-s * t) - k1 * math.exp(-sigma * t) for t in grid]
    u2 = [share2 + k_mix * math.exp(-s * t) - k2 * math.exp(-sigma * t) for t in grid]
    return from_channels(grid, {"u1": u1, "u2": u2})


def two_supplier_peak_time(m1: float, m2: float, a21: float) -> float:
    """Peak time of supplier 2's share when it loses customers one-way
    (a12 = 0): T_m = (ln(m1 + m2) - ln a21) / (m1 + m2 - a21)."""
    sigma = m1 + m2
    if not (sigma > 0 and a21 > 0):
        raise ParameterError("needs positive rates")
    if abs(sigma - a21) < 1e-12 * (sigma + a21):
        return 1.0 / a21
    return (math.log(sigma) - math.log(a21)) / (sigma - a21)


# ---------------------------------------------------------------------------
# Periodic churning (two suppliers, fully developed market)
# ---------------------------------------------------------------------------

def periodic_two_supplier_path(spec: PeriodicChurnSpec, u1_0: float,
                               grid: Sequence[float]) -> Trajectory:
    """Two-supplier share under periodically modulated churn rates.

    Returns u1 and u2 together with the three solution components: the
    constant mean share a21/(a12 + a21), a periodic zero-mean part, and
    a decaying transient from the initial share. The accumulated
    modulation integral and the driven convolution are evaluated by
    composite quadrature on a refined copy of the grid.
    """
    if spec.n != 2:
        raise ParameterError("the analytic periodic path covers two suppliers")
    if not 0.0 <= u1_0 <= 1.0:
        raise ParameterError("u1_0 must lie in [0, 1]")
    a12_0, a21_0 = spec.a0.a[0][1], spec.a0.a[1][0]
    s0 = a12_0 + a21_0
    if not s0 > 0:
        raise ParameterError("baseline churn rates must not both vanish")
    mean_share = a21_0 / s0

    def eps_sum(t: float) -> float:
        return spec.epsilon(0, 1, t) + spec.epsilon(1, 0, t)

    def eps21(t: float) -> float:
        return spec.epsilon(1, 0, t)

    p_min = spec.shortest_period()
    target = min(p_min / 128.0 if math.isfinite(p_min) else math.inf, 0.2 / s0)

    e_acc = 0.0       # integral of eps12 + eps21 since t = 0
    sigma_acc = 0.0   # driven convolution integral
    times = list(grid)
    u1, mean_ch, periodic_ch, decaying_ch = [], [], [], []

    def emit(t: float, e_val: float, sigma_val: float) -> None:
        alpha = math.exp(e_val) - 1.0
        periodic = (-alpha * mean_share + sigma_val) / (1.0 + alpha)
        decaying = (u1_0 - mean_share) / (1.0 + alpha) * math.exp(-s0 * t)
        mean_ch.append(mean_share)
        periodic_ch.append(periodic)
        decaying_ch.append(decaying)
        u1.append(mean_share + periodic + decaying)

    emit(times[0], 0.0, 0.0)
    if times[0] != 0.0:
        raise ParameterError("grid must start at t = 0 (initial share is given there)")

    def driven(x: float, e_val: float) -> float:
        alpha = math.exp(e_val) - 1.0
        return a21_0 * alpha + eps21(x) * (1.0 + alpha)

    for t0, t1 in zip(times, times[1:]):
        seg = t1 - t0
        nsub = max(4, min(20_000, math.ceil(seg / target))) if math.isfinite(target) else 4
        h = seg / nsub
        for k in range(nsub):
            x0 = t0 + k * h
            xm = x0 + 0.5 * h
            x1 = x0 + h
            e0 = e_acc
            em = e0 + (h / 12.0) * (eps_sum(x0) + 4.0 * eps_sum(x0 + 0.25 * h) + eps_sum(xm))
            e1 = em + (h / 12.0) * (eps_sum(xm) + 4.0 * eps_sum(x0 + 0.75 * h) + eps_sum(x1))
            decay_h = math.exp(-s0 * h)
            decay_half = math.exp(-0.5 * s0 * h)
            sigma_acc = sigma_acc * decay_h + (h / 6.0) * (
                driven(x0, e0) * decay_h
                + 4.0 * driven(xm, em) * decay_half
                + driven(x1, e1))
            e_acc = e1
        emit(t1, e_acc, sigma_acc)

    u2 = [1.0 - v for v in u1]
    return from_channels(times, {
        "u1": u1, "u2": u2,
        "mean": mean_ch, "periodic": periodic_ch, "decaying": decaying_ch,
    })


# ---------------------------------------------------------------------------
# Stimulated churning
# ---------------------------------------------------------------------------

def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    if a == 0.0:
        return [-c / b] if b != 0.0 else []
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    q = -(b + math.copysign(math.sqrt(disc), b)) / 2.0
    roots = [q / a]
    if q != 0.0:
        roots.append(c / q)
    return roots


def stimulated_fixed_point(spec: StimulatedChurnSpec,
                           u0: Sequence[float] | None = None,
                           horizon: float | None = None) -> StimulatedFixedPoint:
    """Asymptotic state of a fully developed market with stimulated churn.

    Purely stimulated churn admits no stable interior balance: the
    stable fixed points are the simplex vertices, so the market tips to
    a single supplier (winner-take-all). The realized vertex is found
    by simulating from ``u0`` (uniform by default). With a spontaneous
    component present, the balance equations have an interior solution;
    for two suppliers it is the admissible root of a quadratic.
    """
    n = spec.n
    if spec.purely_stimulated:
        start = tuple(u0) if u0 is not None else tuple(1.0 / n for _ in range(n))
        if abs(math.fsum(start) - 1.0) > 1e-9:
            raise ParameterError("initial shares of a developed market must sum to 1")
        rates = [x for row in spec.churn.a for x in row if x > 0] + [b for b in spec.b if b > 0]
        slowest = min(rates) if rates else 1.0
        t_end = horizon if horizon is not None else 60.0 / slowest
        field_ = VectorField(n, lambda t, y: churn_flows(spec, t, y))
        final = numerics.sample_ivp(field_, list(start), [0.0, t_end])[-1]
        winner = max(range(n), key=lambda i: final[i])
        vertex = tuple(1.0 if i == winner else 0.0 for i in range(n))
        vertices = tuple(tuple(1.0 if i == k else 0.0 for i in range(n)) for k in range(n))
        return StimulatedFixedPoint(u=vertex, classification="winner_take_all",
                                    vertices=vertices)

    if n == 2:
        a12, a21 = spec.churn.a[0][1], spec.churn.a[1][0]
        e1, e2 = spec.eps
        delta = spec.b[0] * a21 - spec.b[1] * a12
        roots = _quadratic_roots(delta, e1 * a21 + e2 * a12 - delta, -e1 * a21)
        admissible = [r for r in roots if 1e-15 < r <= 1.0 + 1e-12]
        if not admissible:
            raise InconsistentSpecError(
                "no admissible balance root in (0, 1] for the two-supplier spec")
        u1 = min(1.0, admissible[0])
        return StimulatedFixedPoint(u=(u1, 1.0 - u1), classification="shared")

    return _stimulated_fixed_point_newton(spec, u0)


def _stimulated_fixed_point_newton(spec: StimulatedChurnSpec,
                                   u0: Sequence[float] | None) -> StimulatedFixedPoint:
    """Damped Newton on the reduced balance system for n > 2 suppliers."""
    n = spec.n
    x = list(u0[:n - 1]) if u0 is not None else [1.0 / n] * (n - 1)

    def residual(xs: Sequence[float]) -> list[float]:
        u = list(xs) + [1.0 - math.fsum(xs)]
        return churn_flows(spec, 0.0, u)[:n - 1]

    for _ in range(120):
        f = residual(x)
        if max(abs(v) for v in f) < 1e-13:
            break
        jac_rows = []
        h = 1e-7
        for j in range(n - 1):
            bumped = list(x)
            bumped[j] += h
            fj = residual(bumped)
            jac_rows.append([(fj[i] - f[i]) / h for i in range(n - 1)])
        jac = SquareMatrix.from_rows([[jac_rows[j][i] for j in range(n - 1)]
                                      for i in range(n - 1)])
        try:
            step = numerics.linear_solve(jac, f)
        except SingularMatrixError as exc:
            raise InconsistentSpecError("balance system Jacobian is singular") from exc
        x = [xi - si for xi, si in zip(x, step)]
    u = x + [1.0 - math.fsum(x)]
    if any(v < -1e-9 for v in u):
        raise InconsistentSpecError("balance root left the simplex")
    return StimulatedFixedPoint(u=tuple(max(0.0, v) for v in u), classification="shared")


# ---------------------------------------------------------------------------
# Full nonlinear dynamics
# ---------------------------------------------------------------------------

def market_field(market: BassCompetition,
                 churn: Optional[ChurnSpec] = None) -> VectorField:
    """du_i/dt = (1 - sum u)(m_i + r_i u_i) + C_i(u)."""
    n = market.n
    m, r = market.m, market.r

    def rhs(t: float, u: Sequence[float]) -> list[float]:
        vacancy = 1.0 - math.fsum(u)
        growth = [vacancy * (m[i] + r[i] * u[i]) for i in range(n)]
        if churn is None:
            return growth
        flows = churn_flows(churn, t, u)
        return [g + c for g, c in zip(growth, flows)]

    return VectorField(n, rhs)


def competitive_path_numeric(market: BassCompetition,
                             churn: Optional[ChurnSpec],
                             grid: Sequence[float],
                             step: float | None = None) -> Trajectory:
    """Direct integration of the full nonlinear market equations.

    Structural invariants are enforced at every output sample: shares
    stay nonnegative, the developed fraction never falls nor exceeds
    one, and the churn flows sum to zero. A breach raises, since it
    signals a mis-specified churn structure rather than a solver issue.
    """
    n = market.n
    if churn is not None and getattr(churn, "n") != n:
        raise ParameterError("churn specification and market disagree on supplier count")
    field_ = market_field(market, churn)
    rows = numerics.sample_ivp(field_, list(market.u0), grid, step=step)

    tol = 1e-9
    prev_sum = -math.inf
    for t, row in zip(grid, rows):
        total = math.fsum(row)
        if any(v < -tol for v in row):
            raise IntegrationInvariantError(f"negative share at t={t:.6g}: {row}")
        if total > 1.0 + 1e-7:
            raise IntegrationInvariantError(f"total share exceeds 1 at t={t:.6g}")
        if total < prev_sum - 1e-7:
            raise IntegrationInvariantError(f"total share decreased at t={t:.6g}")
        prev_sum = total
        flows = churn_flows(churn, t, row)
        scale = max(1.0, math.fsum(abs(c) for c in flows))
        if abs(math.fsum(flows)) > 1e-10 * scale:
            raise IntegrationInvariantError(
                f"churn flows do not cancel at t={t:.6g}")

    channels = {f"u{i + 1}": [row[i] for row in rows] for i in range(n)}
    return from_channels(grid, channels)
