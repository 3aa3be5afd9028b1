"""Feedback kernels: growth curves, calibration, latency, equilibria."""

import math

import pytest
from hypothesis import given, strategies as st

from marketdyn import feedback as fb, numerics
from marketdyn.errors import DomainError, NeverReachedError, ParameterError
from marketdyn.trajectory import time_grid

T50 = 5.0

CALIBRATED = {
    # kind -> (u0, exact rate * T50)
    "none": (0.0, math.log(2.0)),
    "bass": (0.0, math.log(5.0) / 4.0),  # ratio 3: a+gamma = ln(2+3)/T50
    "linear": (0.01, math.log(99.0)),
    "sqrt": (0.0, math.log((math.sqrt(2) + 1) / (math.sqrt(2) - 1))),
    "quadratic": (0.01, math.log(99.0) + 98.0),
    "one_minus_u": (0.0, 1.0),
    "inverse_u": (0.0, math.log(2.0) - 0.5),
    "trend_linear_zero": (0.0, 1.0 - math.log(2.0)),
}


def make_model(kind, u0=None, **kw):
    kern = fb.kernel(kind, **kw)
    base_u0 = CALIBRATED.get(kind, (0.0,))[0] if u0 is None else u0
    return fb.FeedbackModel.calibrated(kern, T50, base_u0)


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", sorted(CALIBRATED))
def test_calibration_closed_values(kind):
    u0, product = CALIBRATED[kind]
    kw = {"ratio": 3.0} if kind == "bass" else {}
    m = fb.FeedbackModel.calibrated(fb.kernel(kind, **kw), T50, u0)
    assert m.rate * T50 == pytest.approx(product, rel=1e-12)
    assert fb.u_of_t(m, T50) == pytest.approx(0.5, abs=1e-10)


def test_sqrt_rate_value():
    m = make_model("sqrt")
    assert m.rate == pytest.approx(1.7627 / T50, abs=1e-4)


def test_inverse_u_rate_value():
    m = make_model("inverse_u")
    assert m.rate * T50 == pytest.approx(0.1931, abs=5e-5)


def test_one_minus_u_rate_is_inverse_t50():
    m = make_model("one_minus_u")
    assert m.rate == pytest.approx(1.0 / T50, rel=1e-12)


def test_trend_rate_value():
    m = make_model("trend_linear_zero")
    assert m.rate * T50 == pytest.approx(0.3069, abs=5e-5)


def test_calibration_rejects_high_start():
    with pytest.raises(ParameterError):
        fb.calibrate_rate(fb.kernel("none"), T50, u0=0.6)


def test_imitator_kernels_need_seed():
    with pytest.raises(NeverReachedError):
        fb.calibrate_rate(fb.kernel("linear"), T50, u0=0.0)
    with pytest.raises(NeverReachedError):
        fb.calibrate_rate(fb.kernel("power", n=2.0), T50, u0=0.0)


# ---------------------------------------------------------------------------
# t(u) and u(t)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kind", sorted(CALIBRATED))
def test_time_at_start_is_zero(kind):
    m = make_model(kind, **({"ratio": 3.0} if kind == "bass" else {}))
    assert fb.t_of_u(m, m.u0) == 0.0
    assert fb.u_of_t(m, 0.0) == m.u0


def test_linear_half_market_time():
    m = make_model("linear")
    assert fb.t_of_u(m, 0.5) == pytest.approx(math.log(99.0) / m.rate, rel=1e-12)


def test_domain_errors():
    m = make_model("linear")
    with pytest.raises(DomainError):
        fb.t_of_u(m, 1.0)
    with pytest.raises(DomainError):
        fb.t_of_u(m, 0.001)  # below u0
    bad = fb.FeedbackModel(fb.kernel("linear"), rate=1.0, u0=0.0)
    with pytest.raises(NeverReachedError):
        fb.t_of_u(bad, 0.5)


@pytest.mark.parametrize("kind,u0", [
    ("none", 0.0), ("bass", 0.0), ("linear", 0.01), ("sqrt", 0.0),
    ("quadratic", 0.01), ("one_minus_u", 0.0), ("inverse_u", 0.0),
    ("trend_linear_zero", 0.0), ("power", 0.05),
])
def test_round_trip(kind, u0):
    kw = {"ratio": 3.0} if kind == "bass" else ({"n": 3.0} if kind == "power" else {})
    m = fb.FeedbackModel.calibrated(fb.kernel(kind, **kw), T50, u0)
    for u in (max(u0 + 1e-6, 1e-4), 0.1, 0.3, 0.5, 0.8, 0.99, 0.999):
        if u <= u0:
            continue
        assert fb.u_of_t(m, fb.t_of_u(m, u)) == pytest.approx(u, abs=1e-9)


def test_seeded_innovator_imitator_mix():
    # ratio and T50 jointly pin (a, gamma) for a seeded start too.
    m = fb.FeedbackModel.calibrated(fb.kernel("bass", ratio=4.0), T50, u0=0.05)
    assert fb.u_of_t(m, T50) == pytest.approx(0.5, abs=1e-10)
    grid = time_grid(0.0, 3 * T50, 61)
    rows = numerics.sample_ivp(fb.ode_field(m), [0.05], grid, step=3 * T50 / 30000)
    worst = max(abs(fb.u_of_t(m, t) - r[0]) for t, r in zip(grid, rows))
    assert worst <= 1e-9


def test_sqrt_growth_from_zero():
    m = make_model("sqrt")
    for t in (0.5, 2.0, 7.0):
        e = math.exp(-m.rate * t)
        assert fb.u_of_t(m, t) == pytest.approx(((1 - e) / (1 + e)) ** 2, rel=1e-12)


def test_quadratic_half_market_round_trip():
    m = make_model("quadratic")
    assert fb.u_of_t(m, T50) == pytest.approx(0.5, abs=1e-6)


def test_power_matches_quadratic_special_case():
    mq = make_model("quadratic")
    mp = fb.FeedbackModel.calibrated(fb.kernel("power", n=2.0), T50, 0.01)
    assert mp.rate == pytest.approx(mq.rate, rel=1e-9)
    for t in (1.0, 5.0, 12.0):
        assert fb.u_of_t(mp, t) == pytest.approx(fb.u_of_t(mq, t), abs=1e-8)


@pytest.mark.parametrize("kind,u0", [
    ("none", 0.0), ("bass", 0.0), ("linear", 0.01), ("sqrt", 0.01),
    ("quadratic", 0.01), ("one_minus_u", 0.0), ("inverse_u", 0.01),
    ("trend_linear_zero", 0.01),
])
def test_growth_curves_match_rk4(kind, u0):
    kw = {"ratio": 3.0} if kind == "bass" else {}
    m = fb.FeedbackModel.calibrated(fb.kernel(kind, **kw), T50, u0)
    grid = time_grid(0.0, 5 * T50, 101)
    rows = numerics.sample_ivp(fb.ode_field(m), [u0], grid, step=5 * T50 / 40000)
    worst = max(abs(fb.u_of_t(m, t) - r[0]) for t, r in zip(grid, rows))
    assert worst <= 1e-6


@pytest.mark.parametrize("kind", ["sqrt", "inverse_u", "trend_linear_zero"])
def test_singular_start_curves_match_rk4_from_anchor(kind):
    # These kernels are not Lipschitz at u = 0, so the oracle is anchored
    # on the curve at a small positive share and integrated forward.
    m = make_model(kind)
    anchor = 0.01
    t1 = fb.t_of_u(m, anchor)
    grid = [t1] + [t for t in time_grid(0.0, 5 * T50, 101) if t > t1]
    rows = numerics.sample_ivp(fb.ode_field(m), [anchor], grid, step=5 * T50 / 40000)
    worst = max(abs(fb.u_of_t(m, t) - r[0]) for t, r in zip(grid[1:], rows[1:]))
    assert worst <= 1e-6


@given(st.sampled_from(sorted(CALIBRATED)), st.floats(0.02, 0.998))
def test_u_of_t_strictly_increasing(kind, u):
    kw = {"ratio": 3.0} if kind == "bass" else {}
    u0, _ = CALIBRATED[kind]
    m = fb.FeedbackModel.calibrated(fb.kernel(kind, **kw), T50, u0)
    if u <= u0:
        return
    t = fb.t_of_u(m, u)
    assert fb.u_of_t(m, t + 0.05) > fb.u_of_t(m, t)


# ---------------------------------------------------------------------------
# latency metrics
# ---------------------------------------------------------------------------

def test_latency_table_initial_share_dependence():
    expected = {0.001: 0.6819, 0.005: 0.5849, 0.01: 0.5218,
                0.02: 0.4354, 0.04: 0.3086}
    for u0, ratio in expected.items():
        m = fb.FeedbackModel.calibrated(fb.kernel("linear"), T50, u0)
        got = fb.latency_metrics(m)
        assert got.t10 / got.t50 == pytest.approx(ratio, abs=1e-4)


def test_inverse_u_latency_ratio():
    m = make_model("inverse_u")
    got = fb.latency_metrics(m)
    assert got.t10 / got.t50 == pytest.approx(0.02775, abs=1e-4)


def test_one_minus_u_latency_is_ninth():
    m = make_model("one_minus_u")
    got = fb.latency_metrics(m)
    assert got.t10 == pytest.approx(got.t50 / 9.0, rel=1e-12)


def test_latency_flag_when_already_reached():
    m = fb.FeedbackModel.calibrated(fb.kernel("linear"), T50, 0.2)
    got = fb.latency_metrics(m)
    assert got.t10 == 0.0 and got.t10_already_reached


def test_latency_ordering_across_kernels():
    order = [("trend_linear_zero", 0.0), ("inverse_u", 0.0), ("one_minus_u", 0.0),
             ("none", 0.0), ("sqrt", 0.0), ("linear", 0.01), ("quadratic", 0.01)]
    t10s = [fb.latency_metrics(fb.FeedbackModel.calibrated(fb.kernel(k), T50, u0)).t10
            for k, u0 in order]
    assert all(a < b for a, b in zip(t10s, t10s[1:]))


# ---------------------------------------------------------------------------
# inflection
# ---------------------------------------------------------------------------

def test_inflection_shares():
    assert fb.inflection(make_model("linear")).u == pytest.approx(0.5)
    assert fb.inflection(make_model("sqrt")).u == pytest.approx(1.0 / 3.0)
    assert fb.inflection(make_model("quadratic")).u == pytest.approx(2.0 / 3.0)
    m10 = fb.FeedbackModel.calibrated(fb.kernel("power", n=10.0), T50, 0.01)
    assert fb.inflection(m10).u == pytest.approx(10.0 / 11.0)


def test_sqrt_inflection_gradient():
    infl = fb.inflection(make_model("sqrt"))
    assert infl.gradient == pytest.approx(0.68 / T50, abs=1e-3)


def test_bass_inflection_threshold():
    assert fb.inflection(make_model("bass", ratio=1.0)) is None
    assert fb.inflection(make_model("bass", ratio=0.5)) is None
    infl = fb.inflection(make_model("bass", ratio=4.0))
    assert infl.u == pytest.approx(3.0 / 8.0)


def test_decaying_kernels_have_no_inflection():
    for kind in ("none", "one_minus_u", "inverse_u", "trend_linear_zero"):
        assert fb.inflection(make_model(kind)) is None


@pytest.mark.parametrize("n", [0.5, 1.0, 2.0, 10.0])
def test_power_inflection_located_numerically(n):
    # Independent check: maximize the growth rate u^n (1-u) directly by
    # golden-section search; the peak share must sit at n/(n+1).
    lo, hi = 0.0, 1.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def g(u):
        return u ** n * (1.0 - u)

    x1, x2 = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    f1, f2 = g(x1), g(x2)
    for _ in range(200):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = g(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = g(x1)
    located = 0.5 * (lo + hi)
    assert located == pytest.approx(n / (n + 1.0), abs=1e-6)


def test_inflection_time_matches_demand_argmax():
    for kind, u0 in (("linear", 0.01), ("sqrt", 0.0), ("quadratic", 0.01)):
        m = fb.FeedbackModel.calibrated(fb.kernel(kind), T50, u0)
        infl = fb.inflection(m)
        grid = time_grid(0.0, 3 * T50, 3001)
        u = [fb.u_of_t(m, t) for t in grid]
        diffs = [(u[i + 1] - u[i]) for i in range(len(u) - 1)]
        k = max(range(len(diffs)), key=lambda i: diffs[i])
        t_mid = 0.5 * (grid[k] + grid[k + 1])
        assert abs(t_mid - infl.t) <= grid[1] - grid[0]


# ---------------------------------------------------------------------------
# demand
# ---------------------------------------------------------------------------

def test_linear_initial_demand():
    # D(0) = N rate u0 (1 - u0) exactly (the derivative of the growth
    # curve); the shorthand N rate u0 is its small-u0 approximation.
    m = fb.FeedbackModel(fb.kernel("linear"), rate=0.9, u0=0.01, N=1000.0)
    d = fb.demand_curve(m, [0.0]).channel("D")[0]
    assert d == pytest.approx(1000.0 * 0.9 * 0.01 * (1 - 0.01), rel=1e-12)
    assert d == pytest.approx(1000.0 * 0.9 * 0.01, rel=0.011)


def test_no_feedback_demand_curve():
    m = fb.FeedbackModel(fb.kernel("none"), rate=0.25, u0=0.1, N=10.0)
    grid = time_grid(0.0, 10.0, 21)
    d = fb.demand_curve(m, grid).channel("D")
    for t, v in zip(grid, d):
        assert v == pytest.approx(0.25 * 10.0 * 0.9 * math.exp(-0.25 * t), rel=1e-12)


def test_quadratic_demand_matches_finite_difference():
    m = fb.FeedbackModel.calibrated(fb.kernel("quadratic"), T50, 0.01, N=1.0)
    d = fb.demand_curve(m, [2.0, 5.0, 7.0]).channel("D")
    h = 1e-5
    for t, v in zip((2.0, 5.0, 7.0), d):
        fd = (fb.u_of_t(m, t + h) - fb.u_of_t(m, t - h)) / (2 * h)
        assert v == pytest.approx(fd, abs=1e-5 * m.N * m.rate)


def test_closed_demand_matches_growth_everywhere():
    for kind, u0 in (("bass", 0.0), ("linear", 0.01), ("sqrt", 0.0), ("one_minus_u", 0.0)):
        kw = {"ratio": 2.0} if kind == "bass" else {}
        m = fb.FeedbackModel.calibrated(fb.kernel(kind, **kw), T50, u0, N=3.0)
        grid = time_grid(0.0, 2 * T50, 11)
        d = fb.demand_curve(m, grid).channel("D")
        for t, v in zip(grid, d):
            u = fb.u_of_t(m, t)
            assert v == pytest.approx(m.N * m.rate * m.kernel.growth(u), rel=1e-9, abs=1e-12)


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------

def classes(kind, **kw):
    return {(p.u, p.kind) for p in fb.classify_equilibria(fb.kernel(kind, **kw))}


def test_equilibria_catalog():
    assert classes("linear") == {(0.0, "repeller"), (1.0, "attractor")}
    assert classes("quadratic") == {(0.0, "repeller"), (1.0, "attractor")}
    assert classes("none") == {(1.0, "attractor")}
    assert classes("bass", ratio=2.0) == {(1.0, "attractor")}
    assert classes("sqrt") == {(0.0, "not_equilibrium"), (1.0, "attractor")}
    assert classes("power", n=0.5) == {(0.0, "not_equilibrium"), (1.0, "attractor")}
    assert classes("power", n=2.0) == {(0.0, "repeller"), (1.0, "attractor")}
    assert classes("one_minus_u") == {(1.0, "attractor")}
    assert classes("inverse_u") == {(1.0, "attractor")}
    assert classes("inverse_u_cutoff", u1=0.4) == {(0.4, "attractor")}


# ---------------------------------------------------------------------------
# cutoff kernel
# ---------------------------------------------------------------------------

def test_cutoff_time_value():
    m = fb.FeedbackModel(fb.kernel("inverse_u_cutoff", u1=0.5), rate=1.0)
    assert fb.cutoff_time(m) == pytest.approx(0.1931, abs=5e-5)


def test_cutoff_path_freezes():
    m = fb.FeedbackModel(fb.kernel("inverse_u_cutoff", u1=0.5), rate=0.7)
    t1 = fb.cutoff_time(m)
    grid = time_grid(0.0, 6.0 * t1, 61)
    traj = fb.cutoff_path(m, grid)
    plain = fb.FeedbackModel(fb.kernel("inverse_u"), rate=0.7)
    for t, u in zip(grid, traj.channel("u")):
        if t < t1:
            assert u == pytest.approx(fb.u_of_t(plain, t), abs=1e-10)
        else:
            assert u == 0.5
    assert traj.channel("u")[-1] == 0.5


def test_cutoff_demand_zero_after_freeze():
    m = fb.FeedbackModel(fb.kernel("inverse_u_cutoff", u1=0.3), rate=1.0)
    t1 = fb.cutoff_time(m)
    traj = fb.cutoff_path(m, [0.5 * t1, 2.0 * t1, 4.0 * t1])
    assert traj.channel("D")[1] == 0.0
    assert traj.channel("D")[2] == 0.0
