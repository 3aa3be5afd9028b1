"""Game lifecycles: all six cases, their relations, and complementary games."""

import math

import pytest

from marketdyn import games, numerics
from marketdyn.errors import DomainError, InitiationError, ParameterError
from marketdyn.monopoly import ExpDecayRate, LinearRate
from marketdyn.trajectory import time_grid

N = 1000.0


def rk4_oracle(case, grid, step=None):
    field = games.ode_field(case)
    init = case.initial
    span = grid[-1] - grid[0]
    return numerics.sample_ivp(field, [init.B, init.P, init.Q], grid,
                               step=step or span / 20000)


def max_channel_gap(traj, rows, channel, index):
    return max(abs(a - r[index]) for a, r in zip(traj.channel(channel), rows))


ALL_CASES = [
    games.Case1(a=0.7, b=0.5, c=0.1, N=N),
    games.Case1(a=0.7, b=0.8, c=0.1, N=N),            # confluent b = a + c
    games.Case1(a=LinearRate(0.5, 0.2), b=1.0, c=0.0, N=N),
    games.Case1(a=0.4, b=LinearRate(0.2, 0.15), c=0.0, N=N),
    games.Case2(beta=0.002, b=0.5, N=N, P0=10.0),
    games.Case3(a=0.1, beta=0.001, b=0.8, N=N),
    games.Case4(beta=0.002, gamma=0.003, N=N, P0=10.0, Q0=10.0),
    games.Case5(a=0.2, gamma=0.004, N=N, Q0=10.0),
    games.Case6(a=0.3, b=0.2, gamma=0.001, N=N),
]


# ---------------------------------------------------------------------------
# shared structure
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("case", ALL_CASES, ids=lambda c: type(c).__name__ + str(ALL_CASES.index(c) if c in ALL_CASES else ""))
def test_conservation_everywhere(case):
    grid = time_grid(0.0, 30.0, 151)
    traj = games.bpq_path(case, grid)
    worst = max(abs(b + p + q - N) for b, p, q in
                zip(traj.channel("B"), traj.channel("P"), traj.channel("Q")))
    assert worst <= 1e-9 * N


@pytest.mark.parametrize("case", ALL_CASES, ids=lambda c: type(c).__name__)
def test_buyers_fall_quitters_rise(case):
    grid = time_grid(0.0, 30.0, 151)
    traj = games.bpq_path(case, grid)
    b = traj.channel("B")
    q = traj.channel("Q")
    assert all(x2 <= x1 + 1e-9 * N for x1, x2 in zip(b, b[1:]))
    assert all(x2 >= x1 - 1e-9 * N for x1, x2 in zip(q, q[1:]))


@pytest.mark.parametrize("case", ALL_CASES, ids=lambda c: type(c).__name__)
def test_peak_balance_condition(case):
    # At the player peak the inflow a(t,P)B equals the outflow b(t,Q)P.
    grid = time_grid(0.0, 30.0, 3001)
    traj = games.bpq_path(case, grid)
    p = traj.channel("P")
    k = max(range(len(p)), key=lambda i: p[i])
    if k in (0, len(p) - 1):
        pytest.skip("no interior peak on this horizon")
    state = traj.states[k]
    b_idx = traj.labels.index("B")
    p_idx = traj.labels.index("P")
    q_idx = traj.labels.index("Q")
    s = (state[b_idx], state[p_idx], state[q_idx])
    a_int, b_int, _ = games.intensities(case)
    t = traj.times[k]
    residual = abs(a_int(t, s) * s[0] - b_int(t, s) * s[1])
    # The grid argmax sits within one step of the true peak, where the
    # residual crosses zero; bound it by the local slope times the step.
    h = grid[1] - grid[0]
    slope = 2.0 * max(abs(a_int(t, s) * s[0]), abs(b_int(t, s) * s[1]), 1.0)
    assert residual <= slope * h * 10


def test_clean_start_state():
    traj = games.bpq_path(games.Case1(a=0.7, b=0.5, c=0.1, N=N), [0.0, 1.0])
    assert traj.states[0][:3] == (N, 0.0, 0.0)


def test_initiation_errors():
    with pytest.raises(InitiationError):
        games.Case2(beta=0.002, b=0.5, N=N, P0=0.0)
    with pytest.raises(InitiationError):
        games.Case4(beta=0.002, gamma=0.003, N=N, P0=10.0, Q0=0.0)
    with pytest.raises(InitiationError):
        games.Case4(beta=0.002, gamma=0.003, N=N, P0=0.0, Q0=10.0)
    with pytest.raises(InitiationError):
        games.Case5(a=0.2, gamma=0.004, N=N, Q0=0.0)


# ---------------------------------------------------------------------------
# case 1
# ---------------------------------------------------------------------------

def test_case1_constants_against_rk4():
    case = games.Case1(a=0.7, b=0.5, c=0.1, N=N)
    grid = time_grid(0.0, 20.0, 101)
    traj = games.bpq_path(case, grid)
    rows = rk4_oracle(case, grid)
    assert max_channel_gap(traj, rows, "P", 1) <= 1e-6 * N


def test_case1_total_sales():
    a, b, c = 0.7, 0.5, 0.1
    case = games.Case1(a=a, b=b, c=c, N=N)
    traj = games.bpq_path(case, time_grid(0.0, 120.0, 61))
    assert traj.channel("C")[-1] == pytest.approx(a * N / (a + c), abs=1e-6 * N)
    peak = games.case1_peak(a, b, c, N)
    assert peak.C_inf == pytest.approx(a * N / (a + c), rel=1e-12)


def test_case1_peak_formula_and_grid():
    a, b, c = 1.0, 0.5, 0.0
    peak = games.case1_peak(a, b, c, N)
    assert peak.T_m == pytest.approx(math.log(2.0) / 0.5, rel=1e-12)
    grid = time_grid(0.0, 10.0, 20001)
    traj = games.bpq_path(games.Case1(a=a, b=b, c=c, N=N), grid)
    p = traj.channel("P")
    k = max(range(len(p)), key=lambda i: p[i])
    assert abs(grid[k] - peak.T_m) <= grid[1] - grid[0]
    assert p[k] == pytest.approx(peak.P_m, abs=1e-6 * N)


def test_case1_confluent_peak():
    a, c = 0.7, 0.1
    b = a + c
    peak = games.case1_peak(a, b, c, N)
    assert peak.T_m == pytest.approx(1.0 / b, rel=1e-12)
    assert peak.P_m == pytest.approx(N * (a / b) * math.exp(-1.0), rel=1e-12)
    # Continuity: approaching the confluence reproduces the limit.
    near = games.case1_peak(a, b * (1.0 + 1e-7), c, N)
    assert near.T_m == pytest.approx(peak.T_m, rel=1e-6)


def test_case1_calibration():
    assert games.calibrate_case1(1.0, 2.0) == pytest.approx(math.log(4.0), rel=1e-12)
    assert games.calibrate_case1(1.0, 2.0) == pytest.approx(1.386, abs=1e-3)
    # Round trip: the calibrated rates reproduce the requested peak time.
    s = games.calibrate_case1(2.5, 3.0)
    peak = games.case1_peak(s, s / 3.0, 0.0, N)
    assert peak.T_m == pytest.approx(2.5, rel=1e-10)


def test_case1_small_time_expansion():
    a, b, c = 0.7, 0.5, 0.1
    traj = games.bpq_path(games.Case1(a=a, b=b, c=c, N=N),
                          [0.0, 1e-4, 2e-4, 5e-4, 1e-3])
    for t, p in zip(traj.times[1:], traj.channel("P")[1:]):
        expansion = a * N * t * (1.0 - (a + b + c) * t / 2.0)
        assert p == pytest.approx(expansion, rel=1e-4)


def test_case1_linear_inflow_against_rk4():
    case = games.Case1(a=LinearRate(0.5, 0.2), b=1.0, c=0.0, N=N)
    grid = time_grid(0.0, 10.0, 101)
    traj = games.bpq_path(case, grid)
    rows = rk4_oracle(case, grid)
    assert max_channel_gap(traj, rows, "P", 1) <= 1e-6 * N


def test_case1_linear_quit_rate_against_rk4():
    case = games.Case1(a=0.4, b=LinearRate(0.2, 0.15), c=0.0, N=N)
    grid = time_grid(0.0, 12.0, 121)
    traj = games.bpq_path(case, grid)
    rows = rk4_oracle(case, grid)
    assert max_channel_gap(traj, rows, "P", 1) <= 1e-5 * N


def test_case1_linear_branches_with_never_buy_rate():
    # A nonzero never-buy drain exercises the quadrature-based sales
    # channel of both linear branches; the 4-state integration carries
    # the exact cumulative sales for comparison.
    for case in (games.Case1(a=LinearRate(0.5, 0.2), b=1.0, c=0.2, N=N),
                 games.Case1(a=0.4, b=LinearRate(0.2, 0.15), c=0.2, N=N)):
        grid = time_grid(0.0, 10.0, 51)
        traj = games.bpq_path(case, grid)
        a_int, b_int, c_int = games.intensities(case)

        def rhs(t, s):
            a = a_int(t, s)
            demand = a * s[0]
            return [-(a + c_int(t)) * s[0], demand - b_int(t, s) * s[1],
                    b_int(t, s) * s[1] + c_int(t) * s[0], demand]

        rows = numerics.sample_ivp(numerics.VectorField(4, rhs),
                                   [N, 0.0, 0.0, 0.0], grid, step=10.0 / 20000)
        assert max(abs(x - r[1]) for x, r in zip(traj.channel("P"), rows)) <= 1e-5 * N
        assert max(abs(x - r[3]) for x, r in zip(traj.channel("C"), rows)) <= 1e-5 * N


def test_case1_general_schedules_against_rk4():
    case = games.Case1(a=ExpDecayRate(0.5, 0.1), b=LinearRate(0.3, 0.05),
                       c=0.1, N=N)
    grid = time_grid(0.0, 10.0, 101)
    traj = games.bpq_path(case, grid)
    rows = rk4_oracle(case, grid)
    assert max_channel_gap(traj, rows, "P", 1) <= 1e-5 * N


def test_case1_closed_form_fallback_flag():
    case = games.Case1(a=ExpDecayRate(0.5, 0.1), b=0.4, c=0.0, N=N)
    traj = games.case1_closed_form(case, time_grid(0.0, 5.0, 11))
    assert traj.notes and "numerically" in traj.notes[0]
    routed = games.case1_closed_form(
        games.Case1(a=0.7, b=0.5, c=0.1, N=N), time_grid(0.0, 5.0, 11))
    assert not routed.notes


# ---------------------------------------------------------------------------
# case 2
# ---------------------------------------------------------------------------

CASE2 = games.Case2(beta=0.002, b=0.5, N=N, P0=10.0)


def test_case2_path_matches_rk4():
    grid = time_grid(0.0, 30.0, 151)
    traj = games.bpq_path(CASE2, grid)
    rows = rk4_oracle(CASE2, grid)
    for ch, idx in (("B", 0), ("P", 1), ("Q", 2)):
        assert max_channel_gap(traj, rows, ch, idx) <= 1e-5 * N


def test_case2_state_relations():
    rel = games.sir_relations(CASE2)
    assert rel.B_of_Q(0.0) == CASE2.B0
    assert rel.B_Tm == pytest.approx(CASE2.b / CASE2.beta, rel=1e-12)
    assert rel.P_Tm == pytest.approx(
        N - 250.0 - 250.0 * math.log(CASE2.beta * CASE2.B0 / CASE2.b), rel=1e-12)
    # B(Q) exponent: forward difference of ln B against -beta/b.
    q1, q2 = 100.0, 101.0
    slope = (math.log(rel.B_of_Q(q2)) - math.log(rel.B_of_Q(q1))) / (q2 - q1)
    assert slope == pytest.approx(-CASE2.beta / CASE2.b, rel=1e-9)
    # P(B) composes back through the conservation law.
    for q in (0.0, 50.0, 300.0):
        b = rel.B_of_Q(q)
        assert rel.P_of_B(b) == pytest.approx(N - b - q, rel=1e-12)


def test_case2_final_size_matches_long_run():
    rel = games.sir_relations(CASE2)
    grid = time_grid(0.0, 50.0 / CASE2.b, 51)
    rows = rk4_oracle(CASE2, grid, step=(50.0 / CASE2.b) / 40000)
    assert rows[-1][0] == pytest.approx(rel.B_inf, abs=1e-4 * N)
    # Self-consistency of the transcendental equation.
    assert rel.B_inf == pytest.approx(
        CASE2.B0 * math.exp(-(CASE2.beta / CASE2.b) * (N - rel.B_inf)), abs=1e-9 * N)


def test_case2_time_integral():
    assert games.sir_time_of(CASE2, 0.0) == 0.0
    ts = [games.sir_time_of(CASE2, q) for q in (50.0, 150.0, 400.0, 700.0)]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    with pytest.raises(DomainError):
        games.sir_time_of(CASE2, N)


def test_case2_peak_time_matches_argmax():
    grid = time_grid(0.0, 30.0, 10001)
    traj = games.bpq_path(CASE2, grid)
    p = traj.channel("P")
    k = max(range(len(p)), key=lambda i: p[i])
    assert abs(games.sir_peak_time(CASE2) - grid[k]) <= grid[1] - grid[0]


def test_case2_seed_sensitivity():
    # Early exponential growth P ~ P0 exp((beta N - b) t): doubling a
    # seed that is much smaller than N doubles the early curve.
    growth = CASE2.beta * N - CASE2.b
    t_probe = 1.0 / growth
    small = games.bpq_path(
        games.Case2(beta=CASE2.beta, b=CASE2.b, N=N, P0=1.0),
        [0.0, t_probe]).channel("P")[-1]
    doubled = games.bpq_path(
        games.Case2(beta=CASE2.beta, b=CASE2.b, N=N, P0=2.0),
        [0.0, t_probe]).channel("P")[-1]
    assert doubled / small == pytest.approx(2.0, rel=0.01)
    assert small == pytest.approx(math.exp(1.0), rel=0.05)


def test_case2_no_interior_peak_flagged():
    weak = games.Case2(beta=0.0004, b=0.5, N=N, P0=10.0)  # beta B0 < b
    rel = games.sir_relations(weak)
    assert not rel.has_interior_peak
    assert rel.B_Tm == weak.B0
    traj = games.bpq_path(weak, time_grid(0.0, 20.0, 201))
    p = traj.channel("P")
    assert all(x2 <= x1 + 1e-9 * N for x1, x2 in zip(p, p[1:]))


# ---------------------------------------------------------------------------
# case 3
# ---------------------------------------------------------------------------

CASE3 = games.Case3(a=0.1, beta=0.001, b=0.8, N=N)


def test_case3_reduces_to_case1_without_feedback():
    no_feedback = games.Case3(a=0.25, beta=0.0, b=0.6, N=N)
    grid = time_grid(0.0, 15.0, 76)
    traj = games.bpq_path(no_feedback, grid)
    closed = games.bpq_path(games.Case1(a=0.25, b=0.6, c=0.0, N=N), grid)
    for ch in ("B", "P", "Q"):
        worst = max(abs(a - b) for a, b in zip(traj.channel(ch), closed.channel(ch)))
        assert worst <= 1e-9 * N


def test_case3_small_time_growth():
    grid = [0.0, 1e-5, 1e-4, 5e-4]
    traj = games.bpq_path(CASE3, grid)
    for t, p in zip(grid[1:], traj.channel("P")[1:]):
        lead = CASE3.a * N * t
        assert p / lead == pytest.approx(1.0 + (N * CASE3.beta - CASE3.b) * t / 2.0,
                                         abs=1e-3)


def test_case3_peak_relation():
    grid = time_grid(0.0, 40.0, 2001)
    t_m, (b_m, p_m, _) = games.refined_peak(CASE3, grid)
    # Relation P = a B / (b - beta B) at the balance-refined peak.
    relation = CASE3.a * b_m / (CASE3.b - CASE3.beta * b_m)
    assert p_m == pytest.approx(relation, rel=1e-6)
    # The refined time sits within one grid step of the grid argmax.
    traj = games.bpq_path(CASE3, grid)
    p = traj.channel("P")
    k = max(range(len(p)), key=lambda i: p[i])
    assert abs(t_m - grid[k]) <= grid[1] - grid[0]


# ---------------------------------------------------------------------------
# case 4
# ---------------------------------------------------------------------------

CASE4 = games.Case4(beta=0.002, gamma=0.003, N=N, P0=10.0, Q0=10.0)


def test_case4_path_matches_rk4():
    grid = time_grid(0.0, 30.0, 151)
    traj = games.bpq_path(CASE4, grid)
    rows = rk4_oracle(CASE4, grid)
    for ch, idx in (("B", 0), ("P", 1), ("Q", 2)):
        assert max_channel_gap(traj, rows, ch, idx) <= 1e-5 * N


def test_case4_first_integral_exponent():
    # beta = gamma collapses B(Q) to B0 Q0 / Q.
    case = games.Case4(beta=0.002, gamma=0.002, N=N, P0=10.0, Q0=10.0)
    traj = games.bpq_path(case, time_grid(0.0, 20.0, 101))
    for b, q in zip(traj.channel("B"), traj.channel("Q")):
        assert b == pytest.approx(case.B0 * case.Q0 / q, rel=1e-7)


def test_case4_initial_quit_velocity():
    rows = rk4_oracle(CASE4, [0.0, 1e-6])
    qdot = (rows[1][2] - rows[0][2]) / 1e-6
    assert qdot == pytest.approx(CASE4.gamma * CASE4.P0 * CASE4.Q0, rel=1e-4)


def test_case4_peak_value():
    grid = time_grid(0.0, 30.0, 10001)
    traj = games.bpq_path(CASE4, grid)
    peak = games.case4_peak(CASE4)
    assert max(traj.channel("P")) == pytest.approx(peak.P_m, abs=1e-4 * N)
    p = traj.channel("P")
    k = max(range(len(p)), key=lambda i: p[i])
    assert abs(grid[k] - peak.T_m) <= grid[1] - grid[0]


# ---------------------------------------------------------------------------
# case 5
# ---------------------------------------------------------------------------

CASE5 = games.Case5(a=0.2, gamma=0.004, N=N, Q0=10.0)


def test_case5_path_matches_rk4():
    grid = time_grid(0.0, 30.0, 151)
    traj = games.bpq_path(CASE5, grid)
    rows = rk4_oracle(CASE5, grid)
    for ch, idx in (("B", 0), ("P", 1), ("Q", 2)):
        assert max_channel_gap(traj, rows, ch, idx) <= 1e-5 * N


def test_case5_transform_initial_condition():
    # Q(t) = 1/w(t), so w(0) = 1/Q0 shows up as Q(0) = Q0 exactly.
    traj = games.bpq_path(CASE5, [0.0, 0.5])
    assert traj.channel("Q")[0] == pytest.approx(CASE5.Q0, rel=1e-12)


def test_case5_peak_identity():
    grid = time_grid(0.0, 30.0, 2001)
    t_m, (_, p_m, _) = games.refined_peak(CASE5, grid)
    assert games.case5_peak_value(CASE5, t_m) == pytest.approx(p_m, abs=1e-6 * N)
    traj = games.bpq_path(CASE5, grid)
    p = traj.channel("P")
    k = max(range(len(p)), key=lambda i: p[i])
    assert abs(t_m - grid[k]) <= grid[1] - grid[0]
    assert games.case5_peak_value(CASE5, t_m) == pytest.approx(p[k], abs=1e-4 * N)


def test_case5_accepts_seed_players():
    seeded = games.Case5(a=0.2, gamma=0.004, N=N, Q0=10.0, P0=25.0)
    grid = time_grid(0.0, 20.0, 101)
    traj = games.bpq_path(seeded, grid)
    assert traj.channel("P")[0] == pytest.approx(25.0, abs=1e-9 * N)
    rows = rk4_oracle(seeded, grid)
    assert max_channel_gap(traj, rows, "P", 1) <= 1e-5 * N


# ---------------------------------------------------------------------------
# case 6
# ---------------------------------------------------------------------------

CASE6 = games.Case6(a=0.3, b=0.2, gamma=0.001, N=N)


def test_case6_matches_full_system():
    grid = time_grid(0.0, 30.0, 151)
    traj = games.bpq_path(CASE6, grid)
    rows = rk4_oracle(CASE6, grid)
    for ch, idx in (("B", 0), ("P", 1), ("Q", 2)):
        assert max_channel_gap(traj, rows, ch, idx) <= 1e-8 * N


def test_case6_initial_growth():
    traj = games.bpq_path(CASE6, [0.0, 1e-6])
    assert traj.channel("P")[0] == 0.0
    pdot = traj.channel("P")[-1] / 1e-6
    assert pdot == pytest.approx(CASE6.a * N, rel=1e-4)


def test_case6_without_stimulation_reduces_to_case1():
    # gamma -> 0 limit compared at a tiny gamma.
    tiny = games.Case6(a=0.3, b=0.2, gamma=1e-12, N=N)
    grid = time_grid(0.0, 15.0, 76)
    traj = games.bpq_path(tiny, grid)
    closed = games.bpq_path(games.Case1(a=0.3, b=0.2, c=0.0, N=N), grid)
    for ch in ("B", "P", "Q"):
        worst = max(abs(a - b) for a, b in zip(traj.channel(ch), closed.channel(ch)))
        assert worst <= 1e-6 * N


# ---------------------------------------------------------------------------
# complementary games
# ---------------------------------------------------------------------------

SPEC = games.ComplementarySpec(g=0.0005, b=0.5, a_c=0.4, b_c=0.9, tau=1.0, N=N)


def test_complementary_against_full_system():
    grid = time_grid(0.0, 20.0, 101)
    traj = games.complementary_path(SPEC, grid)
    nc = SPEC.companion_population
    bc0 = nc * math.exp(-SPEC.a_c * SPEC.tau)
    pc0 = games.companion_players(SPEC, 0.0)
    init = [N, 0.0, 0.0, bc0, pc0, nc - bc0 - pc0]
    rows = numerics.sample_ivp(games.complementary_field(SPEC), init, grid,
                               step=20.0 / 40000)
    for ch, idx in (("B", 0), ("P", 1), ("Q", 2), ("B_c", 3), ("P_c", 4), ("Q_c", 5)):
        worst = max(abs(a - r[idx]) for a, r in zip(traj.channel(ch), rows))
        assert worst <= 1e-5 * N


def test_simultaneous_launch():
    spec = games.ComplementarySpec(g=0.0005, b=0.5, a_c=0.4, b_c=0.9, tau=0.0, N=N)
    traj = games.complementary_path(spec, [0.0, 1.0])
    assert traj.channel("P")[0] == 0.0
    assert traj.channel("P_c")[0] == 0.0
    assert traj.channel("B")[0] == N


def test_weak_coupling_decouples():
    spec = games.ComplementarySpec(g=1e-15, b=0.5, a_c=0.4, b_c=0.9, tau=1.0, N=N)
    traj = games.complementary_path(spec, time_grid(0.0, 20.0, 21))
    assert all(b == pytest.approx(N, rel=1e-10) for b in traj.channel("B"))


def test_late_companion_launch_idles_game_one():
    spec = games.ComplementarySpec(g=0.0005, b=0.5, a_c=0.4, b_c=0.9, tau=-2.0, N=N)
    grid = time_grid(0.0, 20.0, 201)
    traj = games.complementary_path(spec, grid)
    for t, b, pc in zip(grid, traj.channel("B"), traj.channel("P_c")):
        if t <= 2.0:
            assert b == N
            assert pc == 0.0
    assert traj.channel("B")[-1] < N
    # Oracle from the companion launch onward.
    sub = [t for t in grid if t >= 2.0]
    init = [N, 0.0, 0.0, spec.companion_population, 0.0, 0.0]
    rows = numerics.sample_ivp(games.complementary_field(spec), init, sub,
                               step=18.0 / 40000)
    got_p = [p for t, p in zip(grid, traj.channel("P")) if t >= 2.0]
    worst = max(abs(a - r[1]) for a, r in zip(got_p, rows))
    assert worst <= 1e-5 * N


def test_companion_confluent_rates():
    spec = games.ComplementarySpec(g=0.0005, b=0.5, a_c=0.6, b_c=0.6, tau=0.5, N=N)
    grid = time_grid(0.0, 15.0, 76)
    traj = games.complementary_path(spec, grid)
    nc = spec.companion_population
    s0 = 0.5
    bc0 = nc * math.exp(-0.6 * s0)
    pc0 = games.companion_players(spec, 0.0)
    rows = numerics.sample_ivp(games.complementary_field(spec),
                               [N, 0.0, 0.0, bc0, pc0, nc - bc0 - pc0], grid,
                               step=15.0 / 40000)
    worst = max(abs(a - r[1]) for a, r in zip(traj.channel("P"), rows))
    assert worst <= 1e-5 * N


def test_constant_proxy_reduces_to_mixed_inflow_case():
    proxied = games.complementary_constant_approx(SPEC, p_c0=200.0,
                                                  feedback_beta=0.0005)
    assert isinstance(proxied, games.Case3)
    assert proxied.a == pytest.approx(SPEC.g * 200.0, rel=1e-12)
    assert proxied.b == SPEC.b
    direct = games.Case3(a=SPEC.g * 200.0, beta=0.0005, b=SPEC.b, N=N)
    grid = time_grid(0.0, 10.0, 51)
    left = games.bpq_path(proxied, grid)
    right = games.bpq_path(direct, grid)
    assert left.channel("P") == right.channel("P")
    with pytest.raises(ParameterError):
        games.complementary_constant_approx(SPEC, p_c0=0.0)


def test_constant_proxy_at_companion_peak_overestimates_early_adoption():
    # Characterization: freezing the companion at its peak player count
    # can only speed up early adoption of game 1.
    grid = time_grid(0.0, 6.0, 61)
    true_path = games.complementary_path(SPEC, grid)
    pc_peak = max(true_path.channel("P_c"))
    approx = games.complementary_constant_approx(SPEC, p_c0=pc_peak)
    approx_path = games.bpq_path(approx, grid)
    true_c = true_path.channel("C")
    approx_c = approx_path.channel("C")
    assert all(a >= t - 1e-9 * N for a, t in zip(approx_c, true_c))


# ---------------------------------------------------------------------------
# peak metrics dispatcher
# ---------------------------------------------------------------------------

def test_peak_metrics_catalog():
    grid = time_grid(0.0, 30.0, 2001)
    m1 = games.peak_metrics(games.Case1(a=1.0, b=0.5, c=0.0, N=N), grid)
    assert m1.T_m == pytest.approx(math.log(2.0) / 0.5, rel=1e-12)
    m2 = games.peak_metrics(CASE2, grid)
    assert m2.T_m == pytest.approx(games.sir_peak_time(CASE2), abs=0.03)
    assert m2.C_inf == pytest.approx(CASE2.B0 - games.sir_relations(CASE2).B_inf,
                                     rel=1e-9)
    m5 = games.peak_metrics(CASE5, grid)
    assert m5.C_inf == CASE5.B0
    m6 = games.peak_metrics(CASE6, grid)
    assert m6.C_inf == N
