import numpy as np
import pytest

from affectdyn import (ContinuousRunConfig, DiscreteRunConfig, Verdict,
                       binary_scenario, classify, classify_series,
                       compare_runs, lyapunov_estimate, oscillation_count,
                       oscillation_onset, run_continuous, run_discrete,
                       solve_fixed_point)

FIG1 = binary_scenario(0.4, 0.1, 0.59, 0.6, 0.0, 0.0)
FIG10 = binary_scenario(0.2, 0.0, -0.1, 0.999, 1.0, 0.7)


# ---------------------------------------------------------------- classifier

def test_constant_series_is_stable_node():
    c = classify_series(np.full(200, 0.4), 1.0, "discrete")
    assert c.verdict is Verdict.STABLE_NODE
    assert c.center == pytest.approx(0.4)
    assert c.tail_amplitude == 0.0


def test_damped_cosine_is_stable_focus():
    k = np.arange(600)
    x = 0.5 + 0.3 * np.exp(-k / 80.0) * np.cos(2 * np.pi * k / 25.0)
    c = classify_series(x, 1.0, "continuous")
    assert c.verdict is Verdict.STABLE_FOCUS
    assert c.center == pytest.approx(0.5, abs=1e-2)


def test_square_wave_is_limit_cycle_with_period():
    x = np.where(np.arange(300) % 2 == 0, 0.3, 0.7)
    c = classify_series(x, 0.5, "discrete")
    assert c.verdict is Verdict.LIMIT_CYCLE
    assert c.dominant_period == pytest.approx(1.0)  # lag 2 at dt 0.5
    assert c.center == pytest.approx(0.5, abs=1e-6)


def test_noise_needs_positive_exponent_for_chaotic():
    rng = np.random.default_rng(7)
    x = 0.5 + 0.3 * rng.uniform(-1.0, 1.0, size=400)
    without = classify_series(x, 1.0, "discrete")
    assert without.verdict is Verdict.NON_CONVERGENT
    with_lam = classify_series(x, 1.0, "discrete", lyapunov=0.3)
    assert with_lam.verdict is Verdict.CHAOTIC
    assert with_lam.lyapunov == 0.3
    # the aperiodic branch is for map orbits; flows never take it
    cont = classify_series(x, 1.0, "continuous", lyapunov=0.3)
    assert cont.verdict is Verdict.NON_CONVERGENT


def test_converged_tail_wins_over_earlier_ringing():
    # once the orbit settles, the terminal segment decides the verdict even
    # though the fixed tail window still straddles the oscillatory transient
    k = np.arange(300)
    ringing = 0.5 + 0.3 * np.exp(-k / 40.0) * np.cos(2 * np.pi * k / 25.0)
    x = np.concatenate([ringing, np.full(100, ringing[-1])])
    c = classify_series(x, 1.0, "discrete")
    assert c.verdict is Verdict.STABLE_NODE


def test_classifier_input_validation():
    with pytest.raises(ValueError):
        classify_series(np.zeros(99), 1.0, "discrete")
    with pytest.raises(ValueError):
        classify_series(np.zeros(200), 1.0, "discrete", tail_fraction=0.0)
    with pytest.raises(ValueError):
        classify_series(np.zeros(200), 1.0, "euler")


def test_classify_trajectory_covers_all_channels():
    traj = run_discrete(FIG1, DiscreteRunConfig(horizon=250))
    classes = classify(traj)
    assert set(classes) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert all(c.verdict is Verdict.STABLE_NODE for c in classes.values())
    assert classes[(0, 0)].center == pytest.approx(0.4, abs=1e-3)
    assert classes[(1, 0)].center == pytest.approx(0.6359219, abs=1e-3)


# ----------------------------------------------------- oscillation measures

def test_oscillation_count_monotone_is_zero():
    assert oscillation_count(np.linspace(0.0, 1.0, 50)) == 0
    assert oscillation_count(np.full(50, 0.3)) == 0


def test_oscillation_count_alternation():
    x = np.where(np.arange(12) % 2 == 0, 0.3, 0.7)
    assert oscillation_count(x) == 10  # every interior step reverses


def test_oscillation_onset_quiet_start():
    x = np.concatenate([np.full(50, 0.5),
                        np.where(np.arange(50) % 2 == 0, 0.4, 0.6)])
    onset = oscillation_onset(x)
    assert 45 <= onset <= 52
    assert oscillation_onset(np.where(np.arange(100) % 2 == 0, 0.4, 0.6)) == 0


# -------------------------------------------------------------- fixed points

SOLVER_CASES = [
    ((0.4, 0.1, 0.59, 0.6, 0.0, 0.0), (0.400000000, 0.635921901)),
    ((0.8, 0.9, 0.19, -0.8, 0.0, 0.0), (0.800000000, 0.376789069)),
    ((0.6, 1.0, 0.39, -0.9, 1.0, 1.0), (0.279672790, 0.600000000)),
    ((0.1, 0.0, 0.899, 0.93, 1.0, 1.0), (0.569685766, 0.100000000)),
]


@pytest.mark.parametrize("params,expected", SOLVER_CASES)
def test_solver_reaches_known_points(params, expected):
    r = solve_fixed_point(binary_scenario(*params))
    assert r.converged
    assert r.residual <= 1e-9
    assert r.p_star[:, 0] == pytest.approx(expected, abs=1e-6)
    assert np.all((r.p_star >= 0.0) & (r.p_star <= 1.0))
    assert np.allclose(r.q_star.sum(axis=1), 0.0, atol=1e-12)


def test_solver_near_consensus_memory_latch():
    # both groups end pinned near the same corner; the slow group only gets
    # there after its memory saturates, which takes the solver a long tail
    # of tiny damped steps
    r = solve_fixed_point(binary_scenario(0.3, 0.0, 0.699, 0.99, 0.9, 0.8))
    assert r.converged
    assert r.p_star[:, 0] == pytest.approx((0.990000191, 0.990001530), abs=1e-6)
    assert r.iterations == 30512


def test_solver_reported_residual_matches_reported_point():
    r = solve_fixed_point(FIG1)
    s = FIG1
    lhs = s.herding_weights @ (s.f + r.q_star)
    assert float(np.max(np.abs(lhs - r.p_star))) == pytest.approx(r.residual, abs=1e-15)


def test_solver_output_is_frozen():
    r = solve_fixed_point(FIG1)
    with pytest.raises(ValueError):
        r.p_star[0, 0] = 0.0


# ------------------------------------------------------------------ lyapunov

def test_lyapunov_positive_on_chaotic_map():
    lam = lyapunov_estimate(FIG10)
    assert lam == pytest.approx(0.285129, abs=1e-3)
    # cross-check band around the value the reduced one-dimensional map gives
    assert abs(lam - 0.294) <= 0.05


def test_lyapunov_negative_or_tiny_on_converging_maps():
    assert abs(lyapunov_estimate(FIG1)) <= 0.002
    slow = binary_scenario(0.3, 0.0, 0.699, 0.99, 0.9, 0.8)
    assert abs(lyapunov_estimate(slow)) <= 0.002


def test_lyapunov_perturbation_domain():
    with pytest.raises(ValueError):
        lyapunov_estimate(FIG1, perturbation=0.0)
    with pytest.raises(ValueError):
        lyapunov_estimate(FIG1, perturbation=1e-3)


# -------------------------------------------------------------- run compare

def test_compare_runs_on_matching_dynamics():
    dis = run_discrete(FIG1, DiscreteRunConfig(horizon=300))
    con = run_continuous(FIG1, ContinuousRunConfig(horizon=200.0, step=0.1))
    rep = compare_runs(dis, con)
    assert len(rep.channels) == 4
    for ch in rep.channels:
        assert ch.terminal_gap < 1e-5
        assert ch.verdicts_match
        assert ch.sup_gap >= ch.terminal_gap


def test_compare_runs_rejects_mismatched_inputs():
    dis = run_discrete(FIG1, DiscreteRunConfig(horizon=150))
    con_other = run_continuous(binary_scenario(0.8, 0.9, 0.19, -0.8, 0.0, 0.0),
                               ContinuousRunConfig(horizon=150.0, step=0.1))
    with pytest.raises(ValueError):
        compare_runs(dis, con_other)
    with pytest.raises(ValueError):
        compare_runs(dis, dis)
