import numpy as np
import pytest

from affectdyn import (DiscreteRunConfig, binary_scenario, initial_state,
                       kl_gain, run_discrete, step_discrete)

FIG1 = binary_scenario(0.4, 0.1, 0.59, 0.6, 0.0, 0.0)


def test_first_step_uses_initial_attractions_unchanged():
    # no memory is in force at t=0, so step one lands on W @ (f + q0)
    traj = run_discrete(FIG1, DiscreteRunConfig(horizon=1))
    expect = FIG1.herding_weights @ (FIG1.f + FIG1.q0)
    assert np.allclose(traj.probabilities[1], expect, atol=1e-15)


def test_second_step_decays_by_first_gains():
    traj = run_discrete(FIG1, DiscreteRunConfig(horizon=2))
    p1 = traj.probabilities[1]
    g1 = kl_gain(p1[0], p1[1])  # J/(N-1) = 1 here
    g2 = kl_gain(p1[1], p1[0])
    q = FIG1.q0 * np.exp(-np.array([g1, g2]))[:, None]
    expect = FIG1.herding_weights @ (FIG1.f + q)
    assert np.allclose(traj.probabilities[2], expect, atol=1e-14)


def test_long_memory_accumulates_short_does_not():
    traj = run_discrete(FIG1, DiscreteRunConfig(horizon=50))
    m = traj.long_memory
    # group 1 accumulates (non-decreasing), group 2 records zero
    assert np.all(np.diff(m[:, 0]) >= -1e-15)
    assert m[-1, 0] > m[1, 0]
    assert np.all(m[:, 1] == 0.0)


def test_rows_stay_normalized():
    traj = run_discrete(binary_scenario(0.2, 0.0, -0.1, 0.999, 1.0, 0.7),
                        DiscreteRunConfig(horizon=500))
    sums = traj.probabilities.sum(axis=2)
    assert np.max(np.abs(sums - 1.0)) < 1e-7
    assert traj.probabilities.min() >= 0.0
    assert traj.probabilities.max() <= 1.0


def test_records_every_step_by_default():
    traj = run_discrete(FIG1, DiscreteRunConfig(horizon=40))
    assert traj.n_records == 41
    assert traj.times[0] == 0.0
    assert traj.times[-1] == 40.0


def test_record_stride_keeps_final_state():
    traj = run_discrete(FIG1, DiscreteRunConfig(horizon=45, record_stride=10))
    assert list(traj.times) == [0.0, 10.0, 20.0, 30.0, 40.0, 45.0]
    full = run_discrete(FIG1, DiscreteRunConfig(horizon=45))
    assert np.allclose(traj.probabilities[-1], full.probabilities[-1])


def test_step_discrete_matches_runner():
    traj = run_discrete(FIG1, DiscreteRunConfig(horizon=1))
    st = step_discrete(initial_state(FIG1), FIG1, np.zeros(2))
    assert np.allclose(st.probabilities, traj.probabilities[1], atol=1e-15)
    assert st.time == 1.0


def test_step_discrete_keeps_accumulators():
    st0 = initial_state(FIG1)
    st1 = step_discrete(st0, FIG1, np.array([0.3, 0.1]))
    assert np.all(st1.long_memory_acc == st0.long_memory_acc)


def test_zero_coupling_is_stationary_after_one_step():
    # J=0: attractions never decay, so W @ (f + q0) is reached at t=1
    # and held exactly thereafter
    s = binary_scenario(0.4, 0.1, 0.59, 0.6, 0.3, 0.7, coupling=0.0)
    traj = run_discrete(s, DiscreteRunConfig(horizon=30))
    fixed = s.herding_weights @ (s.f + s.q0)
    for k in range(1, traj.n_records):
        assert np.array_equal(traj.probabilities[k], fixed)


def test_invalid_scenario_rejected():
    from affectdyn import Scenario, MemoryKind, ScenarioError
    bad = Scenario(
        n_groups=1, n_alternatives=2,
        utility_factors=((0.7, 0.7),),
        initial_attractions=((0.0, 0.0),),
        herding=(0.0,),
        memory_kinds=(MemoryKind.LONG_TERM,),
    )
    with pytest.raises(ScenarioError):
        run_discrete(bad)


def test_horizon_validation():
    with pytest.raises(ValueError):
        DiscreteRunConfig(horizon=0)
    with pytest.raises(ValueError):
        DiscreteRunConfig(horizon=10, record_stride=11)
