"""Discrete-time engine: iterates the herding map at integer times.

Each step mixes every group's rational-plus-emotional tendencies through
the row-stochastic herding weights, then updates memories with the
information gains measured at the new state. The state at t=0 contributes
no gain (memory starts only after the first decision).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .memory import CLAMP_EPSILON, EXP_CLAMP, gain_sums
from .scenario import StateVector, require_valid


class EngineError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiscreteRunConfig:
    horizon: int = 2000
    record_stride: int = 1

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 1 <= self.record_stride <= self.horizon:
            raise ValueError("record_stride must lie in [1, horizon]")


def _attractions(q0, m_long, short_gain, long_mask):
    """Current q rows from the memory exponents (shared per group)."""
    expo = np.where(long_mask, m_long, short_gain)
    return q0 * np.exp(-np.minimum(expo, EXP_CLAMP))[:, None]


def _advance(p, m_long, short_gain, f, q0, weights, long_mask, coupling, clamp):
    """One full map step plus post-step memory update.

    Returns (p_next, m_long_next, short_gain_next). The short-term gain
    returned is the gain sum measured at the new state; it becomes the
    exponent for short-memory groups on the following step.
    """
    q = _attractions(q0, m_long, short_gain, long_mask)
    p_next = weights @ (f + q)
    g = gain_sums(p_next, coupling, clamp)
    m_long_next = np.where(long_mask, m_long + g, 0.0)
    return p_next, m_long_next, g


def step_discrete(state, scenario, history_memory):
    """Single application of the map from a given state and memory.

    ``history_memory`` is the per-group memory exponent in force at
    state.time (accumulated gains for long-memory groups, the latest gain
    for short-memory groups). The returned state carries the input
    accumulators unchanged: the post-step memory update is the runner's
    job, keeping this function a pure map evaluation.
    """
    require_valid(scenario)
    m = np.asarray(history_memory, dtype=float)
    q = scenario.q0 * np.exp(-np.minimum(m, EXP_CLAMP))[:, None]
    p_next = scenario.herding_weights @ (scenario.f + q)
    return StateVector(
        probabilities=p_next,
        long_memory_acc=state.long_memory_acc,
        time=state.time + 1.0,
    )


def run_discrete(scenario, config=None):
    """Iterate the map for config.horizon steps, recording every stride-th state.

    Evaluation order per step t -> t+1: (1) attractions from the memory in
    force at t; (2) herding-weighted mixing; (3) memory update with gains
    at the new state (long memory accumulates, short memory replaces).
    The final state is always recorded.
    """
    from .trajectory import Trajectory

    require_valid(scenario)
    if config is None:
        config = DiscreteRunConfig()
    f, q0 = scenario.f, scenario.q0
    weights = scenario.herding_weights
    long_mask = scenario.long_mask
    coupling = scenario.coupling
    clamp = CLAMP_EPSILON

    p = f + q0
    m_long = np.zeros(scenario.n_groups)
    short_gain = np.zeros(scenario.n_groups)

    times = [0.0]
    probs = [p.copy()]
    mems = [m_long.copy()]
    for t in range(config.horizon):
        p, m_long, short_gain = _advance(
            p, m_long, short_gain, f, q0, weights, long_mask, coupling, clamp)
        if not np.all(np.isfinite(p)):
            raise EngineError(f"non-finite probabilities at step {t + 1}: {p!r}")
        step_no = t + 1
        if step_no % config.record_stride == 0 or step_no == config.horizon:
            times.append(float(step_no))
            probs.append(p.copy())
            mems.append(m_long.copy())

    return Trajectory(
        algorithm="discrete",
        times=np.array(times),
        probabilities=np.array(probs),
        long_memory=np.array(mems),
        step=1.0,
        record_stride=config.record_stride,
        scenario=scenario,
    )
