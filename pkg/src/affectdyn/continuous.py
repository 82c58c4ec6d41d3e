"""Continuous-time engine: fixed-step 4th-order Runge-Kutta integration.

The flow relaxes each group toward the same herding-weighted mixture the
discrete map jumps to. Long-term memory rides along as extra ODE state
(its derivative is the instantaneous gain sum); short-term memory is an
algebraic function of the state, gated by tanh(t/tau) so it switches on
smoothly over one decision delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discrete import EngineError
from .memory import CLAMP_EPSILON, EXP_CLAMP, gain_sums
from .scenario import StateVector, require_valid


@dataclass(frozen=True)
class ContinuousRunConfig:
    horizon: float = 200.0
    step: float | None = None  # None: use the scenario's tau
    record_stride: int = 1

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.step is not None and not 0 < self.step <= self.horizon:
            raise ValueError("step must lie in (0, horizon]")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


def _derivatives(p, m_long, t, f, q0, weights, long_mask, coupling, tau, clamp):
    g = gain_sums(p, coupling, clamp)
    gate = math.tanh(t / tau) if t > 0 else 0.0
    expo = np.where(long_mask, m_long, gate * g)
    q = q0 * np.exp(-np.minimum(expo, EXP_CLAMP))[:, None]
    dp = weights @ (f + q) - p
    dm = np.where(long_mask, g, 0.0)
    return dp, dm


def rhs(state, scenario, t):
    """Time derivative of the augmented state (probabilities, long memory).

    Returns (dp, dm) with dp of shape (groups, alternatives) and dm per
    group. Rows of dp sum to zero, so the flow preserves normalization.
    """
    require_valid(scenario)
    return _derivatives(
        np.asarray(state.probabilities, dtype=float),
        np.asarray(state.long_memory_acc, dtype=float),
        t, scenario.f, scenario.q0, scenario.herding_weights,
        scenario.long_mask, scenario.coupling, scenario.tau, CLAMP_EPSILON)


def run_continuous(scenario, config=None):
    """Integrate from the initial state to config.horizon.

    Classical RK4 at fixed step (default: the scenario's tau). The gain
    integrand is evaluated at the internal stage states, keeping the
    augmented system at full 4th order. States are never renormalized:
    the derivative rows sum to zero, so normalization is preserved up to
    roundoff, and the acceptance tolerance (1e-7) checks exactly that.
    """
    from .trajectory import Trajectory

    require_valid(scenario)
    if config is None:
        config = ContinuousRunConfig()
    h = config.step if config.step is not None else scenario.tau
    n_steps = int(round(config.horizon / h))
    if n_steps < 1:
        raise ValueError("horizon shorter than one step")

    f, q0 = scenario.f, scenario.q0
    weights = scenario.herding_weights
    long_mask = scenario.long_mask
    coupling = scenario.coupling
    tau = scenario.tau
    clamp = CLAMP_EPSILON

    def deriv(p, m, t):
        return _derivatives(p, m, t, f, q0, weights, long_mask, coupling, tau, clamp)

    p = f + q0
    m = np.zeros(scenario.n_groups)
    times = [0.0]
    probs = [p.copy()]
    mems = [m.copy()]
    for k in range(n_steps):
        t = k * h
        k1p, k1m = deriv(p, m, t)
        k2p, k2m = deriv(p + 0.5 * h * k1p, m + 0.5 * h * k1m, t + 0.5 * h)
        k3p, k3m = deriv(p + 0.5 * h * k2p, m + 0.5 * h * k2m, t + 0.5 * h)
        k4p, k4m = deriv(p + h * k3p, m + h * k3m, t + h)
        p = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        m = m + h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(m))):
            raise EngineError(f"non-finite state at t={t + h:.6g}")
        step_no = k + 1
        if step_no % config.record_stride == 0 or step_no == n_steps:
            times.append(step_no * h)
            probs.append(p.copy())
            mems.append(m.copy())

    return Trajectory(
        algorithm="continuous",
        times=np.array(times),
        probabilities=np.array(probs),
        long_memory=np.array(mems),
        step=h,
        record_stride=config.record_stride,
        scenario=scenario,
    )
