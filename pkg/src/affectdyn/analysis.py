"""Fixed points, attractor classification, chaos detection, engine comparison."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .discrete import DiscreteRunConfig, _advance
from .memory import CLAMP_EPSILON, EXP_CLAMP, gain_sums
from .scenario import require_valid
from .trajectory import GridError


class Verdict(enum.Enum):
    STABLE_NODE = "StableNode"
    STABLE_FOCUS = "StableFocus"
    LIMIT_CYCLE = "LimitCycle"
    CHAOTIC = "Chaotic"
    NON_CONVERGENT = "NonConvergent"


@dataclass(frozen=True)
class ClassifierTolerances:
    """Thresholds for the attractor taxonomy; all configuration-exposed.

    tol_conv: absolute tail amplitude below which a flat tail is a node.
    tol_lyap: per-step exponent above which a sustained aperiodic discrete
        orbit counts as chaotic.
    noise_floor: deviations below this are treated as exact convergence
        when counting oscillations.
    period_autocorr: minimum tail autocorrelation for a period candidate.
    period_phase_tol: fold test - per-phase spread must stay below this
        fraction of the amplitude for a genuine cycle.
    settled_fraction / settled_min_points: terminal segment inspected for
        node detection (late convergence hides from fixed tail windows).
    min_decay_peaks / decay_min_drop: how many shrinking deviation peaks,
        and how much total log-amplitude drop, a focus verdict needs.
    """

    tol_conv: float = 1e-4
    tol_lyap: float = 0.01
    noise_floor: float = 1e-12
    period_autocorr: float = 0.8
    period_phase_tol: float = 0.05
    settled_fraction: float = 0.05
    settled_min_points: int = 32
    min_decay_peaks: int = 5
    decay_min_drop: float = math.log(2.0)


@dataclass(frozen=True)
class AttractorClassification:
    verdict: Verdict
    center: float
    tail_amplitude: float
    sign_changes: int
    lyapunov: float | None = None
    dominant_period: float | None = None


@dataclass(frozen=True)
class FixedPointReport:
    p_star: np.ndarray
    q_star: np.ndarray
    residual: float
    converged: bool
    iterations: int

    def __post_init__(self):
        for name in ("p_star", "q_star"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class ChannelDivergence:
    group: int
    alternative: int
    sup_gap: float
    terminal_gap: float
    verdict_discrete: Verdict
    verdict_continuous: Verdict

    @property
    def verdicts_match(self):
        return self.verdict_discrete is self.verdict_continuous


@dataclass(frozen=True)
class DivergenceReport:
    channels: tuple


def _crossings(dev, noise_floor):
    """Sign alternations of a deviation series, ignoring sub-floor noise."""
    live = np.abs(dev) > noise_floor
    signs = np.sign(dev[live])
    if signs.size < 2:
        return 0
    return int(np.sum(signs[1:] != signs[:-1]))


def oscillation_count(x, noise_floor=1e-12):
    """Direction reversals of the series (sign changes of its increments).

    A monotone approach scores at most a couple of roundoff flips; an
    oscillatory one scores once per turn. Used to check oscillatory-versus-
    monotone approach claims that a tail-window classifier cannot see once
    the decay has completed. Increments below noise_floor are ignored.
    """
    x = np.asarray(x, dtype=float)
    return _crossings(np.diff(x), noise_floor)


def oscillation_onset(x, tail_fraction=0.5):
    """First step whose jump reaches half the tail's mean step size.

    Separates orbits that oscillate from the start (onset ~ 0) from those
    whose oscillation grows only after a quiet transient.
    """
    x = np.asarray(x, dtype=float)
    d = np.abs(np.diff(x))
    tail = d[int(len(d) * (1.0 - tail_fraction)):]
    ref = float(tail.mean())
    if ref <= 0:
        return 0
    hits = np.nonzero(d >= 0.5 * ref)[0]
    return int(hits[0]) if hits.size else len(d)


def _autocorrelation(dev):
    n = dev.size
    var = float(np.dot(dev, dev))
    if var <= 0:
        return np.zeros(n)
    full = np.correlate(dev, dev, mode="full")[n - 1:]
    return full / var


def _period_candidate(dev, tol):
    """Smallest autocorrelation-peak lag that also passes the fold test."""
    n = dev.size
    ac = _autocorrelation(dev)
    max_lag = n // 2
    amp = float(np.max(np.abs(dev)))
    if amp <= 0:
        return None
    for lag in range(1, max_lag):
        left = ac[lag - 1] if lag >= 1 else -np.inf
        right = ac[lag + 1] if lag + 1 <= max_lag else -np.inf
        if ac[lag] < tol.period_autocorr:
            continue
        if not (ac[lag] >= left and ac[lag] >= right):
            continue
        # fold: points one period apart must nearly coincide
        spread = 0.0
        for phase in range(lag):
            vals = dev[phase::lag]
            if vals.size >= 2:
                spread = max(spread, float(vals.std()))
        if spread <= tol.period_phase_tol * amp:
            return lag
    return None


def _classify_channel(x, dt, algorithm, tail_fraction, tol, lyapunov):
    n = x.size
    tail = x[int(n * (1.0 - tail_fraction)):]
    center = float(tail.mean())
    dev = tail - center
    amp = float(np.max(np.abs(dev)))
    sign_changes = _crossings(dev, tol.noise_floor)
    lyap_out = lyapunov if algorithm == "discrete" else None

    # (a) settled terminal segment: catches convergence completing late in
    # the run, where the fixed tail window still straddles the transient
    k = max(tol.settled_min_points, int(math.ceil(n * tol.settled_fraction)))
    k = min(k, n)
    seg = x[n - k:]
    seg_center = float(seg.mean())
    seg_dev = seg - seg_center
    seg_amp = float(np.max(np.abs(seg_dev)))
    seg_sc = _crossings(seg_dev, tol.noise_floor)
    if seg_amp <= tol.tol_conv and seg_sc <= 2:
        return AttractorClassification(
            verdict=Verdict.STABLE_NODE, center=center, tail_amplitude=seg_amp,
            sign_changes=seg_sc, lyapunov=lyap_out)

    # (b) damped oscillation: enough shrinking peaks with decisive decay
    if sign_changes > 2:
        peaks = []
        mags = np.abs(dev)
        for i in range(1, len(mags) - 1):
            if mags[i] >= mags[i - 1] and mags[i] >= mags[i + 1] and mags[i] > tol.noise_floor:
                peaks.append((i, mags[i]))
        if len(peaks) >= tol.min_decay_peaks:
            idx = np.array([p[0] for p in peaks], dtype=float)
            logs = np.log([p[1] for p in peaks])
            slope = float(np.polyfit(idx, logs, 1)[0])
            if slope < 0 and slope * (len(tail) - 1) < -tol.decay_min_drop:
                return AttractorClassification(
                    verdict=Verdict.STABLE_FOCUS, center=center, tail_amplitude=amp,
                    sign_changes=sign_changes, lyapunov=lyap_out)

    # (c) sustained periodic oscillation
    if amp > tol.tol_conv:
        lag = _period_candidate(dev, tol)
        if lag is not None:
            return AttractorClassification(
                verdict=Verdict.LIMIT_CYCLE, center=center, tail_amplitude=amp,
                sign_changes=sign_changes, lyapunov=lyap_out,
                dominant_period=lag * dt)

    # (d) sustained aperiodic with positive exponent (discrete orbits only)
    if (amp > tol.tol_conv and algorithm == "discrete"
            and lyapunov is not None and lyapunov > tol.tol_lyap):
        return AttractorClassification(
            verdict=Verdict.CHAOTIC, center=center, tail_amplitude=amp,
            sign_changes=sign_changes, lyapunov=lyap_out)

    return AttractorClassification(
        verdict=Verdict.NON_CONVERGENT, center=center, tail_amplitude=amp,
        sign_changes=sign_changes, lyapunov=lyap_out)


def classify_series(x, dt, algorithm, tail_fraction=0.5, tolerances=None,
                    lyapunov=None):
    """Attractor verdict for one recorded series sampled every dt."""
    x = np.asarray(x, dtype=float)
    if x.size < 100:
        raise ValueError(f"need >= 100 recorded points, got {x.size}")
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must lie in (0, 1)")
    if algorithm not in ("discrete", "continuous"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    tol = tolerances if tolerances is not None else ClassifierTolerances()
    return _classify_channel(x, dt, algorithm, tail_fraction, tol, lyapunov)


def classify(trajectory, tail_fraction=0.5, tolerances=None, lyapunov=None):
    """Attractor verdict per (group, alternative) channel.

    Ordered taxonomy over the recorded tail: flat -> StableNode, decaying
    oscillation -> StableFocus, coherent period -> LimitCycle, sustained
    aperiodic discrete orbit with positive exponent -> Chaotic, else
    NonConvergent. ``lyapunov`` (from lyapunov_estimate) enables the
    chaotic branch; continuous trajectories never receive one.
    """
    if trajectory.n_records < 100:
        raise ValueError(f"need >= 100 recorded points, got {trajectory.n_records}")
    dt = trajectory.step * trajectory.record_stride
    out = {}
    s = trajectory.scenario
    for j in range(s.n_groups):
        for n in range(s.n_alternatives):
            out[(j, n)] = classify_series(
                trajectory.channel(j, n), dt, trajectory.algorithm,
                tail_fraction, tolerances, lyapunov)
    return out


def _clip_simplex(p):
    c = np.clip(p, CLAMP_EPSILON, 1.0 - CLAMP_EPSILON)
    return c / c.sum(axis=-1, keepdims=True)


def lyapunov_estimate(scenario, config=None, perturbation=1e-8, *,
                      transient=500, align=50, seed=0, growth_floor=1e-15):
    """Largest Lyapunov exponent of the discrete map, two-trajectory method.

    The dynamical state is (probabilities, long-memory accumulators);
    short-term memory is recomputed from the perturbed probabilities
    inside every step, so the perturbation propagates through the full
    map. After a transient, a zero-row-sum perturbation of magnitude
    ``perturbation`` is evolved alongside the base orbit, renormalized
    each step; an alignment phase lets it rotate into the dominant
    direction before ln-growth accumulation starts. Separations below
    growth_floor register the floor (exact contraction reports the
    floor's log, not -inf).
    """
    require_valid(scenario)
    if not 0.0 < perturbation <= 1e-6:
        raise ValueError("perturbation must lie in (0, 1e-6]")
    if config is None:
        config = DiscreteRunConfig(horizon=4000)
    f, q0 = scenario.f, scenario.q0
    weights = scenario.herding_weights
    long_mask = scenario.long_mask
    coupling = scenario.coupling

    p = f + q0
    m = np.zeros(scenario.n_groups)
    g = np.zeros(scenario.n_groups)
    for _ in range(transient):
        p, m, g = _advance(p, m, g, f, q0, weights, long_mask, coupling, CLAMP_EPSILON)

    rng = np.random.default_rng(seed)
    dp = rng.standard_normal(p.shape)
    dp -= dp.mean(axis=1, keepdims=True)
    dm = rng.standard_normal(scenario.n_groups) * long_mask
    norm = math.sqrt(float(np.sum(dp * dp) + np.sum(dm * dm)))
    dp *= perturbation / norm
    dm *= perturbation / norm

    logs = []
    for k in range(align + config.horizon):
        p2, m2, g2 = _advance(p, m, g, f, q0, weights, long_mask, coupling, CLAMP_EPSILON)
        # the short-memory gain is a function of the probabilities, so the
        # perturbed branch recomputes it from its own state; reusing the
        # base gain would freeze the only feedback path for short groups
        pc = _clip_simplex(p + dp)
        pp, mp, _ = _advance(pc, m + dm, gain_sums(pc, coupling, CLAMP_EPSILON),
                             f, q0, weights, long_mask, coupling, CLAMP_EPSILON)
        dxp = pp - p2
        dxm = (mp - m2) * long_mask
        sep = math.sqrt(float(np.sum(dxp * dxp) + np.sum(dxm * dxm)))
        growth = max(sep / perturbation, growth_floor)
        if k >= align:
            logs.append(math.log(growth))
        if sep > 0:
            dp = dxp * (perturbation / sep)
            dm = dxm * (perturbation / sep)
        p, m, g = p2, m2, g2
    return float(np.mean(logs))


def solve_fixed_point(scenario, *, tol=1e-10, max_iterations=10 ** 6,
                      damping=0.5, probe_steps=4096, latch_threshold=30.0):
    """Self-consistent stationary point of the map.

    A probe run of the actual discrete dynamics decides which long-memory
    groups lose their attraction entirely (accumulated memory beyond
    latch_threshold: the factor exp(-M) is numerically dead). The damped
    iteration then solves p = W(f + q(p)) with q = 0 for latched groups,
    the instantaneous-gain attraction for short-memory groups, and
    accumulating memory for surviving long-memory groups - the latter
    keeps latching during iteration if its memory diverges, and otherwise
    self-organizes to a finite value as the iterates reach consensus.
    Non-convergence (no point attractor) is a reported outcome.
    """
    require_valid(scenario)
    f, q0 = scenario.f, scenario.q0
    weights = scenario.herding_weights
    long_mask = scenario.long_mask
    coupling = scenario.coupling

    p = f + q0
    m = np.zeros(scenario.n_groups)
    g = np.zeros(scenario.n_groups)
    for _ in range(probe_steps):
        p, m, g = _advance(p, m, g, f, q0, weights, long_mask, coupling, CLAMP_EPSILON)
    latched = long_mask & (m > latch_threshold)

    p = f + q0
    m_acc = np.zeros(scenario.n_groups)
    iterations = 0
    residual = math.inf
    settled = False
    while iterations < max_iterations:
        gains = gain_sums(p, coupling, CLAMP_EPSILON)
        expo = np.where(long_mask, m_acc, gains)
        q = q0 * np.exp(-np.minimum(expo, EXP_CLAMP))[:, None]
        q[latched] = 0.0
        target = weights @ (f + q)
        inc = np.where(long_mask & ~latched, gains, 0.0)
        # a genuine stationary point needs the memory drift to have died
        # out too, not just the probability residual
        residual = float(np.max(np.abs(target - p)))
        if residual <= tol and float(inc.max(initial=0.0)) <= tol:
            settled = True
            break
        latched |= long_mask & ~latched & (m_acc > latch_threshold)
        p = (1.0 - damping) * p + damping * target
        m_acc = m_acc + inc
        iterations += 1

    gains = gain_sums(p, coupling, CLAMP_EPSILON)
    expo = np.where(long_mask, m_acc, gains)
    q = q0 * np.exp(-np.minimum(expo, EXP_CLAMP))[:, None]
    q[latched] = 0.0
    residual = float(np.max(np.abs(weights @ (f + q) - p)))
    return FixedPointReport(
        p_star=p, q_star=q, residual=residual,
        converged=settled and residual <= tol, iterations=iterations)


def compare_runs(dis, con, *, dis_classes=None, con_classes=None):
    """Divergence metrics between a discrete and a continuous run.

    Continuous samples are matched to the integer grid (exact hits only);
    the sup gap runs over the shared integer times, the terminal gap over
    each run's own final state. Verdicts come from ``classify`` unless
    precomputed maps are supplied (pass lyapunov-aware classifications
    for chaotic discrete runs).
    """
    if dis.algorithm != "discrete" or con.algorithm != "continuous":
        raise ValueError("expected one discrete and one continuous trajectory")
    if dis.scenario != con.scenario:
        raise ValueError("trajectories come from different scenarios")
    con_idx, con_ints = con.integer_samples()
    dis_ints = np.round(dis.times).astype(int)
    if np.any(np.abs(dis.times - dis_ints) > 1e-9):
        raise GridError("discrete trajectory has non-integer times")
    common = np.intersect1d(dis_ints, con_ints)
    if common.size == 0:
        raise GridError("no shared integer times between the runs")
    di = {t: i for i, t in enumerate(dis_ints)}
    ci = {t: i for i, t in enumerate(con_ints)}
    dsel = np.array([di[t] for t in common])
    csel = np.array([con_idx[ci[t]] for t in common])

    if dis_classes is None:
        dis_classes = classify(dis)
    if con_classes is None:
        con_classes = classify(con)

    s = dis.scenario
    channels = []
    for j in range(s.n_groups):
        for n in range(s.n_alternatives):
            a = dis.probabilities[dsel, j, n]
            b = con.probabilities[csel, j, n]
            channels.append(ChannelDivergence(
                group=j, alternative=n,
                sup_gap=float(np.max(np.abs(a - b))),
                terminal_gap=float(abs(dis.probabilities[-1, j, n]
                                       - con.probabilities[-1, j, n])),
                verdict_discrete=dis_classes[(j, n)].verdict,
                verdict_continuous=con_classes[(j, n)].verdict,
            ))
    return DivergenceReport(channels=tuple(channels))
