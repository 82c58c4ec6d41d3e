"""Information gains and memory functions driving attraction decay.

The divergence of one group's choice distribution from another's measures
the information transferred between them. Long-term memory accumulates
these gains over the whole history; short-term memory keeps only the
latest one. Attraction factors decay exponentially with the memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import MemoryKind

# numpy 2 renamed trapz
_trapezoid = getattr(np, "trapezoid", None) or np.trapz

CLAMP_EPSILON = 1e-12

# exp(-746) underflows double precision; cap exponents before exp().
EXP_CLAMP = 745.0


@dataclass(frozen=True)
class MemoryModel:
    kind: MemoryKind
    coupling: float = 1.0
    clamp_epsilon: float = CLAMP_EPSILON

    def __post_init__(self):
        if not 0.0 < self.clamp_epsilon <= 1e-6:
            raise ValueError("clamp_epsilon must lie in (0, 1e-6]")
        if not self.coupling >= 0:
            raise ValueError("coupling must be non-negative")


def _clamp_rows(p, clamp_epsilon):
    """Clip entries into [clamp, 1-clamp] and renormalize each row.

    Keeps logarithms finite when distributions touch the simplex boundary
    (the model does produce exact 0/1 probabilities).
    """
    c = np.clip(p, clamp_epsilon, 1.0 - clamp_epsilon)
    return c / c.sum(axis=-1, keepdims=True)


def _two_diff(a, b):
    """a - b as an exact (hi, lo) pair."""
    s = a - b
    t = a - s
    return s, (a - (s + t)) + (t - b)


def _sum_dd(values):
    """Exact sum as a (hi, lo) pair (lo carries the sub-ulp remainder)."""
    hi = math.fsum(values)
    return hi, math.fsum(list(values) + [-hi])


def _ratio_gap_term(d):
    """(1 + d) * log1p(d) - d: per-entry divergence, >= 0, no cancellation.

    Direct evaluation loses all significant digits for small d (the value
    is ~d^2/2 against intermediates of size |d|), so small arguments take
    the series. Relative accuracy ~1e-15 on both branches.
    """
    if abs(d) > 0.01:
        u = math.log1p(d)
        return (u - d) + d * u
    return d * d * (1 / 2 + d * (-1 / 6 + d * (1 / 12 + d * (
        -1 / 20 + d * (1 / 30 + d * (-1 / 42 + d * (1 / 56 - d / 72)))))))


def kl_gain(p_i, p_j, clamp_epsilon=CLAMP_EPSILON):
    """Divergence of distribution p_i from p_j, clamped for boundary safety.

    Entries are clipped into [clamp_epsilon, 1-clamp_epsilon] and each row
    renormalized before the logarithms, so boundary values contribute the
    p*ln(p) -> 0 limit instead of infinities. Always >= 0; zero exactly
    when the clamped rows coincide.

    Because the rows renormalize to exact unit mass, the divergence equals
    the sum of the pointwise nonnegative terms q*((1+d)log1p(d) - d) with
    d = p/q - 1; evaluating those (with the renormalization carried in
    compensated arithmetic rather than materialized) keeps ~1e-13 relative
    accuracy even when the rows nearly coincide and the divergence is tiny.
    A plain sum of p*log(p/q) terms would be accurate only to ~1e-16
    absolute, which is hopeless relative to a divergence of, say, 1e-6.
    """
    a = np.asarray(p_i, dtype=float)
    b = np.asarray(p_j, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("distributions must be equal-length vectors")
    if a.size < 2:
        raise ValueError("distributions need at least two entries")
    for name, r in (("p_i", a), ("p_j", b)):
        if np.any(r < -1e-9) or np.any(r > 1.0 + 1e-9):
            raise ValueError(f"{name} has entries outside [0, 1]")
        if abs(r.sum() - 1.0) > 1e-6:
            raise ValueError(f"{name} does not sum to 1 (got {r.sum()!r})")
    ac = [min(max(float(x), clamp_epsilon), 1.0 - clamp_epsilon) for x in a]
    bc = [min(max(float(x), clamp_epsilon), 1.0 - clamp_epsilon) for x in b]
    sa_hi, sa_lo = _sum_dd(ac)
    sb_hi, sb_lo = _sum_dd(bc)
    ds = (sb_hi - sa_hi) + (sb_lo - sa_lo)
    terms = []
    for x, y in zip(ac, bc):
        # d = (x*sb - y*sa) / (y*sa), with the numerator assembled from
        # exact differences so near-identical rows keep full precision
        dxy_hi, dxy_lo = _two_diff(x, y)
        num = math.fsum([x * ds, sa_hi * dxy_hi, sa_hi * dxy_lo, sa_lo * dxy_hi])
        d = num / (y * sa_hi)
        terms.append((y / sb_hi) * _ratio_gap_term(d))
    # roundoff can drive tiny negatives for near-identical rows
    return max(math.fsum(terms), 0.0)


def gain_sums(p, coupling, clamp_epsilon=CLAMP_EPSILON):
    """Per-group normalized gain sums: (J/(N-1)) * sum_{i != j} KL(p_j || p_i).

    Fast unvalidated path used by the engines; p has shape (N, N_A).
    A single group exchanges no information (returns zeros).
    """
    n = p.shape[0]
    if n < 2:
        return np.zeros(n)
    ph = _clamp_rows(p, clamp_epsilon)
    logs = np.log(ph)
    self_terms = np.sum(ph * logs, axis=1)
    # cross[j, i] = sum_n p_j(n) ln p_i(n)
    cross = ph @ logs.T
    mu = self_terms[:, None] - cross
    np.maximum(mu, 0.0, out=mu)
    np.fill_diagonal(mu, 0.0)
    return coupling / (n - 1) * mu.sum(axis=1)


def memory_discrete(j, history, model, n_groups):
    """Accumulated (LongTerm) or latest (ShortTerm) gain for group j.

    ``history`` holds the states at integer times 1..t (consecutive); the
    state at time 0 contributes nothing, so an empty history gives 0.
    This is the reference O(t) summation; the engine carries the same
    quantity as an O(1) running accumulator.
    """
    states = list(history)
    if not states:
        return 0.0
    times = [s.time for s in states]
    expect = list(range(1, len(states) + 1))
    if any(abs(a - b) > 1e-9 for a, b in zip(times, expect)):
        raise ValueError(f"history times must be consecutive integers 1..t, got {times}")
    if model.kind is MemoryKind.SHORT_TERM:
        states = states[-1:]
    total = 0.0
    for s in states:
        total += _group_gain_sum(j, s.probabilities, model, n_groups)
    return total


def _group_gain_sum(j, p, model, n_groups):
    if n_groups < 2:
        return 0.0
    total = 0.0
    for i in range(n_groups):
        if i != j:
            total += kl_gain(p[j], p[i], model.clamp_epsilon)
    return model.coupling / (n_groups - 1) * total


def memory_continuous_long(j, times, mu_sums, t, model, n_groups):
    """Trapezoid quadrature of the normalized gain sums over [0, t].

    ``times``/``mu_sums`` sample sum_{i != j} KL(p_j || p_i) on the
    integrator grid; the J/(N-1) normalization is applied here.
    Non-decreasing in t for non-negative integrands.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    ts = np.asarray(times, dtype=float)
    vs = np.asarray(mu_sums, dtype=float)
    if ts.shape != vs.shape or ts.ndim != 1:
        raise ValueError("times and mu_sums must be equal-length vectors")
    if t == 0 or ts.size < 2:
        return 0.0
    keep = ts <= t + 1e-12
    ts, vs = ts[keep], vs[keep]
    if ts.size < 2:
        return 0.0
    scale = model.coupling / (n_groups - 1) if n_groups > 1 else 0.0
    return scale * float(_trapezoid(vs, ts))


def memory_continuous_short(j, state, t, tau, model, n_groups):
    """Instantaneous gain sum gated by tanh(t/tau).

    The gate rises from 0 at t=0 and saturates to 1 for t >> tau, so the
    short memory switches on smoothly over one decision delay.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if tau <= 0:
        raise ValueError("tau must be positive")
    return math.tanh(t / tau) * _group_gain_sum(j, state.probabilities, model, n_groups)


def attraction(q0, M):
    """Attraction factor after memory M has accumulated: q0 * exp(-M).

    Magnitude never exceeds |q0| and the sign is preserved; all
    alternatives of a group share one M, so zero-sum rows stay zero-sum.
    """
    if M < 0:
        raise ValueError("memory must be non-negative")
    return q0 * math.exp(-min(M, EXP_CLAMP))
