"""Problem definition: groups, alternatives, factors, couplings.

A scenario fixes N interacting agent groups choosing among N_A alternatives.
Each group's choice probabilities decompose into a constant rational part
(utility factors, rows summing to 1) plus an emotional part (attraction
factors, rows summing to 0) that decays as information accumulates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .kvformat import FormatError, parse_float, parse_int, parse_kv_text

SUM_TOL = 1e-9

# Non-informative default magnitude for attraction factors when nothing
# better is known; purely a convenience for scenario construction.
DEFAULT_ATTRACTION_MAGNITUDE = 0.25


class MemoryKind(enum.Enum):
    LONG_TERM = "long"
    SHORT_TERM = "short"

    @classmethod
    def from_text(cls, text):
        for kind in cls:
            if kind.value == text:
                return kind
        raise ValueError(f"unknown memory kind {text!r} (expected 'long' or 'short')")


@dataclass(frozen=True)
class Violation:
    """One broken scenario invariant."""

    rule: str
    group: int | None
    alternative: int | None
    value: float
    detail: str

    def __str__(self):
        where = ""
        if self.group is not None:
            where = f" [group {self.group + 1}"
            if self.alternative is not None:
                where += f", alternative {self.alternative + 1}"
            where += "]"
        return f"{self.rule}{where}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(str(v) for v in self.violations)


class ScenarioError(ValueError):
    """Raised when an operation requires a valid scenario and got an invalid one."""

    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


@dataclass(frozen=True)
class Scenario:
    """Immutable problem definition.

    utility_factors f[j][n]: constant rational choice probabilities, each
        row a distribution over alternatives.
    initial_attractions q0[j][n]: emotional deltas at t=0, each row summing
        to zero and bounded so that f + q0 stays in [0, 1].
    herding eps[j]: weight with which group j imitates the mean tendencies
        of the other groups (0 = independent, 1 = pure imitation).
    memory_kinds: per-group LongTerm (gains accumulate forever) or
        ShortTerm (only the latest gain matters).
    coupling J: information-transfer amplitude shared by all pairs, with
        the long-range 1/(N-1) normalization applied inside the engines.
    tau: decision delay; unit of dimensionless time and default
        integration step of the continuous engine.
    """

    n_groups: int
    n_alternatives: int
    utility_factors: tuple
    initial_attractions: tuple
    herding: tuple
    memory_kinds: tuple
    coupling: float = 1.0
    tau: float = 0.1

    @cached_property
    def f(self):
        a = np.array(self.utility_factors, dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def q0(self):
        a = np.array(self.initial_attractions, dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def eps(self):
        a = np.array(self.herding, dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def long_mask(self):
        a = np.array([k is MemoryKind.LONG_TERM for k in self.memory_kinds])
        a.flags.writeable = False
        return a

    @cached_property
    def herding_weights(self):
        """Row-stochastic mixing matrix W: W[j,j]=1-eps_j, off-diagonal eps_j/(N-1)."""
        n = self.n_groups
        w = np.zeros((n, n))
        for j in range(n):
            w[j, j] = 1.0 - self.herding[j]
            if n > 1:
                for i in range(n):
                    if i != j:
                        w[j, i] = self.herding[j] / (n - 1)
        w.flags.writeable = False
        return w


@dataclass(frozen=True)
class StateVector:
    """Snapshot of the dynamics: probabilities plus accumulated long memory.

    long_memory_acc holds the running accumulated information for LongTerm
    groups and stays zero for ShortTerm groups (their memory is a function
    of the instantaneous state, not a carried quantity).
    """

    probabilities: np.ndarray
    long_memory_acc: np.ndarray
    time: float

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        m = np.asarray(self.long_memory_acc, dtype=float)
        p.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "long_memory_acc", m)


@dataclass(frozen=True)
class UtilitySpec:
    """Inputs to the ratio-choice (softmax) utility-factor rule."""

    prior: tuple
    utilities: tuple
    belief: float


def _entry_violations(name, rows, lo, hi, n_groups, n_alternatives):
    out = []
    for j in range(n_groups):
        row = rows[j]
        if len(row) != n_alternatives:
            out.append(Violation(f"{name}-shape", j, None, float(len(row)),
                                 f"row has {len(row)} entries, expected {n_alternatives}"))
            continue
        for n, v in enumerate(row):
            if not (lo - SUM_TOL <= v <= hi + SUM_TOL):
                out.append(Violation(f"{name}-range", j, n, float(v),
                                     f"{v!r} outside [{lo}, {hi}]"))
    return out


def validate_scenario(s):
    """Check every scenario invariant; violations are data, not failures.

    Returns a ValidationReport listing each broken rule with group and
    alternative indices (0-based internally) and the offending value.
    """
    v = []
    if s.n_groups < 1:
        v.append(Violation("n_groups", None, None, s.n_groups, "must be >= 1"))
    if s.n_alternatives < 1:
        v.append(Violation("n_alternatives", None, None, s.n_alternatives, "must be >= 1"))
    if not v:
        for name, rows in (("f", s.utility_factors), ("q0", s.initial_attractions)):
            if len(rows) != s.n_groups:
                v.append(Violation(f"{name}-shape", None, None, float(len(rows)),
                                   f"{len(rows)} rows, expected {s.n_groups}"))
        if len(s.herding) != s.n_groups:
            v.append(Violation("eps-shape", None, None, float(len(s.herding)),
                               f"{len(s.herding)} entries, expected {s.n_groups}"))
        if len(s.memory_kinds) != s.n_groups:
            v.append(Violation("memory-shape", None, None, float(len(s.memory_kinds)),
                               f"{len(s.memory_kinds)} entries, expected {s.n_groups}"))
    if v:
        return ValidationReport(tuple(v))

    v += _entry_violations("f", s.utility_factors, 0.0, 1.0, s.n_groups, s.n_alternatives)
    for j in range(s.n_groups):
        row_f = s.utility_factors[j]
        row_q = s.initial_attractions[j]
        if len(row_f) == s.n_alternatives:
            sf = math.fsum(row_f)
            if abs(sf - 1.0) > SUM_TOL:
                v.append(Violation("f-normalization", j, None, sf,
                                   f"row sums to {sf!r}, expected 1"))
        if len(row_q) != s.n_alternatives:
            v.append(Violation("q0-shape", j, None, float(len(row_q)),
                               f"row has {len(row_q)} entries, expected {s.n_alternatives}"))
            continue
        sq = math.fsum(row_q)
        if abs(sq) > SUM_TOL:
            v.append(Violation("q0-zero-sum", j, None, sq,
                               f"row sums to {sq!r}, expected 0"))
        if len(row_f) == s.n_alternatives:
            for n in range(s.n_alternatives):
                q, f = row_q[n], row_f[n]
                if q < -f - SUM_TOL or q > 1.0 - f + SUM_TOL:
                    v.append(Violation("q0-bound", j, n, q,
                                       f"q0={q!r} outside [-f, 1-f] = [{-f}, {1 - f}]"))
    for j, e in enumerate(s.herding):
        if not (0.0 <= e <= 1.0):
            v.append(Violation("eps-range", j, None, e, f"{e!r} outside [0, 1]"))
        if s.n_groups == 1 and e != 0.0:
            v.append(Violation("eps-single-group", j, None, e,
                               "herding needs at least two groups; eps must be 0"))
    for j, k in enumerate(s.memory_kinds):
        if not isinstance(k, MemoryKind):
            v.append(Violation("memory-kind", j, None, float("nan"),
                               f"{k!r} is not a MemoryKind"))
    # J=0 is the memoryless limit (attractions never decay) and must run
    if not (s.coupling >= 0.0 and math.isfinite(s.coupling)):
        v.append(Violation("coupling", None, None, s.coupling, "J must be a non-negative real"))
    if not (s.tau > 0.0 and math.isfinite(s.tau)):
        v.append(Violation("tau", None, None, s.tau, "tau must be a positive real"))
    return ValidationReport(tuple(v))


def require_valid(s):
    report = validate_scenario(s)
    if not report.ok:
        raise ScenarioError(report)
    return s


def initial_state(s):
    """Initial probabilities f + q0 with zero memory at t=0.

    Rejects invalid scenarios with the validation report attached.
    """
    require_valid(s)
    p = s.f + s.q0
    return StateVector(probabilities=p, long_memory_acc=np.zeros(s.n_groups), time=0.0)


def luce_utility_factors(u):
    """Ratio-choice probabilities: prior weighted by exp(belief * utility).

    The exponent is max-shifted before exponentiation so large belief or
    utility values cannot overflow. Output sums to 1.
    """
    prior = np.asarray(u.prior, dtype=float)
    util = np.asarray(u.utilities, dtype=float)
    if prior.shape != util.shape or prior.ndim != 1:
        raise ValueError("prior and utilities must be equal-length vectors")
    if np.any(prior < 0):
        raise ValueError("prior entries must be non-negative")
    if np.all(prior == 0):
        raise ValueError("all prior entries are zero: distribution undefined")
    if abs(prior.sum() - 1.0) > 1e-6:
        raise ValueError(f"prior must sum to 1, got {prior.sum()!r}")
    if not (math.isfinite(u.belief) and u.belief >= 0):
        raise ValueError("belief must be a finite non-negative real")
    z = u.belief * util
    z = z - z.max()
    w = prior * np.exp(z)
    total = w.sum()
    if total <= 0:
        raise ValueError("all weights vanished: distribution undefined")
    return w / total


def uniform_attractions(n_alternatives, favored=0, magnitude=DEFAULT_ATTRACTION_MAGNITUDE):
    """Zero-sum attraction row: +magnitude on one alternative, spread negative elsewhere."""
    if n_alternatives < 2:
        raise ValueError("need at least two alternatives")
    q = [-magnitude / (n_alternatives - 1)] * n_alternatives
    q[favored] = magnitude
    return tuple(q)


def binary_scenario(f1, f2, q1, q2, eps1, eps2, *, memory=("long", "short"),
                    coupling=1.0, tau=0.1):
    """Two groups, two alternatives; scalars name alternative-1 values.

    The second alternative is the complement (f -> 1-f, q -> -q), so the
    scalar shorthand fully determines both rows.
    """
    return Scenario(
        n_groups=2,
        n_alternatives=2,
        utility_factors=((f1, 1.0 - f1), (f2, 1.0 - f2)),
        initial_attractions=((q1, -q1), (q2, -q2)),
        herding=(eps1, eps2),
        memory_kinds=tuple(MemoryKind.from_text(m) for m in memory),
        coupling=coupling,
        tau=tau,
    )


_SCALARS = {"n_groups", "n_alternatives", "J", "tau"}
_INDEXED = {"f": 2, "q0": 2, "eps": 1, "memory": 1}


def parse_scenario_text(text, *, key_prefix=""):
    """Parse the flat key-value scenario format into a Scenario.

    Recognized keys: n_groups, n_alternatives, f[j][n], q0[j][n], eps[j],
    memory[j] (long|short), J, tau. Indices are 1-based. Unknown keys are
    rejected with their line number; missing entries are reported by key.
    """
    entries = parse_kv_text(text)
    return scenario_from_entries(entries, key_prefix=key_prefix)


def scenario_from_entries(entries, *, key_prefix=""):
    scalars = {}
    indexed = {name: {} for name in _INDEXED}
    for lineno, name, idx, value in entries:
        if key_prefix:
            if not name.startswith(key_prefix):
                raise FormatError(lineno, f"unknown key {name!r}")
            name = name[len(key_prefix):]
        if name in _SCALARS:
            if idx:
                raise FormatError(lineno, f"{name} takes no indices")
            if name in scalars:
                raise FormatError(lineno, f"duplicate key {name}")
            if name in ("n_groups", "n_alternatives"):
                scalars[name] = parse_int(lineno, name, value)
            else:
                scalars[name] = parse_float(lineno, name, value)
        elif name in _INDEXED:
            want = _INDEXED[name]
            if len(idx) != want:
                raise FormatError(lineno, f"{name} needs {want} bracket index(es)")
            if any(i < 1 for i in idx):
                raise FormatError(lineno, f"{name}: indices are 1-based")
            if idx in indexed[name]:
                raise FormatError(lineno, f"duplicate key {name}{list(idx)}")
            if name == "memory":
                try:
                    indexed[name][idx] = MemoryKind.from_text(value)
                except ValueError as e:
                    raise FormatError(lineno, str(e)) from None
            else:
                indexed[name][idx] = parse_float(lineno, name, value)
        else:
            raise FormatError(lineno, f"unknown key {name!r}")

    for req in ("n_groups", "n_alternatives"):
        if req not in scalars:
            raise FormatError(0, f"missing required key {req}")
    ng, na = scalars["n_groups"], scalars["n_alternatives"]
    if ng < 1 or na < 1:
        raise FormatError(0, "n_groups and n_alternatives must be positive")

    def matrix(name):
        rows = []
        for j in range(1, ng + 1):
            row = []
            for n in range(1, na + 1):
                if (j, n) not in indexed[name]:
                    raise FormatError(0, f"missing key {name}[{j}][{n}]")
                row.append(indexed[name][(j, n)])
            rows.append(tuple(row))
        return tuple(rows)

    def vector(name):
        out = []
        for j in range(1, ng + 1):
            if (j,) not in indexed[name]:
                raise FormatError(0, f"missing key {name}[{j}]")
            out.append(indexed[name][(j,)])
        return tuple(out)

    for name in _INDEXED:
        want_max = (ng, na) if _INDEXED[name] == 2 else (ng,)
        for idx in indexed[name]:
            if any(i > m for i, m in zip(idx, want_max)):
                raise FormatError(0, f"key {name}{list(idx)} outside declared dimensions")

    return Scenario(
        n_groups=ng,
        n_alternatives=na,
        utility_factors=matrix("f"),
        initial_attractions=matrix("q0"),
        herding=vector("eps"),
        memory_kinds=vector("memory"),
        coupling=scalars.get("J", 1.0),
        tau=scalars.get("tau", 0.1),
    )


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())
