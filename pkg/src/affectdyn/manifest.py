"""Experiment manifests: scenario, run configuration, expected outcomes.

Manifest files use the same flat key-value format as scenario files, with
the scenario embedded under the ``scenario.`` prefix. Formal key list:

  name = <word>                          experiment name (output file stem)
  engines = both | dis | con | none      which engines to run (default both)
  discrete.horizon = <int>               map steps (default 2000)
  discrete.stride = <int>                record every k-th step (default 1)
  continuous.horizon = <float>           integration span (default 200)
  continuous.step = <float>              RK4 step (default: scenario tau)
  continuous.stride = <int>              record every k-th step (default 1)
  scenario.<key>                         scenario file keys, same grammar
  expected.tolerance = <float>           default absolute tolerance (0.005)
  expected.lyapunov_min = <float>        growth-rate floor for chaotic runs
  expected.fixed_point.<chan> = <float>  stationary-point component
  expected.<eng>.<chan>.<field> = ...    per-channel claims

with <eng> one of dis|con, <chan> ``p<j>`` (group j, alternative 1) or
``p<j>a<n>``, and <field> one of: terminal, verdict, center, center_tol,
min_oscillations, max_oscillations, onset_min, onset_max, period.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .analysis import (Verdict, classify, lyapunov_estimate, oscillation_count,
                       oscillation_onset, solve_fixed_point)
from .continuous import ContinuousRunConfig, run_continuous
from .discrete import DiscreteRunConfig, run_discrete
from .kvformat import FormatError, parse_float, parse_int, parse_kv_text
from .scenario import require_valid, scenario_from_entries

_CHANNEL = re.compile(r"^p(\d+)(?:a(\d+))?$")

_ENGINE_TOKENS = {
    "dis": "discrete", "discrete": "discrete",
    "con": "continuous", "continuous": "continuous",
}

_CHANNEL_FLOAT_FIELDS = {"terminal", "center", "center_tol", "period"}
_CHANNEL_INT_FIELDS = {"min_oscillations", "max_oscillations",
                       "onset_min", "onset_max"}


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelExpectation:
    engine: str
    group: int
    alternative: int
    terminal: float | None = None
    verdict: Verdict | None = None
    center: float | None = None
    center_tol: float | None = None
    min_oscillations: int | None = None
    max_oscillations: int | None = None
    onset_min: int | None = None
    onset_max: int | None = None
    period: float | None = None

    def label(self):
        eng = "dis" if self.engine == "discrete" else "con"
        chan = f"p{self.group + 1}"
        if self.alternative:
            chan += f"a{self.alternative + 1}"
        return f"{eng} {chan}"


@dataclass(frozen=True)
class ExpectationBlock:
    tolerance: float = 0.005
    lyapunov_min: float | None = None
    channels: tuple = ()
    fixed_point: tuple = ()  # ((group, alternative, value), ...)


@dataclass(frozen=True)
class ExperimentManifest:
    name: str
    scenario: object
    engines: frozenset
    discrete_config: DiscreteRunConfig
    continuous_config: ContinuousRunConfig
    expected: ExpectationBlock | None = None


@dataclass(frozen=True)
class ExpectationOutcome:
    label: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.label}: {self.detail}"


@dataclass(frozen=True)
class ExperimentResult:
    manifest: ExperimentManifest
    trajectories: dict
    classifications: dict
    lyapunov: float | None
    fixed_point: object
    outcomes: tuple

    @property
    def all_passed(self):
        return all(o.passed for o in self.outcomes)

    def report_lines(self):
        return [o.line() for o in self.outcomes]


def _parse_channel(lineno, token):
    m = _CHANNEL.match(token)
    if m is None:
        raise FormatError(lineno, f"bad channel {token!r} (want p<j> or p<j>a<n>)")
    group = int(m.group(1)) - 1
    alt = int(m.group(2)) - 1 if m.group(2) else 0
    if group < 0 or alt < 0:
        raise FormatError(lineno, f"channel indices in {token!r} are 1-based")
    return group, alt


def _parse_engines(lineno, value):
    tokens = [t.strip() for t in value.split(",") if t.strip()]
    if tokens == ["none"]:
        return frozenset()
    if tokens == ["both"]:
        return frozenset({"discrete", "continuous"})
    out = set()
    for t in tokens:
        if t not in _ENGINE_TOKENS:
            raise FormatError(lineno, f"unknown engine {t!r}")
        out.add(_ENGINE_TOKENS[t])
    if not out:
        raise FormatError(lineno, "engines needs a value (both, dis, con, none)")
    return frozenset(out)


def parse_manifest_text(text, *, default_name="experiment"):
    entries = parse_kv_text(text)
    scenario_entries = []
    name = default_name
    engines = frozenset({"discrete", "continuous"})
    dis_kw = {}
    con_kw = {}
    tolerance = 0.005
    lyap_min = None
    chan_fields = {}  # (engine, group, alt) -> {field: value}
    fixed = {}

    for lineno, key, idx, value in entries:
        if key.startswith("scenario."):
            scenario_entries.append((lineno, key, idx, value))
            continue
        if idx:
            raise FormatError(lineno, f"{key} takes no bracket indices")
        parts = key.split(".")
        if key == "name":
            name = value
            if not re.fullmatch(r"[A-Za-z0-9._-]+", name):
                raise FormatError(lineno, f"name {value!r} is not a safe file stem")
        elif key == "engines":
            engines = _parse_engines(lineno, value)
        elif key == "discrete.horizon":
            dis_kw["horizon"] = parse_int(lineno, key, value)
        elif key == "discrete.stride":
            dis_kw["record_stride"] = parse_int(lineno, key, value)
        elif key == "continuous.horizon":
            con_kw["horizon"] = parse_float(lineno, key, value)
        elif key == "continuous.step":
            con_kw["step"] = parse_float(lineno, key, value)
        elif key == "continuous.stride":
            con_kw["record_stride"] = parse_int(lineno, key, value)
        elif key == "expected.tolerance":
            tolerance = parse_float(lineno, key, value)
            if not tolerance > 0:
                raise FormatError(lineno, "expected.tolerance must be positive")
        elif key == "expected.lyapunov_min":
            lyap_min = parse_float(lineno, key, value)
        elif len(parts) == 3 and parts[0] == "expected" and parts[1] == "fixed_point":
            group, alt = _parse_channel(lineno, parts[2])
            v = parse_float(lineno, key, value)
            if not 0.0 <= v <= 1.0:
                raise FormatError(lineno, f"{key}: expected fixed point outside [0, 1]")
            if (group, alt) in fixed:
                raise FormatError(lineno, f"duplicate key {key}")
            fixed[(group, alt)] = v
        elif len(parts) == 4 and parts[0] == "expected" and parts[1] in _ENGINE_TOKENS:
            engine = _ENGINE_TOKENS[parts[1]]
            group, alt = _parse_channel(lineno, parts[2])
            fld = parts[3]
            slot = chan_fields.setdefault((engine, group, alt), {})
            if fld in slot:
                raise FormatError(lineno, f"duplicate key {key}")
            if fld in _CHANNEL_FLOAT_FIELDS:
                slot[fld] = parse_float(lineno, key, value)
            elif fld in _CHANNEL_INT_FIELDS:
                slot[fld] = parse_int(lineno, key, value)
            elif fld == "verdict":
                try:
                    slot[fld] = Verdict(value)
                except ValueError:
                    names = ", ".join(v.value for v in Verdict)
                    raise FormatError(
                        lineno, f"unknown verdict {value!r} (want one of {names})"
                    ) from None
            else:
                raise FormatError(lineno, f"unknown expectation field {fld!r}")
        else:
            raise FormatError(lineno, f"unknown key {key!r}")

    if not scenario_entries:
        raise FormatError(0, "missing scenario.* block")
    scenario = scenario_from_entries(scenario_entries, key_prefix="scenario.")
    require_valid(scenario)

    for (group, alt) in list(fixed) + [k[1:] for k in chan_fields]:
        if group >= scenario.n_groups or alt >= scenario.n_alternatives:
            raise FormatError(
                0, f"expectation channel p{group + 1}a{alt + 1} outside the scenario")

    channels = tuple(
        ChannelExpectation(engine=eng, group=g, alternative=a, **flds)
        for (eng, g, a), flds in sorted(chan_fields.items()))
    expected = None
    if channels or fixed or lyap_min is not None:
        expected = ExpectationBlock(
            tolerance=tolerance,
            lyapunov_min=lyap_min,
            channels=channels,
            fixed_point=tuple((g, a, v) for (g, a), v in sorted(fixed.items())),
        )
    return ExperimentManifest(
        name=name,
        scenario=scenario,
        engines=engines,
        discrete_config=DiscreteRunConfig(**dis_kw),
        continuous_config=ContinuousRunConfig(**con_kw),
        expected=expected,
    )


def load_manifest(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ManifestError(f"cannot read manifest {path}: {e}") from e
    stem = re.sub(r"\.[^.]*$", "", str(path).replace("\\", "/").rsplit("/", 1)[-1])
    return parse_manifest_text(text, default_name=stem or "experiment")


def _needs_lyapunov(manifest, dis_classes):
    if manifest.expected is not None:
        if manifest.expected.lyapunov_min is not None:
            return True
        for ch in manifest.expected.channels:
            if ch.engine == "discrete" and ch.verdict is Verdict.CHAOTIC:
                return True
    if dis_classes is not None:
        return any(c.verdict is Verdict.NON_CONVERGENT for c in dis_classes.values())
    return False


def _close(observed, want, tol):
    return abs(observed - want) <= tol


def run_manifest(source, *, engines=None):
    """Run a manifest's engines, classify, and evaluate its expectations.

    ``source`` is a path or an already-parsed ExperimentManifest;
    ``engines`` overrides the manifest's engine set. Expectations against
    an engine that did not run fail rather than silently skip.
    """
    manifest = source if isinstance(source, ExperimentManifest) else load_manifest(source)
    selected = frozenset(engines) if engines is not None else manifest.engines
    if not selected:
        raise ManifestError(f"manifest {manifest.name!r}: nothing to run, engine set is empty")
    unknown = selected - {"discrete", "continuous"}
    if unknown:
        raise ManifestError(f"unknown engines {sorted(unknown)!r}")

    trajectories = {}
    if "discrete" in selected:
        trajectories["discrete"] = run_discrete(manifest.scenario, manifest.discrete_config)
    if "continuous" in selected:
        trajectories["continuous"] = run_continuous(manifest.scenario, manifest.continuous_config)

    classifications = {}
    for eng, traj in trajectories.items():
        classifications[eng] = classify(traj) if traj.n_records >= 100 else None

    lyap = None
    if "discrete" in trajectories and _needs_lyapunov(manifest, classifications.get("discrete")):
        lyap = lyapunov_estimate(manifest.scenario)
        if classifications.get("discrete") is not None:
            classifications["discrete"] = classify(trajectories["discrete"], lyapunov=lyap)

    fixed_report = None
    if manifest.expected is not None and manifest.expected.fixed_point:
        fixed_report = solve_fixed_point(manifest.scenario)

    outcomes = []
    if manifest.expected is not None:
        outcomes = _evaluate(manifest, trajectories, classifications, lyap, fixed_report)

    return ExperimentResult(
        manifest=manifest,
        trajectories=trajectories,
        classifications=classifications,
        lyapunov=lyap,
        fixed_point=fixed_report,
        outcomes=tuple(outcomes),
    )


def _evaluate(manifest, trajectories, classifications, lyap, fixed_report):
    exp = manifest.expected
    tol = exp.tolerance
    out = []

    def add(label, passed, detail):
        out.append(ExpectationOutcome(label=label, passed=passed, detail=detail))

    for ch in exp.channels:
        label = ch.label()
        traj = trajectories.get(ch.engine)
        if traj is None:
            add(label, False, f"{ch.engine} engine not run")
            continue
        x = traj.channel(ch.group, ch.alternative)
        classes = classifications.get(ch.engine)
        cls = classes.get((ch.group, ch.alternative)) if classes else None

        if ch.terminal is not None:
            got = float(x[-1])
            add(f"{label} terminal", _close(got, ch.terminal, tol),
                f"want {ch.terminal:.4g} +- {tol:.4g}, got {got:.6g}")
        if ch.verdict is not None:
            if cls is None:
                add(f"{label} verdict", False, "too few records to classify")
            else:
                add(f"{label} verdict", cls.verdict is ch.verdict,
                    f"want {ch.verdict.value}, got {cls.verdict.value}")
        if ch.center is not None:
            ctol = ch.center_tol if ch.center_tol is not None else tol
            if cls is None:
                add(f"{label} center", False, "too few records to classify")
            else:
                add(f"{label} center", _close(cls.center, ch.center, ctol),
                    f"want {ch.center:.4g} +- {ctol:.4g}, got {cls.center:.6g}")
        if ch.period is not None:
            dt = traj.step * traj.record_stride
            if cls is None or cls.dominant_period is None:
                add(f"{label} period", False, "no dominant period found")
            else:
                add(f"{label} period",
                    abs(cls.dominant_period - ch.period) <= 0.5 * dt,
                    f"want {ch.period:.4g}, got {cls.dominant_period:.4g}")
        if ch.min_oscillations is not None or ch.max_oscillations is not None:
            n = oscillation_count(x)
            if ch.min_oscillations is not None:
                add(f"{label} oscillations", n >= ch.min_oscillations,
                    f"want >= {ch.min_oscillations}, got {n}")
            if ch.max_oscillations is not None:
                add(f"{label} monotone approach", n <= ch.max_oscillations,
                    f"want <= {ch.max_oscillations} crossings, got {n}")
        if ch.onset_min is not None or ch.onset_max is not None:
            k = oscillation_onset(x)
            lo = ch.onset_min if ch.onset_min is not None else 0
            hi = ch.onset_max if ch.onset_max is not None else len(x)
            add(f"{label} oscillation onset", lo <= k <= hi,
                f"want onset in [{lo}, {hi}], got step {k}")

    if exp.lyapunov_min is not None:
        if lyap is None:
            add("lyapunov", False, "no discrete run to estimate from")
        else:
            add("lyapunov", lyap >= exp.lyapunov_min,
                f"want >= {exp.lyapunov_min:.4g}, got {lyap:.4g}")

    for group, alt, want in exp.fixed_point:
        chan = f"p{group + 1}" + (f"a{alt + 1}" if alt else "")
        got = float(fixed_report.p_star[group, alt])
        ok = fixed_report.converged and _close(got, want, tol)
        add(f"fixed point {chan}", ok,
            f"want {want:.4g} +- {tol:.4g}, got {got:.6g}"
            + ("" if fixed_report.converged else " (solver did not converge)"))

    return out
