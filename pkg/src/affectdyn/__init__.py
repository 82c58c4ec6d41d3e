"""Coupled-group choice dynamics with memory-decaying attraction.

Two engines advance the same model: a discrete map stepping group choice
probabilities at unit times, and a continuous RK4 flow relaxing toward
the map's target. An analysis layer finds stationary states, classifies
attractors, estimates the largest Lyapunov exponent, and measures where
the engines diverge. The experiment layer runs manifests with expected
outcomes and emits CSV/SVG artifacts.
"""

from .analysis import (AttractorClassification, ChannelDivergence,
                       ClassifierTolerances, DivergenceReport, FixedPointReport,
                       Verdict, classify, classify_series, compare_runs,
                       lyapunov_estimate, oscillation_count, oscillation_onset,
                       solve_fixed_point)
from .continuous import ContinuousRunConfig, rhs, run_continuous
from .discrete import DiscreteRunConfig, EngineError, run_discrete, step_discrete
from .figures import FIGURE_NAMES, load_bundled_manifest, reproduce_figures
from .kvformat import FormatError
from .manifest import (ChannelExpectation, ExpectationBlock, ExperimentManifest,
                       ExperimentResult, ManifestError, load_manifest,
                       parse_manifest_text, run_manifest)
from .memory import (MemoryModel, attraction, kl_gain, memory_continuous_long,
                     memory_continuous_short, memory_discrete)
from .outputs import OutputError, emit_csv, emit_plot, read_series_csv
from .scenario import (MemoryKind, Scenario, ScenarioError, StateVector,
                       UtilitySpec, ValidationReport, binary_scenario,
                       initial_state, load_scenario, luce_utility_factors,
                       parse_scenario_text, uniform_attractions,
                       validate_scenario)
from .trajectory import GridError, Trajectory

__version__ = "0.1.0"

__all__ = [
    "AttractorClassification", "ChannelDivergence", "ChannelExpectation",
    "ClassifierTolerances", "ContinuousRunConfig", "DiscreteRunConfig",
    "DivergenceReport", "EngineError", "ExpectationBlock", "ExperimentManifest",
    "ExperimentResult", "FIGURE_NAMES", "FixedPointReport", "FormatError",
    "GridError", "ManifestError", "MemoryKind", "MemoryModel", "OutputError",
    "Scenario", "ScenarioError", "StateVector", "Trajectory", "UtilitySpec",
    "ValidationReport", "Verdict", "attraction", "binary_scenario", "classify",
    "classify_series", "compare_runs", "emit_csv", "emit_plot", "initial_state",
    "kl_gain", "load_bundled_manifest", "load_manifest", "load_scenario",
    "luce_utility_factors", "lyapunov_estimate", "memory_continuous_long",
    "memory_continuous_short", "memory_discrete", "oscillation_count",
    "oscillation_onset", "parse_manifest_text", "parse_scenario_text",
    "read_series_csv", "reproduce_figures", "rhs", "run_continuous",
    "run_discrete", "run_manifest", "solve_fixed_point", "step_discrete",
    "uniform_attractions", "validate_scenario", "__version__",
]
