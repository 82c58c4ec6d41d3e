"""Bundled reproduction suite: one manifest per published panel set."""

from __future__ import annotations

from importlib import resources

from .manifest import load_manifest, parse_manifest_text, run_manifest
from .outputs import emit_csv, emit_plot

# 11 figures; three of them carry a second panel pair with its own
# herding parameters, hence 14 manifests
FIGURE_NAMES = (
    "fig1", "fig2", "fig3", "fig4", "fig5",
    "fig6ab", "fig6cd", "fig7ab", "fig7cd",
    "fig8", "fig9", "fig10", "fig11ab", "fig11cd",
)


def bundled_manifest_text(name):
    if name not in FIGURE_NAMES:
        raise KeyError(f"no bundled manifest {name!r}; have {', '.join(FIGURE_NAMES)}")
    ref = resources.files(__package__) / "manifests" / f"{name}.txt"
    return ref.read_text(encoding="utf-8")


def load_bundled_manifest(name):
    return parse_manifest_text(bundled_manifest_text(name), default_name=name)


def reproduce_figures(out_dir=None, names=None, *, echo=print):
    """Run the bundled manifests, write artifacts, report expectations.

    Returns True when every expectation of every manifest passed. With an
    out_dir, each manifest writes <name>.csv and <name>.svg there.
    """
    import os

    selected = tuple(names) if names else FIGURE_NAMES
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    all_ok = True
    for name in selected:
        result = run_manifest(load_bundled_manifest(name))
        if out_dir is not None:
            emit_csv(result, os.path.join(out_dir, f"{name}.csv"))
            emit_plot(result, os.path.join(out_dir, f"{name}.svg"))
        ok = result.all_passed
        all_ok &= ok
        echo(f"== {name}: {'ok' if ok else 'FAILED'}")
        for line in result.report_lines():
            echo("   " + line)
    return all_ok
