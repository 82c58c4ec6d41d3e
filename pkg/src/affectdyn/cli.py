"""Command-line front end."""

from __future__ import annotations

import argparse
import sys

from .analysis import classify_series, lyapunov_estimate, solve_fixed_point
from .figures import FIGURE_NAMES, reproduce_figures
from .kvformat import FormatError
from .manifest import ManifestError, load_manifest, run_manifest
from .outputs import OutputError, emit_csv, emit_plot, read_series_csv
from .scenario import ScenarioError

_ENGINE_CHOICES = {"dis": ("discrete",), "con": ("continuous",),
                   "both": ("discrete", "continuous")}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="affectdyn",
        description="Coupled-group choice dynamics: discrete map and "
                    "continuous flow, with attractor analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one manifest and check its expectations")
    p_run.add_argument("manifest")
    p_run.add_argument("--csv", metavar="PATH", help="write the series as CSV")
    p_run.add_argument("--svg", metavar="PATH", help="write the series plot as SVG")
    p_run.add_argument("--engine", choices=sorted(_ENGINE_CHOICES), default=None,
                       help="override the manifest's engine set")

    p_rep = sub.add_parser("reproduce-figures",
                           help="run the bundled reproduction suite")
    p_rep.add_argument("--out", metavar="DIR", default=None,
                       help="directory for per-figure CSV/SVG artifacts")
    p_rep.add_argument("--only", metavar="NAME", action="append",
                       choices=FIGURE_NAMES, help="restrict to named manifests")

    p_fp = sub.add_parser("fixed-point",
                          help="solve the stationary state of a manifest's scenario")
    p_fp.add_argument("manifest")

    p_cl = sub.add_parser("classify", help="classify the series in an emitted CSV")
    p_cl.add_argument("csv")

    p_ly = sub.add_parser("lyapunov",
                          help="largest Lyapunov exponent of the discrete map")
    p_ly.add_argument("manifest")
    return parser


def _cmd_run(args):
    engines = _ENGINE_CHOICES[args.engine] if args.engine else None
    result = run_manifest(args.manifest, engines=engines)
    s = result.manifest.scenario
    for eng in ("discrete", "continuous"):
        traj = result.trajectories.get(eng)
        if traj is None:
            continue
        classes = result.classifications.get(eng)
        print(f"{eng}: t = {traj.times[-1]:g}")
        for j in range(s.n_groups):
            for n in range(s.n_alternatives):
                line = f"  p{j + 1}a{n + 1} = {traj.probabilities[-1, j, n]:.6g}"
                if classes is not None:
                    c = classes[(j, n)]
                    line += f"  [{c.verdict.value}, center {c.center:.6g}]"
                print(line)
    if result.lyapunov is not None:
        print(f"lyapunov: {result.lyapunov:.6g}")
    if result.fixed_point is not None:
        fp = result.fixed_point
        stars = ", ".join(f"{v:.6g}" for v in fp.p_star[:, 0])
        print(f"fixed point: p* = ({stars})  residual {fp.residual:.3g}"
              f"  {'converged' if fp.converged else 'NOT converged'}")
    if args.csv:
        emit_csv(result, args.csv)
        print(f"wrote {args.csv}")
    if args.svg:
        emit_plot(result, args.svg)
        print(f"wrote {args.svg}")
    for line in result.report_lines():
        print(line)
    return 0 if result.all_passed else 1


def _cmd_reproduce(args):
    ok = reproduce_figures(args.out, args.only)
    return 0 if ok else 1


def _cmd_fixed_point(args):
    manifest = load_manifest(args.manifest)
    report = solve_fixed_point(manifest.scenario)
    s = manifest.scenario
    for j in range(s.n_groups):
        vals = ", ".join(f"{report.p_star[j, n]:.9g}" for n in range(s.n_alternatives))
        print(f"p{j + 1}* = ({vals})")
    print(f"residual = {report.residual:.3g}")
    print(f"iterations = {report.iterations}")
    print("converged" if report.converged else "NOT converged")
    return 0 if report.converged else 1


def _cmd_classify(args):
    times, series = read_series_csv(args.csv)
    if len(times) < 2:
        raise OutputError(f"{args.csv}: need at least two rows")
    dt = float(times[1] - times[0])
    for name, values in series.items():
        algorithm = "discrete" if name.startswith("dis_") else "continuous"
        c = classify_series(values, dt, algorithm)
        print(f"{name}: {c.verdict.value}  center {c.center:.6g}"
              f"  amplitude {c.tail_amplitude:.3g}")
    return 0


def _cmd_lyapunov(args):
    manifest = load_manifest(args.manifest)
    value = lyapunov_estimate(manifest.scenario)
    print(f"{value:.6g}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "reproduce-figures": _cmd_reproduce,
        "fixed-point": _cmd_fixed_point,
        "classify": _cmd_classify,
        "lyapunov": _cmd_lyapunov,
    }
    try:
        return handlers[args.command](args)
    except (FormatError, ManifestError, ScenarioError, OutputError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
