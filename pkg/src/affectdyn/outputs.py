"""Data artifacts: CSV series and SVG plots, byte-deterministic."""

from __future__ import annotations

import numpy as np

from .trajectory import GridError

_SVG_SALT = "affectdyn"


class OutputError(RuntimeError):
    pass


def _fmt(x):
    return f"{x:.9g}"


def _column_plan(result):
    """(engine, group, alt, column-name) tuples in emission order.

    Binary scenarios emit only alternative 1 per group; the second
    alternative is its complement. Wider scenarios emit every alternative.
    """
    s = result.manifest.scenario
    alts = [0] if s.n_alternatives == 2 else list(range(s.n_alternatives))
    plan = []
    for eng, tag in (("discrete", "dis"), ("continuous", "con")):
        if eng not in result.trajectories:
            continue
        for j in range(s.n_groups):
            for n in alts:
                plan.append((eng, j, n, f"{tag}_p{j + 1}_a{n + 1}"))
    return plan


def _grids(result):
    """Row times plus per-engine record indices aligned to those times."""
    trajs = result.trajectories
    if len(trajs) == 1:
        (eng, traj), = trajs.items()
        return traj.times, {eng: np.arange(traj.n_records)}
    dis, con = trajs["discrete"], trajs["continuous"]
    con_idx, con_ints = con.integer_samples()
    dis_ints = np.round(dis.times).astype(int)
    if np.any(np.abs(dis.times - dis_ints) > 1e-9):
        raise GridError("discrete trajectory has non-integer times")
    common, di, ci = np.intersect1d(dis_ints, con_ints, return_indices=True)
    if common.size == 0:
        raise GridError("no shared integer times between the engines")
    return common.astype(float), {"discrete": di, "continuous": con_idx[ci]}


def emit_csv(result, path):
    """Write the recorded series as CSV.

    Header: ``t,<eng>_p<group>_a<alt>,...`` with dis columns before con.
    With both engines present, rows cover the shared integer-time grid
    (the continuous run is sampled where it lands exactly on whole
    times); a single engine keeps its own grid. Floats carry 9
    significant digits; output bytes depend only on the result.
    """
    if not result.trajectories:
        raise OutputError("result holds no trajectories")
    plan = _column_plan(result)
    times, index = _grids(result)
    cols = [result.trajectories[eng].probabilities[index[eng], j, n]
            for eng, j, n, _ in plan]
    lines = ["t," + ",".join(name for _, _, _, name in plan)]
    for r, t in enumerate(times):
        lines.append(",".join([_fmt(t)] + [_fmt(c[r]) for c in cols]))
    payload = "\n".join(lines) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    return path


def read_series_csv(path):
    """Read an emit_csv file back as (times, {column-name: values})."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as e:
        raise OutputError(f"cannot read {path}: {e}") from e
    if not lines:
        raise OutputError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != "t" or len(header) < 2:
        raise OutputError(f"{path}: expected a 't,<series>...' header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise OutputError(f"{path}: ragged row {ln!r}")
        rows.append([float(v) for v in parts])
    if not rows:
        raise OutputError(f"{path}: no data rows")
    data = np.array(rows)
    return data[:, 0], {name: data[:, k] for k, name in enumerate(header) if k}


def emit_plot(result, path):
    """Render the recorded series to SVG, one panel per group.

    Discrete series draw solid, continuous dash-dotted; alternatives
    share a panel. The SVG is scrubbed of timestamps and salted hashes so
    identical results render identical bytes.
    """
    if not result.trajectories:
        raise OutputError("result holds no trajectories")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    s = result.manifest.scenario
    alts = [0] if s.n_alternatives == 2 else list(range(s.n_alternatives))
    styles = {"discrete": ("solid", "dis"), "continuous": ("dashdot", "con")}

    with plt.rc_context({"svg.hashsalt": _SVG_SALT, "svg.fonttype": "none"}):
        fig, axes = plt.subplots(
            1, s.n_groups, figsize=(4.6 * s.n_groups, 3.4),
            sharex=True, squeeze=False)
        for j in range(s.n_groups):
            ax = axes[0][j]
            for eng in ("discrete", "continuous"):
                traj = result.trajectories.get(eng)
                if traj is None:
                    continue
                style, tag = styles[eng]
                for n in alts:
                    lbl = tag if len(alts) == 1 else f"{tag} a{n + 1}"
                    ax.plot(traj.times, traj.channel(j, n),
                            linestyle=style, color=f"C{n}", label=lbl,
                            linewidth=1.2)
            ax.set_xlabel("t")
            ax.set_ylabel(f"p{j + 1}")
            ax.set_ylim(-0.02, 1.02)
            ax.legend(loc="best", fontsize=8)
        fig.suptitle(result.manifest.name)
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise OutputError(f"cannot write {path}: {e}") from e
        finally:
            plt.close(fig)
    return path
