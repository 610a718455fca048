"""CSV, gnuplot and PNG writers for scenario tables."""

from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np

from . import __version__
from .scenarios import Scenario, Table


def format_value(x: float) -> str:
    # shortest repr that round-trips
    return repr(float(x))


def csv_text(s: Scenario, table: Table) -> str:
    buf = io.StringIO()
    buf.write(f"# thinspec {__version__}\n")
    for key, value in s.items():
        buf.write(f"# {key} = {value!r}\n")
    for line in table.summary:
        buf.write(f"# summary: {line}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.data:
        buf.write(",".join(format_value(v) for v in row) + "\n")
    return buf.getvalue()


def gnuplot_text(stem: str, table: Table) -> str:
    lines = [
        f"# gnuplot script for {stem}.csv",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set xlabel '{table.x_label}'",
        f"set ylabel '{table.y_label}'",
        "set terminal pngcairo size 900,600",
        f"set output '{stem}_gnuplot.png'",
    ]
    if table.kind == "grid":
        n = len(table.columns) - 2
        lines.append("set size ratio -1")
        lines.append("set view map")
        lines.append(f"set multiplot layout 1,{n}")
        for k in range(n):
            lines.append(f"set title '{table.columns[k + 2]}'")
            lines.append(f"plot '{stem}.csv' using 1:2:{k + 3} with image notitle")
        lines.append("unset multiplot")
    else:
        first = 3 if len(table.columns) > 1 and table.columns[1] == "t_s" else 2
        parts = [f"'{stem}.csv' using 1:{k + 1} with lines" for k in range(first - 1, len(table.columns))]
        lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def render_png(path: Path, table: Table) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if table.kind == "grid":
        n = len(table.columns) - 2
        side = int(round(np.sqrt(table.data.shape[0])))
        fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.4), squeeze=False)
        re = table.data[:, 0].reshape(side, side)
        im = table.data[:, 1].reshape(side, side)
        for k, ax in enumerate(axes[0]):
            q = table.data[:, k + 2].reshape(side, side)
            ax.contourf(re, im, q, levels=20, cmap="viridis")
            ax.set_aspect("equal")
            ax.set_title(table.columns[k + 2], fontsize=8)
            ax.set_xlabel(table.x_label)
        axes[0][0].set_ylabel(table.y_label)
    else:
        fig, ax = plt.subplots(figsize=(6, 4))
        start = 2 if len(table.columns) > 1 and table.columns[1] == "t_s" else 1
        for k in range(start, len(table.columns)):
            ax.plot(table.data[:, 0], table.data[:, k], label=table.columns[k], lw=1.2)
        ax.set_xlabel(table.x_label)
        ax.set_ylabel(table.y_label)
        ax.legend(fontsize=8)
    fig.tight_layout()
    # no timestamp or version in the PNG so repeated runs are byte-identical
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def write_outputs(s: Scenario, table: Table, out_dir: str | os.PathLike, png: bool = True) -> list[Path]:
    out_dir = Path(out_dir)
    stem = s.output or s.name
    base = out_dir / stem
    base.parent.mkdir(parents=True, exist_ok=True)
    name = base.name
    paths = [base.parent / f"{name}.csv", base.parent / f"{name}.gp"]
    paths[0].write_text(csv_text(s, table))
    paths[1].write_text(gnuplot_text(name, table))
    if png:
        paths.append(base.parent / f"{name}.png")
        render_png(paths[2], table)
    return paths
