#!/usr/bin/env python3
"""Convergence traces P_ij(n), Q_ij(n) from a ``brlab stats`` file."""

import argparse
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_traces(stats_path, cells, out="traces.png", dpi=150):
    with open(stats_path) as fh:
        stats = json.load(fh)
    trace = stats.get("trace")
    if not trace:
        raise ValueError(f"{stats_path} has no convergence trace")
    ns = [rec["n"] for rec in trace]

    fig, axes = plt.subplots(1, len(cells), figsize=(4.8 * len(cells), 3.4),
                             squeeze=False)
    for ax, (i, j) in zip(axes[0], cells):
        ps = [rec["P"][i - 1][j - 1] for rec in trace]
        qs = [rec["Q"][i - 1][j - 1] for rec in trace]
        ax.plot(ns, ps, "-", color="#d62728", label=f"$P_{{{i}{j}}}(n)$")
        ax.plot(ns, qs, "-", color="#1f77b4", label=f"$Q_{{{i}{j}}}(n)$")
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_ylim(0.0, None)
        ax.legend(fontsize=8)
        ax.set_title(f"cell ({i},{j})")
    fig.tight_layout()
    fig.savefig(out, dpi=dpi)
    return fig


def parse_cells(text):
    cells = []
    for tok in text.split(","):
        tok = tok.strip()
        if len(tok) != 2 or not tok.isdigit():
            raise ValueError(f"bad cell {tok!r}; expected two digits like 21")
        cells.append((int(tok[0]), int(tok[1])))
    return cells


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--stats", required=True, help="stats.json from brlab stats")
    ap.add_argument("--cells", default="21,32", help="cells like 21,32")
    ap.add_argument("--out", default="traces.png")
    ap.add_argument("--dpi", type=int, default=150)
    args = ap.parse_args(argv)
    plot_traces(args.stats, parse_cells(args.cells), args.out, args.dpi)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
