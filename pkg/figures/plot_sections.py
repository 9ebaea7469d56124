#!/usr/bin/env python3
"""Scatter plots of Poincare-section hits, one panel per section surface.

Consumes the CSV written by ``brlab sections`` (with its ``.charts.json``
sidecar for the dashed piece boundaries) and, optionally, a ``brlab
detect-qp`` report whose invariant ellipse is overlaid.  All pieces of one
surface are drawn in a common frame: the barycentric embedding of the moving
strategy vector (q for side-B surfaces, p for side-A), which is where the
three triangular pieces tile a neighbourhood of the equilibrium.
"""

import argparse
import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

EMBED = np.array([[0.0, 1.0, 0.5], [0.0, 0.0, np.sqrt(3.0) / 2.0]])


def embed(vectors: np.ndarray) -> np.ndarray:
    """Map simplex points (n, 3) to the equilateral-triangle plane (n, 2)."""
    return vectors @ EMBED.T


def read_sections_csv(path):
    hits = {"side": None, "pair": None, "piece": [], "p": [], "q": []}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            hits["side"] = row["plane_side"]
            hits["pair"] = row["plane_pair"]
            hits["piece"].append(int(row["piece"]))
            hits["p"].append([float(row[k]) for k in ("p1", "p2", "p3")])
            hits["q"].append([float(row[k]) for k in ("q1", "q2", "q3")])
    hits["piece"] = np.array(hits["piece"], dtype=int)
    hits["p"] = np.array(hits["p"]).reshape(-1, 3)
    hits["q"] = np.array(hits["q"]).reshape(-1, 3)
    return hits


def load_charts(csv_path):
    sidecar = csv_path + ".charts.json"
    if not os.path.exists(sidecar):
        return None
    with open(sidecar) as fh:
        return json.load(fh)


def chart_polygon_ambient(piece_rec):
    origin = np.array(piece_rec["origin"])
    basis = np.array(piece_rec["basis"])
    poly = np.array(piece_rec["polygon"]).reshape(-1, 2)
    return origin[None, :] + poly @ basis


def qp_ellipse_ambient(report, n=256):
    chart = report["chart"]
    origin = np.array(chart["origin"])
    basis = np.array(chart["basis"])
    center = np.array(report["domain"]["center"])
    form = np.array(report["domain"]["form"])
    radius = report["domain"]["radius"]
    evals, evecs = np.linalg.eigh(form)
    s_inv = evecs @ np.diag(evals ** -0.5) @ evecs.T
    theta = np.linspace(0.0, 2.0 * np.pi, n)
    circle = np.vstack([np.cos(theta), np.sin(theta)])
    uv = center[:, None] + radius * (s_inv @ circle)
    return origin[None, :] + uv.T @ basis


def moving_block(side, ambient):
    """The strategy vector that changes direction on this surface."""
    return ambient[:, 3:] if side == "B" else ambient[:, :3]


def plot_sections(csv_paths, qp_path=None, out="sections.png", zoom=None,
                  dpi=150, point_size=0.3):
    qp = None
    if qp_path:
        with open(qp_path) as fh:
            qp = json.load(fh)

    fig, axes = plt.subplots(1, len(csv_paths),
                             figsize=(4.2 * len(csv_paths), 4.2))
    axes = np.atleast_1d(axes)
    colors = {1: "#1f77b4", 2: "#2ca02c", 3: "#9467bd"}

    for ax, path in zip(axes, csv_paths):
        hits = read_sections_csv(path)
        side, pair = hits["side"], hits["pair"]
        moving = hits["q"] if side == "B" else hits["p"]
        pts = embed(moving)
        for piece in (1, 2, 3):
            sel = hits["piece"] == piece
            if np.any(sel):
                ax.plot(pts[sel, 0], pts[sel, 1], ".", ms=point_size,
                        color=colors[piece], rasterized=True)
        charts = load_charts(path)
        if charts:
            for rec in charts["pieces"]:
                if rec["empty"]:
                    continue
                ambient = chart_polygon_ambient(rec)
                tri = embed(moving_block(side, ambient))
                closed = np.vstack([tri, tri[:1]])
                ax.plot(closed[:, 0], closed[:, 1], "k--", lw=0.8)
        if qp is not None and qp["plane"]["side"] == side and \
                f"{qp['plane']['pair'][0]}{qp['plane']['pair'][1]}" == pair \
                and qp["domain"]["kind"] == "disk":
            ell = embed(moving_block(side, qp_ellipse_ambient(qp)))
            ax.plot(ell[:, 0], ell[:, 1], "r-", lw=1.0, label="invariant ellipse")
            ax.legend(loc="upper right", fontsize=7)
        ax.set_title(f"S_{pair} (side {side})")
        ax.set_aspect("equal")
        if zoom:
            ax.set_xlim(zoom[0], zoom[2])
            ax.set_ylim(zoom[1], zoom[3])
        if not len(hits["piece"]):
            ax.annotate("no hits", (0.5, 0.5), xycoords="axes fraction",
                        ha="center", color="red")
    fig.tight_layout()
    fig.savefig(out, dpi=dpi)
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--csv", nargs="+", required=True,
                    help="sections.csv files, one panel each")
    ap.add_argument("--qp", help="qp_report.json with the invariant ellipse")
    ap.add_argument("--out", default="sections.png")
    ap.add_argument("--zoom", help="x0,y0,x1,y1 window in panel coordinates")
    ap.add_argument("--dpi", type=int, default=150)
    ap.add_argument("--point-size", type=float, default=0.3)
    args = ap.parse_args(argv)
    zoom = [float(x) for x in args.zoom.split(",")] if args.zoom else None
    plot_sections(args.csv, args.qp, args.out, zoom, args.dpi, args.point_size)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
