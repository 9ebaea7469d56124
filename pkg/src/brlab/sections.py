"""Poincare sections: flat charts on the indifference surfaces and orbit hits.

A surface S (side "B", pair {l, l'}) intersected with a Hamiltonian level set
consists of three flat convex pieces, one per best-response value k of the
other player; on side "A" the roles are swapped.  Each piece carries an
orthonormal 2D chart; its polygon is found by enumerating pairs of active
inequality constraints inside the 2D affine hull of the defining equalities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import CrossingPlane, Orbit
from .game import GameSystem

__all__ = [
    "SectionChart",
    "SectionHit",
    "build_section_charts",
    "chart_coords",
    "chart_point",
    "clip_polygon",
    "polygon_area",
    "polygon_contains",
    "section_hits",
]


@dataclass(frozen=True)
class SectionChart:
    """Orthonormal affine chart on one flat piece of a section surface.

    ``piece`` is the constant best-response index on the piece: the row k
    (value of BR_A) for side-B planes, the column l for side-A planes.
    ``polygon`` is the piece boundary in chart coordinates, counterclockwise.
    """

    plane: CrossingPlane
    piece: int
    level: float
    origin: np.ndarray
    basis: np.ndarray
    polygon: np.ndarray

    @property
    def is_empty(self) -> bool:
        return len(self.polygon) < 3


def chart_coords(chart: SectionChart, x) -> np.ndarray:
    return chart.basis @ (np.asarray(x, dtype=float) - chart.origin)


def chart_point(chart: SectionChart, uv) -> np.ndarray:
    return chart.origin + chart.basis.T @ np.asarray(uv, dtype=float)


def _piece_constraints(sys: GameSystem, plane: CrossingPlane, piece: int,
                       level: float):
    """Equalities (E x = c) and inequalities (G x >= h) of one piece."""
    m = sys.m
    i, j = plane.pair
    rows_e, rhs_e = [], []
    rows_g, rhs_g = [], []

    def pm_functional(col):
        a = np.zeros(6)
        a[:3] = m[:, col - 1]
        return a

    def aq_functional(row):
        a = np.zeros(6)
        a[3:] = m[row - 1]
        return a

    rows_e.append(np.concatenate([np.ones(3), np.zeros(3)]))
    rhs_e.append(1.0)
    rows_e.append(np.concatenate([np.zeros(3), np.ones(3)]))
    rhs_e.append(1.0)

    if plane.side == "B":
        k = piece
        rows_e.append(pm_functional(i) - pm_functional(j))
        rhs_e.append(0.0)
        rows_e.append(aq_functional(k) - pm_functional(i))
        rhs_e.append(level)
        other = ({1, 2, 3} - {i, j}).pop()
        rows_g.append(pm_functional(other) - pm_functional(i))
        rhs_g.append(0.0)
        for k2 in range(1, 4):
            if k2 != k:
                rows_g.append(aq_functional(k) - aq_functional(k2))
                rhs_g.append(0.0)
    else:
        l = piece
        rows_e.append(aq_functional(i) - aq_functional(j))
        rhs_e.append(0.0)
        rows_e.append(aq_functional(i) - pm_functional(l))
        rhs_e.append(level)
        other = ({1, 2, 3} - {i, j}).pop()
        rows_g.append(aq_functional(i) - aq_functional(other))
        rhs_g.append(0.0)
        for l2 in range(1, 4):
            if l2 != l:
                rows_g.append(pm_functional(l2) - pm_functional(l))
                rhs_g.append(0.0)

    for idx in range(6):
        g = np.zeros(6)
        g[idx] = 1.0
        rows_g.append(g)
        rhs_g.append(0.0)
    return (np.array(rows_e), np.array(rhs_e),
            np.array(rows_g), np.array(rhs_g))


def _order_ccw(points: np.ndarray) -> np.ndarray:
    centroid = points.mean(axis=0)
    angles = np.arctan2(points[:, 1] - centroid[1], points[:, 0] - centroid[0])
    return points[np.argsort(angles)]


def build_section_charts(sys: GameSystem, plane: CrossingPlane,
                         level: float | None = None) -> list[SectionChart]:
    """Charts of the three pieces of the surface at the game's flow level.

    Pieces with an empty feasible set are returned with an empty polygon
    (reported, not fatal).
    """
    if level is None:
        level = sys.flow_level
    charts = []
    for piece in (1, 2, 3):
        E, ce, G, hg = _piece_constraints(sys, plane, piece, level)
        x0, *_ = np.linalg.lstsq(E, ce, rcond=None)
        _, sv, vt = np.linalg.svd(E)
        null = vt[np.sum(sv > 1e-12 * sv[0]):]
        if null.shape[0] != 2:
            charts.append(SectionChart(plane, piece, level, x0,
                                       np.zeros((2, 6)), np.zeros((0, 2))))
            continue
        # inequalities in provisional chart coordinates u: a u >= b
        A2 = G @ null.T
        b2 = hg - G @ x0
        span = max(1.0, float(np.max(np.abs(b2))))
        tol = 1e-9 * span
        verts = []
        n_ineq = len(A2)
        for r in range(n_ineq):
            for s in range(r + 1, n_ineq):
                mat = np.array([A2[r], A2[s]])
                det = np.linalg.det(mat)
                if abs(det) < 1e-14:
                    continue
                u = np.linalg.solve(mat, np.array([b2[r], b2[s]]))
                if np.all(A2 @ u >= b2 - tol):
                    verts.append(u)
        if len(verts) < 3:
            charts.append(SectionChart(plane, piece, level, x0,
                                       null, np.zeros((0, 2))))
            continue
        verts = np.array(verts)
        # dedupe
        uniq = []
        for v in verts:
            if not any(np.max(np.abs(v - w)) < 10 * tol for w in uniq):
                uniq.append(v)
        poly_u = _order_ccw(np.array(uniq))
        ambient = x0[None, :] + poly_u @ null

        # final chart: centroid origin, Gram-Schmidt basis from two edges
        origin = ambient.mean(axis=0)
        e1 = ambient[1] - ambient[0]
        e1 /= np.linalg.norm(e1)
        e2 = ambient[2] - ambient[1]
        e2 = e2 - (e2 @ e1) * e1
        e2 /= np.linalg.norm(e2)
        basis = np.vstack([e1, e2])
        polygon = (ambient - origin) @ basis.T
        if polygon_area(polygon) < 0:
            polygon = polygon[::-1]
        charts.append(SectionChart(plane, piece, level, origin, basis, polygon))
    return charts


def polygon_area(polygon: np.ndarray) -> float:
    if len(polygon) < 3:
        return 0.0
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_contains(polygon: np.ndarray, uv, tol: float = 1e-9) -> bool:
    """Membership in a convex counterclockwise polygon, with slack."""
    if len(polygon) < 3:
        return False
    uv = np.asarray(uv, dtype=float)
    for a, b in zip(polygon, np.roll(polygon, -1, axis=0)):
        edge = b - a
        rel = uv - a
        if edge[0] * rel[1] - edge[1] * rel[0] < -tol:
            return False
    return True


def clip_polygon(polygon: np.ndarray, normal, offset: float) -> np.ndarray:
    """Clip a convex polygon by the half-plane {u : normal . u >= offset}."""
    if len(polygon) == 0:
        return polygon
    normal = np.asarray(normal, dtype=float)
    vals = polygon @ normal - offset
    out = []
    n = len(polygon)
    for k in range(n):
        a, b = polygon[k], polygon[(k + 1) % n]
        va, vb = vals[k], vals[(k + 1) % n]
        if va >= 0:
            out.append(a)
        if (va < 0) != (vb < 0):
            t = va / (va - vb)
            out.append(a + t * (b - a))
    return np.array(out) if out else np.zeros((0, 2))


@dataclass(frozen=True)
class SectionHit:
    index: int
    event_index: int
    piece: int
    u: float
    v: float
    p: np.ndarray
    q: np.ndarray


def section_hits(orbit: Orbit, charts: list[SectionChart]) -> list[SectionHit]:
    """Events of the orbit on the charts' plane, in chart coordinates.

    Hits on pieces without a supplied chart are skipped, so passing a single
    piece chart restricts the hit list to that piece.
    """
    if not charts:
        return []
    plane = charts[0].plane
    by_piece = {c.piece: c for c in charts}
    hits = []
    for k in range(len(orbit)):
        if orbit.plane(k) != plane:
            continue
        label = orbit.itinerary[k + 1]
        piece = int(label[0]) if plane.side == "B" else int(label[1])
        chart = by_piece.get(piece)
        if chart is None:
            continue
        x = orbit.points[k]
        u, v = chart_coords(chart, x)
        hits.append(SectionHit(len(hits), k, piece, float(u), float(v),
                               x[:3].copy(), x[3:].copy()))
    return hits
