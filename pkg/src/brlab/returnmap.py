"""Exact affine return maps of periodic itineraries and their classification.

The first-return map along a closed legal loop is the composition of the
per-segment hitting maps, each affine, restricted to a 2D section chart.  On
a closed loop the restriction preserves area; an elliptic map (|trace| < 2)
is an affine rotation whose angle, fixed point and invariant ellipse are
computed in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagrams import diagram_from_game
from .errors import DegenerateCrossing, EmptyPiece, IllegalLoop, NoCrossing
from .flow import (
    AffineMap6,
    integrate_hamiltonian,
    plane_between,
    segment_affine_map,
)
from .game import GameSystem
from .sections import (
    SectionChart,
    build_section_charts,
    chart_point,
    clip_polygon,
    polygon_contains,
)
from .stats import detect_periodic_itinerary

__all__ = [
    "AffineMap2D",
    "IslandReport",
    "ItineraryDomain",
    "ReturnMapClassification",
    "classify_return_map",
    "find_islands",
    "itinerary_domain",
    "loop_return_map",
    "loop_transitions",
]

RATIONAL_SIEVE_TOL = 1e-9
RATIONAL_SIEVE_MAX_DEN = 1000


@dataclass(frozen=True)
class AffineMap2D:
    """u -> m @ u + b in the coordinates of a section chart."""

    m: np.ndarray
    b: np.ndarray
    chart: SectionChart | None = field(default=None, repr=False)

    def __call__(self, uv) -> np.ndarray:
        return self.m @ np.asarray(uv, dtype=float) + self.b

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.m))

    @property
    def trace(self) -> float:
        return float(np.trace(self.m))


def loop_transitions(loop):
    """Pairs (r_t, r_{t+1}) of a cyclic itinerary, including the wrap-around."""
    loop = [tuple(int(x) for x in lab) for lab in loop]
    if len(loop) < 2:
        return []
    return list(zip(loop, loop[1:] + loop[:1]))


def _validate_loop(sys: GameSystem, loop):
    diagram = diagram_from_game(sys)
    trans = loop_transitions(loop)
    for a, b in trans:
        if sum(x != y for x, y in zip(a, b)) != 1:
            raise IllegalLoop(f"{a} -> {b} changes both indices")
        if not diagram.has_arrow(a, b):
            raise IllegalLoop(f"{a} -> {b} is not a diagram arrow")
    return trans


def _rotate_to_chart(sys: GameSystem, loop, chart: SectionChart):
    """Rotate the loop so its last transition crosses the chart's plane/piece."""
    trans = _validate_loop(sys, loop)
    for t, (a, b) in enumerate(trans):
        plane = plane_between(a, b)
        piece = a[0] if plane.side == "B" else a[1]
        if plane == chart.plane and piece == chart.piece:
            return trans[t + 1:] + trans[:t + 1]
    raise IllegalLoop(f"loop never crosses {chart.plane} piece {chart.piece}")


def _ambient_loop_map(sys: GameSystem, rotated) -> AffineMap6:
    total = AffineMap6.identity()
    for a, b in rotated:
        seg = segment_affine_map(sys, a, None, plane_between(a, b))
        total = seg.compose_after(total)
    return total


def loop_return_map(sys: GameSystem, loop, chart: SectionChart) -> AffineMap2D:
    """Exact first-return map of a closed legal loop on a section chart."""
    if chart.is_empty:
        raise EmptyPiece(f"chart {chart.plane} piece {chart.piece} is empty")
    if not loop:
        return AffineMap2D(np.eye(2), np.zeros(2), chart)
    rotated = _rotate_to_chart(sys, loop, chart)
    amb = _ambient_loop_map(sys, rotated)
    basis, origin = chart.basis, chart.origin
    m2 = basis @ amb.linear @ basis.T
    b2 = basis @ (amb.linear @ origin + amb.offset - origin)
    return AffineMap2D(m2, b2, chart)


@dataclass(frozen=True)
class ReturnMapClassification:
    """kind is "periodic" (rational rotation number), "elliptic", or
    "non_elliptic"; the invariant ellipse Q satisfies M' Q M = Q and is
    normalized to det Q = 1."""

    kind: str
    trace: float
    order: int | None = None
    angle: float | None = None
    fixed_point: np.ndarray | None = None
    ellipse: np.ndarray | None = None
    note: str = ""


def _invariant_form(m: np.ndarray) -> np.ndarray:
    # solve M' Q M = Q for symmetric Q = [[x, y], [y, z]]
    a, b = m[0]
    c, d = m[1]
    sys3 = np.array([
        [a * a - 1.0, 2 * a * c, c * c],
        [a * b, a * d + b * c - 1.0, c * d],
        [b * b, 2 * b * d, d * d - 1.0],
    ])
    _, sv, vt = np.linalg.svd(sys3)
    x, y, z = vt[-1]
    q = np.array([[x, y], [y, z]])
    if np.trace(q) < 0:
        q = -q
    det = np.linalg.det(q)
    if det <= 0:
        raise ValueError(f"invariant form of {m} is not definite")
    return q / np.sqrt(det)


def _sqrtm2(q: np.ndarray) -> np.ndarray:
    delta = np.sqrt(np.linalg.det(q))
    return (q + delta * np.eye(2)) / np.sqrt(np.trace(q) + 2.0 * delta)


def classify_return_map(t_map: AffineMap2D) -> ReturnMapClassification:
    m, b = t_map.m, t_map.b
    tr = float(np.trace(m))
    if np.allclose(m, np.eye(2), atol=1e-9) and np.max(np.abs(b)) <= 1e-9:
        return ReturnMapClassification("periodic", tr, order=1, angle=0.0,
                                       fixed_point=np.zeros(2))
    disc = tr * tr - 4.0 * float(np.linalg.det(m))
    if disc >= -1e-12:
        note = ""
        if np.allclose(m, np.eye(2), atol=1e-9):
            note = "pure translation (no fixed point)"
        elif abs(disc) <= 1e-12:
            note = "parabolic (shear)"
        return ReturnMapClassification("non_elliptic", tr, note=note)

    fixed = np.linalg.solve(np.eye(2) - m, b)
    try:
        form = _invariant_form(m)
    except ValueError:
        return ReturnMapClassification("non_elliptic", tr,
                                       note="invariant form not definite")
    s = _sqrtm2(form)
    rot = s @ m @ np.linalg.inv(s)
    angle = float(np.arctan2(rot[1, 0], rot[0, 0]))
    x = (angle / (2.0 * np.pi)) % 1.0
    for den in range(1, RATIONAL_SIEVE_MAX_DEN + 1):
        num = round(x * den)
        if abs(x - num / den) < RATIONAL_SIEVE_TOL:
            return ReturnMapClassification("periodic", tr, order=den,
                                           angle=angle, fixed_point=fixed,
                                           ellipse=form)
    return ReturnMapClassification("elliptic", tr, angle=angle,
                                   fixed_point=fixed, ellipse=form)


@dataclass(frozen=True)
class ItineraryDomain:
    """Chart points whose forward itinerary repeats the loop.

    ``polygon`` constrains one full period (clipping region half-planes
    pulled back through the segment maps).  The set invariant under the
    return map is smaller: for an irrational elliptic map it is the largest
    invariant ellipse-disk inscribed in that polygon (``center``, ``form``,
    ``radius``: the disk {x : (x-c)' Q (x-c) <= r^2}); for a periodic map it
    is the finite intersection of the polygon's pullbacks.
    """

    polygon: np.ndarray
    kind: str  # "disk" | "polygon" | "empty"
    center: np.ndarray | None = None
    form: np.ndarray | None = None
    radius: float = 0.0
    invariant_polygon: np.ndarray | None = None

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    def boundary(self, n: int = 256) -> np.ndarray:
        """Points on the boundary of the invariant domain."""
        if self.kind == "disk":
            theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
            circle = np.vstack([np.cos(theta), np.sin(theta)])
            s_inv = np.linalg.inv(_sqrtm2(self.form))
            return (self.center[:, None] + self.radius * (s_inv @ circle)).T
        poly = (self.invariant_polygon if self.invariant_polygon is not None
                else self.polygon)
        if len(poly) == 0:
            return np.zeros((0, 2))
        out = []
        per_edge = max(1, n // len(poly))
        for a, b in zip(poly, np.roll(poly, -1, axis=0)):
            for t in np.linspace(0.0, 1.0, per_edge, endpoint=False):
                out.append(a + t * (b - a))
        return np.array(out)

    def contains(self, uv, tol: float = 1e-9) -> bool:
        if self.kind == "disk":
            d = np.asarray(uv, dtype=float) - self.center
            return float(d @ self.form @ d) <= (self.radius + tol) ** 2
        if self.kind == "polygon":
            poly = (self.invariant_polygon if self.invariant_polygon is not None
                    else self.polygon)
            return polygon_contains(poly, uv, tol)
        return False


def _q_distance_to_segment(center, form, a, b) -> float:
    s = _sqrtm2(form)
    za = s @ (a - center)
    zb = s @ (b - center)
    d = zb - za
    denom = float(d @ d)
    t = 0.0 if denom == 0 else float(np.clip(-(za @ d) / denom, 0.0, 1.0))
    return float(np.linalg.norm(za + t * d))


def _one_period_polygon(sys: GameSystem, loop, chart: SectionChart) -> np.ndarray:
    if chart.is_empty:
        raise EmptyPiece(f"chart {chart.plane} piece {chart.piece} is empty")
    rotated = _rotate_to_chart(sys, loop, chart)
    m = sys.m

    def region_functionals(region):
        k, l = region
        out = []
        for k2 in range(1, 4):
            if k2 != k:
                a = np.zeros(6)
                a[3:] = m[k - 1] - m[k2 - 1]
                out.append(a)
        for l2 in range(1, 4):
            if l2 != l:
                a = np.zeros(6)
                a[:3] = m[:, l2 - 1] - m[:, l - 1]
                out.append(a)
        return out

    polygon = chart.polygon.copy()
    prefix = AffineMap6.identity()
    basis, origin = chart.basis, chart.origin
    trivial = 1e-10 * (sys.scale + 1.0)

    def add_constraints(functionals, fmap):
        nonlocal polygon
        for a in functionals:
            # a . (L (origin + B' u) + off) >= 0 as a half-plane in u
            lin = fmap.linear.T @ a
            normal = basis @ lin
            offset = -float(a @ (fmap.linear @ origin + fmap.offset))
            if np.max(np.abs(normal)) <= trivial:
                # constraint is constant on the chart image: either trivially
                # satisfied (an active crossing plane) or infeasible
                if offset > trivial:
                    polygon = np.zeros((0, 2))
                continue
            polygon = clip_polygon(polygon, normal, offset)

    bounds = [np.eye(6)[r] for r in range(6)]
    for (a, b) in rotated:
        add_constraints(region_functionals(a), prefix)
        add_constraints(bounds, prefix)
        seg = segment_affine_map(sys, a, None, plane_between(a, b))
        prefix = seg.compose_after(prefix)
        add_constraints(region_functionals(a), prefix)
        if len(polygon) == 0:
            break
    return polygon


def itinerary_domain(sys: GameSystem, loop, chart: SectionChart) -> ItineraryDomain:
    """Invariant domain U of a closed legal loop on a section chart.

    An empty domain means the loop, although diagram-legal, has no realizing
    quasi-periodic orbits (the diagram is not a Markov partition).
    """
    polygon = _one_period_polygon(sys, loop, chart)
    if len(polygon) < 3:
        return ItineraryDomain(np.zeros((0, 2)), "empty")
    t_map = loop_return_map(sys, loop, chart)
    cls = classify_return_map(t_map)
    if cls.kind == "elliptic":
        center, form = cls.fixed_point, cls.ellipse
        if not polygon_contains(polygon, center):
            return ItineraryDomain(polygon, "empty")
        radius = min(_q_distance_to_segment(center, form, a, b)
                     for a, b in zip(polygon, np.roll(polygon, -1, axis=0)))
        return ItineraryDomain(polygon, "disk", center=center, form=form,
                               radius=radius)
    if cls.kind == "periodic":
        inv = polygon
        back = np.linalg.inv(t_map.m)
        cur = polygon
        for _ in range(cls.order - 1):
            # T^{-k}(polygon): preimage stays convex; intersect edge by edge
            cur = (cur - t_map.b[None, :]) @ back.T
            for a, b in zip(cur, np.roll(cur, -1, axis=0)):
                edge = b - a
                normal = np.array([-edge[1], edge[0]])
                inv = clip_polygon(inv, normal, float(normal @ a))
                if len(inv) == 0:
                    return ItineraryDomain(polygon, "empty")
        return ItineraryDomain(polygon, "polygon", invariant_polygon=inv)
    return ItineraryDomain(polygon, "polygon", invariant_polygon=polygon)


@dataclass(frozen=True)
class IslandReport:
    period: int
    loop: tuple
    classification: ReturnMapClassification
    chart: SectionChart
    seed_point: np.ndarray


def _canonical_rotation(loop):
    rots = [tuple(loop[k:] + loop[:k]) for k in range(len(loop))]
    return min(rots)


def find_islands(sys: GameSystem, chart: SectionChart, n_points: int, rng, *,
                 window=None, transitions: int = 1500,
                 max_period: int = 240) -> list[IslandReport]:
    """Grid scan of section points for quasi-periodic islands.

    Sampled points are integrated until their itinerary tail is periodic;
    distinct periodic loops are classified through their return maps.
    Degenerate crossings abort the sample, which is then skipped.
    """
    diagram = diagram_from_game(sys)
    i, j = chart.plane.pair
    if window is None:
        lo = chart.polygon.min(axis=0)
        hi = chart.polygon.max(axis=0)
    else:
        lo, hi = np.asarray(window[0]), np.asarray(window[1])
    islands: dict[tuple, IslandReport] = {}
    for _ in range(n_points):
        uv = lo + rng.random(2) * (hi - lo)
        if not polygon_contains(chart.polygon, uv, tol=-1e-12):
            continue
        x = chart_point(chart, uv)
        if chart.plane.side == "B":
            k = chart.piece
            src, dst = (k, i), (k, j)
        else:
            l = chart.piece
            src, dst = (i, l), (j, l)
        if not diagram.has_arrow(src, dst):
            src, dst = dst, src
        try:
            orb = integrate_hamiltonian(sys, x[:3], x[3:], transitions,
                                        initial_region=dst,
                                        level=chart.level)
        except (DegenerateCrossing, NoCrossing):
            continue
        found = detect_periodic_itinerary(orb.itinerary, max_period)
        if found is None:
            continue
        _, period = found
        tail = [tuple(row) for row in orb.itinerary[-period:].tolist()]
        key = _canonical_rotation(tail)
        if key in islands:
            continue
        loop = list(key)
        trans = loop_transitions(loop)
        planes = [plane_between(a, b) for a, b in trans]
        if chart.plane in planes:
            base = chart
        else:
            base_plane = planes[0]
            piece = (trans[0][0][0] if base_plane.side == "B"
                     else trans[0][0][1])
            base = next(c for c in build_section_charts(sys, base_plane,
                                                        level=chart.level)
                        if c.piece == piece)
        try:
            t_map = loop_return_map(sys, loop, base)
        except (IllegalLoop, EmptyPiece):
            continue
        cls = classify_return_map(t_map)
        islands[key] = IslandReport(period, key, cls, base, uv.copy())
    return sorted(islands.values(), key=lambda isl: isl.period)
