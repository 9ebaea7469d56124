"""Exact event-driven integration of the induced flows.

Inside a region R_{kl} the Hamiltonian flow on a level set of H is the
translation x' = x + t * v with v = (e_k - e_a, e_l - e_b), so hitting times
of the indifference planes are solutions of scalar linear equations and every
orbit segment is computed in closed form.  The best-response flow uses the
closed-form exponential chords p(s) = e_k + (p0 - e_k) e^{-s} instead; both
modes produce the same itineraries (the BR orbit projects onto the
Hamiltonian one through the central projection).
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergedToEquilibrium,
    DegenerateCrossing,
    NoCrossing,
    ParallelFlow,
)
from .game import GameSystem, region_of

MIN_DT = 1e-14
DEGENERATE_REL = 1e-12
RENORM_DRIFT = 1e-12
RENORM_EVERY = 1000

__all__ = [
    "AffineMap6",
    "CrossingPlane",
    "Orbit",
    "OrbitPoint",
    "hamiltonian_velocity",
    "integrate_br",
    "integrate_hamiltonian",
    "plane_between",
    "plane_functional",
    "segment_affine_map",
    "step_hamiltonian",
]


@dataclass(frozen=True)
class CrossingPlane:
    """Indifference plane: side "A" pairs row indices {i,i'} (the planes on
    which p changes direction), side "B" pairs column indices (q changes
    direction)."""

    side: str
    pair: tuple[int, int]

    def __post_init__(self):
        if self.side not in ("A", "B"):
            raise ValueError(f"side must be 'A' or 'B', got {self.side!r}")
        a, b = self.pair
        if not (1 <= a < b <= 3):
            raise ValueError(f"pair must be an ordered index pair, got {self.pair}")


def plane_between(r1: tuple[int, int], r2: tuple[int, int]) -> CrossingPlane:
    """The plane crossed by the transition r1 -> r2 (labels differ in one index)."""
    if r1[1] == r2[1] and r1[0] != r2[0]:
        return CrossingPlane("A", tuple(sorted((r1[0], r2[0]))))
    if r1[0] == r2[0] and r1[1] != r2[1]:
        return CrossingPlane("B", tuple(sorted((r1[1], r2[1]))))
    raise ValueError(f"{r1} -> {r2} is not a one-index transition")


@dataclass(frozen=True)
class OrbitPoint:
    p: np.ndarray
    q: np.ndarray
    time: float


class Orbit:
    """Events, itinerary and segment durations of one integrated orbit.

    ``points`` rows are the 6-vectors (p, q) at the events; ``itinerary`` has
    one more entry than events (the initial region first).  ``level`` is the
    Hamiltonian level held (None in BR mode).
    """

    def __init__(self, mode, initial, times, planes, points, itinerary,
                 level=None, renormalizations=0):
        self.mode = mode
        self.initial = initial
        self.times = np.asarray(times, dtype=float)
        self._planes = planes
        self.points = np.asarray(points, dtype=float).reshape(-1, 6)
        self.itinerary = np.asarray(itinerary, dtype=np.int8).reshape(-1, 2)
        self.level = level
        self.renormalizations = renormalizations

    def __len__(self) -> int:
        return len(self.times)

    def plane(self, k: int) -> CrossingPlane:
        side, a, b = self._planes[3 * k: 3 * k + 3]
        return CrossingPlane("A" if side == 0 else "B", (a, b))

    def point(self, k: int) -> OrbitPoint:
        row = self.points[k]
        return OrbitPoint(row[:3].copy(), row[3:].copy(), float(self.times[k]))

    @property
    def events(self):
        return [(float(self.times[k]), self.plane(k), self.point(k))
                for k in range(len(self))]

    @property
    def segment_durations(self) -> np.ndarray:
        if len(self.times) == 0:
            return np.zeros(0)
        return np.diff(np.concatenate([[self.initial.time], self.times]))

    def labels(self) -> list[tuple[int, int]]:
        return [tuple(row) for row in self.itinerary.tolist()]


def hamiltonian_velocity(sys: GameSystem, region: tuple[int, int]):
    """Region velocity (P_A e_k, P_B e_l) = (e_k - e_a, e_l - e_b)."""
    k, l = region
    if not (1 <= k <= 3 and 1 <= l <= 3):
        raise ValueError(f"invalid region {region}")
    vp = -sys.nash.e_a.copy()
    vq = -sys.nash.e_b.copy()
    vp[k - 1] += 1.0
    vq[l - 1] += 1.0
    return vp, vq


def _plane_candidates(m, aq, pm, k, l, direction):
    """Positive hitting times of all candidate planes from region (k, l).

    Yields (t, side, other_index).  Times solve the linear indifference
    equations along the translation velocity; with direction=+1 only the
    diagram out-arrows produce positive times.
    """
    out = []
    for k2 in range(1, 4):
        if k2 == k:
            continue
        slope = direction * (m[k - 1][l - 1] - m[k2 - 1][l - 1])
        if slope < 0.0:
            t = (aq[k - 1] - aq[k2 - 1]) / -slope
            out.append((t, "A", k2))
    for l2 in range(1, 4):
        if l2 == l:
            continue
        slope = direction * (m[k - 1][l - 1] - m[k - 1][l2 - 1])
        if slope > 0.0:
            t = (pm[l2 - 1] - pm[l - 1]) / slope
            out.append((t, "B", l2))
    return out


def _pick_event(cands, state_msg):
    cands = [c for c in cands if c[0] > MIN_DT and np.isfinite(c[0])]
    if not cands:
        raise NoCrossing(f"no positive crossing time from {state_msg}")
    cands.sort(key=lambda c: c[0])
    if len(cands) > 1:
        t1, t2 = cands[0][0], cands[1][0]
        if t2 - t1 <= DEGENERATE_REL * max(t1, t2):
            raise DegenerateCrossing(
                f"simultaneous switch at {state_msg}: t={t1!r} vs {t2!r}")
    return cands[0]


def step_hamiltonian(sys: GameSystem, p, q, region, direction: int = 1):
    """One exact translation-flow step; returns (plane, p', q', dt, region')."""
    m = sys.m
    k, l = region
    vp, vq = hamiltonian_velocity(sys, region)
    aq = m @ np.asarray(q, dtype=float)
    pm = np.asarray(p, dtype=float) @ m
    t, side, idx = _pick_event(
        _plane_candidates(m, aq, pm, k, l, direction),
        f"region {region}, p={p}, q={q}")
    p2 = np.asarray(p, dtype=float) + direction * t * vp
    q2 = np.asarray(q, dtype=float) + direction * t * vq
    if side == "A":
        plane = CrossingPlane("A", tuple(sorted((k, idx))))
        new_region = (idx, l)
    else:
        plane = CrossingPlane("B", tuple(sorted((l, idx))))
        new_region = (k, idx)
    return plane, p2, q2, t, new_region


def integrate_hamiltonian(sys: GameSystem, p0, q0, n_transitions: int, *,
                          level: float | None = None,
                          initial_region: tuple[int, int] | None = None,
                          direction: int = 1) -> Orbit:
    """Integrate the piecewise-translation flow for a fixed number of events.

    The state is renormalized onto the level set whenever |H - level|
    exceeds 1e-12 (relative) or every 1000 events, whichever comes first;
    the count of renormalizations is recorded on the orbit.
    """
    from .game import hamiltonian

    if level is None:
        level = sys.flow_level
    p = np.array(p0, dtype=float)
    q = np.array(q0, dtype=float)
    h0 = hamiltonian(sys, p, q)
    if abs(h0 - level) > 1e-9 * max(level, 1.0):
        raise ValueError(
            f"initial point is not on the level set: H={h0!r}, level={level!r}")
    region = region_of(sys, p, q) if initial_region is None else initial_region

    mm = tuple(tuple(row) for row in sys.m.tolist())
    ea = tuple(sys.nash.e_a.tolist())
    eb = tuple(sys.nash.e_b.tolist())
    sgn = float(direction)

    times = array("d")
    points = array("d")
    planes = array("b")
    itinerary = array("b", bytes(0))
    itinerary.extend(region)
    initial = OrbitPoint(p.copy(), q.copy(), 0.0)
    renorms = 0
    t_cum = 0.0
    since_renorm = 0

    p0, p1, p2 = (float(x) for x in p)
    q0, q1, q2 = (float(x) for x in q)
    k, l = region[0] - 1, region[1] - 1
    min_dt, deg_rel, drift = MIN_DT, DEGENERATE_REL, RENORM_DRIFT * level

    for _ in range(n_transitions):
        aq = (mm[0][0] * q0 + mm[0][1] * q1 + mm[0][2] * q2,
              mm[1][0] * q0 + mm[1][1] * q1 + mm[1][2] * q2,
              mm[2][0] * q0 + mm[2][1] * q1 + mm[2][2] * q2)
        pm = (mm[0][0] * p0 + mm[1][0] * p1 + mm[2][0] * p2,
              mm[0][1] * p0 + mm[1][1] * p1 + mm[2][1] * p2,
              mm[0][2] * p0 + mm[1][2] * p1 + mm[2][2] * p2)
        mkl = mm[k][l]
        best_t = second_t = float("inf")
        best_side = best_idx = -1
        for k2 in range(3):
            if k2 == k:
                continue
            slope = sgn * (mkl - mm[k2][l])
            if slope < 0.0:
                t = (aq[k] - aq[k2]) / -slope
                if min_dt < t < second_t:
                    if t < best_t:
                        second_t, best_t = best_t, t
                        best_side, best_idx = 0, k2
                    else:
                        second_t = t
        for l2 in range(3):
            if l2 == l:
                continue
            slope = sgn * (mkl - mm[k][l2])
            if slope > 0.0:
                t = (pm[l2] - pm[l]) / slope
                if min_dt < t < second_t:
                    if t < best_t:
                        second_t, best_t = best_t, t
                        best_side, best_idx = 1, l2
                    else:
                        second_t = t
        state_msg = f"region {(k + 1, l + 1)} at t={t_cum!r}"
        if best_side < 0:
            err = NoCrossing(f"no positive crossing time from {state_msg}")
            err.state = OrbitPoint(np.array([p0, p1, p2]),
                                   np.array([q0, q1, q2]), t_cum)
            raise err
        if second_t != float("inf") and second_t - best_t <= deg_rel * second_t:
            err = DegenerateCrossing(
                f"simultaneous switch at {state_msg}: t={best_t!r} vs {second_t!r}")
            err.state = OrbitPoint(np.array([p0, p1, p2]),
                                   np.array([q0, q1, q2]), t_cum)
            raise err

        t = best_t
        st = sgn * t
        p0 += st * ((1.0 if k == 0 else 0.0) - ea[0])
        p1 += st * ((1.0 if k == 1 else 0.0) - ea[1])
        p2 += st * ((1.0 if k == 2 else 0.0) - ea[2])
        q0 += st * ((1.0 if l == 0 else 0.0) - eb[0])
        q1 += st * ((1.0 if l == 1 else 0.0) - eb[1])
        q2 += st * ((1.0 if l == 2 else 0.0) - eb[2])
        t_cum += t
        if best_side == 0:
            plane = (0, min(k, best_idx) + 1, max(k, best_idx) + 1)
            k = best_idx
        else:
            plane = (1, min(l, best_idx) + 1, max(l, best_idx) + 1)
            l = best_idx

        since_renorm += 1
        h = (max(mm[0][0] * q0 + mm[0][1] * q1 + mm[0][2] * q2,
                 mm[1][0] * q0 + mm[1][1] * q1 + mm[1][2] * q2,
                 mm[2][0] * q0 + mm[2][1] * q1 + mm[2][2] * q2)
             - min(mm[0][0] * p0 + mm[1][0] * p1 + mm[2][0] * p2,
                   mm[0][1] * p0 + mm[1][1] * p1 + mm[2][1] * p2,
                   mm[0][2] * p0 + mm[1][2] * p1 + mm[2][2] * p2))
        if abs(h - level) > drift or since_renorm >= RENORM_EVERY:
            factor = level / h
            p0 = ea[0] + (p0 - ea[0]) * factor
            p1 = ea[1] + (p1 - ea[1]) * factor
            p2 = ea[2] + (p2 - ea[2]) * factor
            q0 = eb[0] + (q0 - eb[0]) * factor
            q1 = eb[1] + (q1 - eb[1]) * factor
            q2 = eb[2] + (q2 - eb[2]) * factor
            renorms += 1
            since_renorm = 0

        times.append(t_cum)
        planes.extend(plane)
        points.extend((p0, p1, p2, q0, q1, q2))
        itinerary.extend((k + 1, l + 1))

    return Orbit("hamiltonian", initial, times, planes, points, itinerary,
                 level=level, renormalizations=renorms)


def integrate_br(sys: GameSystem, p0, q0, n_transitions: int) -> Orbit:
    """Integrate the best-response flow in BR time s.

    Within a region the orbit is the chord p(s) = e_k + (p - e_k) u,
    u = e^{-s}; crossings are linear in u and the earliest event has the
    largest root u* in (0, 1).
    """
    from math import log

    p = np.array(p0, dtype=float)
    q = np.array(q0, dtype=float)
    region = region_of(sys, p, q)
    mm = tuple(tuple(row) for row in sys.m.tolist())

    times = array("d")
    points = array("d")
    planes = array("b")
    itinerary = array("b", bytes(0))
    itinerary.extend(region)
    initial = OrbitPoint(p.copy(), q.copy(), 0.0)
    s_cum = 0.0

    p0_, p1_, p2_ = (float(x) for x in p)
    q0_, q1_, q2_ = (float(x) for x in q)
    k, l = region[0] - 1, region[1] - 1
    min_dt, deg_rel = MIN_DT, DEGENERATE_REL

    for _ in range(n_transitions):
        aq = (mm[0][0] * q0_ + mm[0][1] * q1_ + mm[0][2] * q2_,
              mm[1][0] * q0_ + mm[1][1] * q1_ + mm[1][2] * q2_,
              mm[2][0] * q0_ + mm[2][1] * q1_ + mm[2][2] * q2_)
        pm = (mm[0][0] * p0_ + mm[1][0] * p1_ + mm[2][0] * p2_,
              mm[0][1] * p0_ + mm[1][1] * p1_ + mm[2][1] * p2_,
              mm[0][2] * p0_ + mm[1][2] * p1_ + mm[2][2] * p2_)
        if aq[k] - pm[l] < 1e-14:
            raise ConvergedToEquilibrium(
                f"H = {aq[k] - pm[l]!r} below 1e-14 at s={s_cum!r}")
        mkl = mm[k][l]
        u_max = 1.0 - min_dt
        best_u = second_u = 0.0
        best_side = best_idx = -1
        for k2 in range(3):
            if k2 == k:
                continue
            c = mkl - mm[k2][l]
            if c < 0.0:
                u = c / (c - (aq[k] - aq[k2]))
                if u_max > u > second_u:
                    if u > best_u:
                        second_u, best_u = best_u, u
                        best_side, best_idx = 0, k2
                    else:
                        second_u = u
        for l2 in range(3):
            if l2 == l:
                continue
            c = mkl - mm[k][l2]
            if c > 0.0:
                u = c / (c - (pm[l] - pm[l2]))
                if u_max > u > second_u:
                    if u > best_u:
                        second_u, best_u = best_u, u
                        best_side, best_idx = 1, l2
                    else:
                        second_u = u
        if best_side < 0:
            raise NoCrossing(
                f"no crossing in region {(k + 1, l + 1)} at s={s_cum!r}")
        if second_u > 0.0 and best_u - second_u <= deg_rel:
            raise DegenerateCrossing(
                f"simultaneous switch at s={s_cum!r}: "
                f"u={best_u!r} vs {second_u!r}")
        u = best_u

        ek0 = 1.0 if k == 0 else 0.0
        ek1 = 1.0 if k == 1 else 0.0
        ek2 = 1.0 if k == 2 else 0.0
        el0 = 1.0 if l == 0 else 0.0
        el1 = 1.0 if l == 1 else 0.0
        el2 = 1.0 if l == 2 else 0.0
        p0_ = ek0 + (p0_ - ek0) * u
        p1_ = ek1 + (p1_ - ek1) * u
        p2_ = ek2 + (p2_ - ek2) * u
        q0_ = el0 + (q0_ - el0) * u
        q1_ = el1 + (q1_ - el1) * u
        q2_ = el2 + (q2_ - el2) * u
        s_cum += -log(u)
        if best_side == 0:
            plane = (0, min(k, best_idx) + 1, max(k, best_idx) + 1)
            k = best_idx
        else:
            plane = (1, min(l, best_idx) + 1, max(l, best_idx) + 1)
            l = best_idx

        times.append(s_cum)
        planes.extend(plane)
        points.extend((p0_, p1_, p2_, q0_, q1_, q2_))
        itinerary.extend((k + 1, l + 1))

    return Orbit("br", initial, times, planes, points, itinerary)


# --- Affine segment maps ----------------------------------------------------

@dataclass(frozen=True)
class AffineMap6:
    """Affine map x -> linear @ x + offset on ambient (p, q) 6-vectors."""

    linear: np.ndarray
    offset: np.ndarray

    def __call__(self, x) -> np.ndarray:
        return self.linear @ np.asarray(x, dtype=float) + self.offset

    def compose_after(self, first: "AffineMap6") -> "AffineMap6":
        """Return self o first."""
        return AffineMap6(self.linear @ first.linear,
                          self.linear @ first.offset + self.offset)

    @classmethod
    def identity(cls) -> "AffineMap6":
        return cls(np.eye(6), np.zeros(6))


def plane_functional(sys: GameSystem, plane: CrossingPlane) -> np.ndarray:
    """Gradient a with plane = {x : <a, x> = 0}; a depends on one block only."""
    a = np.zeros(6)
    i, j = plane.pair
    if plane.side == "A":
        a[3:] = sys.m[i - 1] - sys.m[j - 1]
    else:
        a[:3] = sys.m[:, i - 1] - sys.m[:, j - 1]
    return a


def segment_affine_map(sys: GameSystem, region, entry_plane,
                       exit_plane: CrossingPlane) -> AffineMap6:
    """Map x -> x + t(x) v across one region, t(x) = -<a, x>/<a, v>.

    ``entry_plane`` documents the domain; the map itself depends on the
    region velocity and the exit plane only.
    """
    del entry_plane
    vp, vq = hamiltonian_velocity(sys, region)
    v = np.concatenate([vp, vq])
    a = plane_functional(sys, exit_plane)
    denom = float(a @ v)
    if abs(denom) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(v):
        raise ParallelFlow(f"velocity of region {region} is parallel to {exit_plane}")
    linear = np.eye(6) - np.outer(v, a) / denom
    return AffineMap6(linear, np.zeros(6))
