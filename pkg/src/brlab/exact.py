"""Exact rational integration of the translation flow for integer matrices.

Ground-truth oracle for the floating-point integrator: with rational payoffs
and a rational initial point every hitting time and event point is rational,
so the event sequence is computed without any rounding.  Not used on the
default path.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DegenerateCrossing, NoCrossing

__all__ = [
    "exact_br_events",
    "exact_equilibrium",
    "exact_hamiltonian_events",
    "exact_project",
    "exact_region_of",
]


def _solve3(rows, rhs):
    """Gaussian elimination over Fractions for a 4x4 system."""
    n = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular exact system")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = Fraction(1, 1) / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [aug[r][n] for r in range(n)]


def exact_equilibrium(m):
    """Equilibrium strategies and value of (m, -m) over the rationals."""
    m = [[Fraction(x) for x in row] for row in m]
    one, zero = Fraction(1), Fraction(0)
    q = _solve3([m[0] + [-one], m[1] + [-one], m[2] + [-one],
                 [one, one, one, zero]],
                [zero, zero, zero, one])
    cols = [[m[i][j] for i in range(3)] for j in range(3)]
    p = _solve3([cols[0] + [-one], cols[1] + [-one], cols[2] + [-one],
                 [one, one, one, zero]],
                [zero, zero, zero, one])
    return tuple(p[:3]), tuple(q[:3]), q[3]


def exact_region_of(m, p, q):
    aq = [sum(m[i][j] * q[j] for j in range(3)) for i in range(3)]
    pm = [sum(p[i] * m[i][j] for i in range(3)) for j in range(3)]
    k = max(range(3), key=lambda i: aq[i])
    l = min(range(3), key=lambda j: pm[j])
    if sum(1 for v in aq if v == aq[k]) > 1 or sum(1 for v in pm if v == pm[l]) > 1:
        raise DegenerateCrossing("exact start on an indifference plane")
    return k + 1, l + 1


def exact_hamiltonian_events(m, p0, q0, n_transitions: int):
    """Exact event list [(t, region_after, p, q)] of the translation flow.

    ``m`` must have rational entries; the flow level is H(p0, q0).
    """
    m = [[Fraction(x) for x in row] for row in m]
    p = [Fraction(x) for x in p0]
    q = [Fraction(x) for x in q0]
    e_p, e_q, _ = exact_equilibrium(m)
    region = exact_region_of(m, p, q)
    t_cum = Fraction(0)
    events = []
    for _ in range(n_transitions):
        k, l = region
        aq = [sum(m[i][j] * q[j] for j in range(3)) for i in range(3)]
        pm = [sum(p[i] * m[i][j] for i in range(3)) for j in range(3)]
        cands = []
        for k2 in range(1, 4):
            if k2 == k:
                continue
            slope = m[k - 1][l - 1] - m[k2 - 1][l - 1]
            if slope < 0:
                cands.append(((aq[k - 1] - aq[k2 - 1]) / -slope, "A", k2))
        for l2 in range(1, 4):
            if l2 == l:
                continue
            slope = m[k - 1][l - 1] - m[k - 1][l2 - 1]
            if slope > 0:
                cands.append(((pm[l2 - 1] - pm[l - 1]) / slope, "B", l2))
        cands = [c for c in cands if c[0] > 0]
        if not cands:
            raise NoCrossing(f"exact flow stuck in region {region}")
        cands.sort(key=lambda c: c[0])
        if len(cands) > 1 and cands[0][0] == cands[1][0]:
            raise DegenerateCrossing(f"exact simultaneous switch in {region}")
        t, side, idx = cands[0]
        vp = [Fraction(1 if i == k - 1 else 0) - e_p[i] for i in range(3)]
        vq = [Fraction(1 if j == l - 1 else 0) - e_q[j] for j in range(3)]
        p = [p[i] + t * vp[i] for i in range(3)]
        q = [q[j] + t * vq[j] for j in range(3)]
        t_cum += t
        region = (idx, l) if side == "A" else (k, idx)
        events.append((t_cum, region, tuple(p), tuple(q)))
    return events


def exact_br_events(m, p0, q0, n_transitions: int):
    """Exact event list [(u_cum, region_after, p, q)] of the BR flow.

    Event points of the best-response spiral are rational; only the BR time
    s = -log(u_cum) is not, so the cumulative chord factor u_cum = e^{-s} is
    returned instead.
    """
    m = [[Fraction(x) for x in row] for row in m]
    p = [Fraction(x) for x in p0]
    q = [Fraction(x) for x in q0]
    region = exact_region_of(m, p, q)
    u_cum = Fraction(1)
    events = []
    for _ in range(n_transitions):
        k, l = region
        aq = [sum(m[i][j] * q[j] for j in range(3)) for i in range(3)]
        pm = [sum(p[i] * m[i][j] for i in range(3)) for j in range(3)]
        cands = []
        for k2 in range(1, 4):
            if k2 == k:
                continue
            c = m[k - 1][l - 1] - m[k2 - 1][l - 1]
            if c < 0:
                u = c / (c - (aq[k - 1] - aq[k2 - 1]))
                if 0 < u < 1:
                    cands.append((u, "A", k2))
        for l2 in range(1, 4):
            if l2 == l:
                continue
            c = m[k - 1][l - 1] - m[k - 1][l2 - 1]
            if c > 0:
                u = c / (c - (pm[l - 1] - pm[l2 - 1]))
                if 0 < u < 1:
                    cands.append((u, "B", l2))
        if not cands:
            raise NoCrossing(f"exact BR flow stuck in region {region}")
        cands.sort(key=lambda cand: cand[0], reverse=True)
        if len(cands) > 1 and cands[0][0] == cands[1][0]:
            raise DegenerateCrossing(f"exact simultaneous switch in {region}")
        u, side, idx = cands[0]
        ek = [Fraction(1 if i == k - 1 else 0) for i in range(3)]
        el = [Fraction(1 if j == l - 1 else 0) for j in range(3)]
        p = [ek[i] + (p[i] - ek[i]) * u for i in range(3)]
        q = [el[j] + (q[j] - el[j]) * u for j in range(3)]
        u_cum *= u
        region = (idx, l) if side == "A" else (k, idx)
        events.append((u_cum, region, tuple(p), tuple(q)))
    return events


def exact_project(m, p, q, level):
    """Central projection onto {H = level} over the rationals."""
    m = [[Fraction(x) for x in row] for row in m]
    p = [Fraction(x) for x in p]
    q = [Fraction(x) for x in q]
    e_p, e_q, _ = exact_equilibrium(m)
    aq = [sum(m[i][j] * q[j] for j in range(3)) for i in range(3)]
    pm = [sum(p[i] * m[i][j] for i in range(3)) for j in range(3)]
    h = max(aq) - min(pm)
    factor = Fraction(level) / h
    return (tuple(e_p[i] + (p[i] - e_p[i]) * factor for i in range(3)),
            tuple(e_q[j] + (q[j] - e_q[j]) * factor for j in range(3)))
