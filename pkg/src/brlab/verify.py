"""Self-contained invariant suite behind ``brlab verify``.

Each check prints one pass/fail line; the suite returns False if any check
fails.  The checks mirror the package's analytic identities: exact
conservation laws, the projection identity, diagram necessity, group
soundness, the dual-route (rational arithmetic) conjugacy oracle, and
return-map faithfulness.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import diagrams
from .errors import BrlabError
from .exact import exact_br_events, exact_hamiltonian_events, exact_project
from .flow import (
    CrossingPlane,
    hamiltonian_velocity,
    integrate_br,
    integrate_hamiltonian,
)
from .game import hamiltonian, project_to_level_set, region_of, validate_game
from .returnmap import classify_return_map, loop_return_map
from .sections import build_section_charts, chart_point, section_hits

EX1 = np.array([[22.0, 34.0, -4.0], [7.0, -32.0, 16.0], [-53.0, 96.0, 23.0]])
SIGMA = (np.sqrt(5.0) - 1.0) / 2.0
EX2 = np.array([[1.0, 0.0, SIGMA], [SIGMA, 1.0, 0.0], [0.0, SIGMA, 1.0]])
PERIOD6 = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 1)]


def _random_valid_game(rng):
    while True:
        a = rng.integers(-99, 100, size=(3, 3)).astype(float)
        try:
            return validate_game(a)
        except BrlabError:
            continue


def _random_level_point(sys_, rng):
    while True:
        p = rng.dirichlet(np.ones(3))
        q = rng.dirichlet(np.ones(3))
        try:
            p, q = project_to_level_set(sys_, p, q, level=sys_.flow_level)
            region_of(sys_, p, q)
            return p, q
        except BrlabError:
            continue


def run_invariant_suite(game_sys=None, quick: bool = False, stream=None) -> bool:
    checks = []
    n_games = 100 if quick else 300
    n_orbits = 3 if quick else 10

    def check(name, fn):
        checks.append((name, fn))

    check("enumeration: 23 classes, loop distribution {3:2,4:15,5:5,6:1}",
          lambda: len(diagrams.cached_atlas().classes) == 23)

    def group_soundness():
        import itertools

        rng = np.random.default_rng(1)
        perms = list(itertools.permutations((1, 2, 3)))
        for _ in range(10 if quick else 30):
            d = diagrams.TransitionDiagram(int(rng.integers(0, 1 << 18)))
            key = diagrams.canonical_form(d)
            for rp, cp, tr in zip(rng.permutation(perms), rng.permutation(perms),
                                  (False, True) * 3):
                if diagrams.canonical_form(d.transformed(rp, cp, tr)) != key:
                    return False
        return True
    check("canonical form invariant under the 72-element group", group_soundness)

    def necessity():
        rng = np.random.default_rng(2)
        for _ in range(n_games):
            sys_ = _random_valid_game(rng)
            rep = diagrams.check_conditions(diagrams.diagram_from_game(sys_))
            if not rep.admissible:
                return False
        return True
    check(f"necessity: conditions (1)-(5) on {n_games} random games", necessity)

    def projection_identity():
        rng = np.random.default_rng(3)
        for _ in range(n_games):
            sys_ = _random_valid_game(rng)
            for k in range(3):
                vp, vq = hamiltonian_velocity(sys_, (k + 1, k % 3 + 1))
                ek = np.zeros(3)
                ek[k] = 1.0
                if np.max(np.abs(vp - (ek - sys_.nash.e_a))) > 1e-10:
                    return False
        return True
    check("projection identity P_A e_k = e_k - equilibrium", projection_identity)

    def homogeneity():
        rng = np.random.default_rng(4)
        sys_ = validate_game(EX1)
        for _ in range(200):
            p = rng.dirichlet(np.ones(3))
            q = rng.dirichlet(np.ones(3))
            t = rng.uniform(1e-4, 1.0)
            h1 = hamiltonian(sys_, sys_.nash.e_a + t * (p - sys_.nash.e_a),
                             sys_.nash.e_b + t * (q - sys_.nash.e_b))
            if abs(h1 - t * hamiltonian(sys_, p, q)) > 1e-10 * sys_.scale:
                return False
        return True
    check("homogeneity of H along rays (200 samples)", homogeneity)

    def conservation():
        sys_ = validate_game(EX1)
        rng = np.random.default_rng(5)
        p, q = _random_level_point(sys_, rng)
        orb = integrate_hamiltonian(sys_, p, q, 2000)
        hs = [hamiltonian(sys_, row[:3], row[3:]) for row in orb.points[::37]]
        return max(abs(h - 1.0) for h in hs) < 1e-9
    check("H conservation over 2000 events", conservation)

    def legality():
        sys_ = validate_game(EX1)
        d = diagrams.diagram_from_game(sys_)
        rng = np.random.default_rng(6)
        p, q = _random_level_point(sys_, rng)
        orb = integrate_hamiltonian(sys_, p, q, 2000)
        labels = orb.labels()
        return all(d.has_arrow(a, b) for a, b in zip(labels, labels[1:]))
    check("itinerary transitions are diagram arrows", legality)

    def lyapunov():
        sys_ = validate_game(EX1)
        rng = np.random.default_rng(7)
        p = rng.dirichlet(np.ones(3))
        q = rng.dirichlet(np.ones(3))
        orb = integrate_br(sys_, p, q, 2000)
        h0 = hamiltonian(sys_, p, q)
        hs = np.array([hamiltonian(sys_, row[:3], row[3:]) for row in orb.points])
        return np.max(np.abs(hs * np.exp(orb.times) - h0)) / h0 < 1e-6
    check("Lyapunov identity H(s) = H(0) e^{-s} on BR orbits", lyapunov)

    def conjugacy():
        for a in (EX1, EX2):
            sys_ = validate_game(a)
            rng = np.random.default_rng(8)
            for _ in range(n_orbits):
                p, q = _random_level_point(sys_, rng)
                ham = integrate_hamiltonian(sys_, p, q, 40)
                br = integrate_br(sys_, p, q, 40)
                if ham.labels() != br.labels():
                    return False
                for k in range(40):
                    row = br.points[k]
                    pp, qq = project_to_level_set(sys_, row[:3], row[3:],
                                                  level=sys_.flow_level)
                    if np.max(np.abs(np.concatenate([pp, qq])
                                     - ham.points[k])) > 1e-6:
                        return False
        return True
    check("BR/Hamiltonian conjugacy (float, 40-event horizon)", conjugacy)

    def conjugacy_exact():
        a_int = EX1.astype(int).tolist()
        p0 = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))
        q0 = (Fraction(2, 7), Fraction(3, 7), Fraction(2, 7))
        m = [[Fraction(x) for x in row] for row in a_int]
        aq = [sum(m[i][j] * q0[j] for j in range(3)) for i in range(3)]
        pm = [sum(p0[i] * m[i][j] for i in range(3)) for j in range(3)]
        level = max(aq) - min(pm)
        n = 30 if quick else 100
        ham = exact_hamiltonian_events(a_int, p0, q0, n)
        br = exact_br_events(a_int, p0, q0, n)
        for (t, reg_h, ph, qh), (u, reg_b, pb, qb) in zip(ham, br):
            pp, qq = exact_project(a_int, pb, qb, level)
            if reg_h != reg_b or pp != ph or qq != qh:
                return False
        return True
    check("BR/Hamiltonian conjugacy (exact rational, zero tolerance)",
          conjugacy_exact)

    def time_reversal():
        sys_ = validate_game(EX1)
        rng = np.random.default_rng(9)
        p, q = _random_level_point(sys_, rng)
        n = 40
        fwd = integrate_hamiltonian(sys_, p, q, n)
        pn, qn = fwd.points[-1, :3], fwd.points[-1, 3:]
        back = integrate_hamiltonian(sys_, pn, qn, n - 1, direction=-1,
                                     initial_region=tuple(fwd.itinerary[n - 1]))
        vp, vq = hamiltonian_velocity(sys_, tuple(fwd.itinerary[0]))
        p_back = back.points[-1, :3] - fwd.times[0] * vp
        q_back = back.points[-1, 3:] - fwd.times[0] * vq
        return (np.max(np.abs(p_back - p)) < 1e-8
                and np.max(np.abs(q_back - q)) < 1e-8)
    check("time-reversal closure over 40 events", time_reversal)

    def return_map():
        sys_ = validate_game(EX2)
        chart = build_section_charts(sys_, CrossingPlane("B", (1, 2)))[0]
        t_map = loop_return_map(sys_, PERIOD6, chart)
        if abs(t_map.det - 1.0) > 1e-8:
            return False
        cls = classify_return_map(t_map)
        if cls.kind != "elliptic":
            return False
        x = chart_point(chart, cls.fixed_point)
        orb = integrate_hamiltonian(sys_, x[:3], x[3:], 6 * 25,
                                    initial_region=(1, 2))
        labels = orb.labels()
        if any(labels[k] != labels[k % 6] for k in range(len(labels) - 1)):
            return False
        # prediction against simulated hits from a nearby start
        start = cls.fixed_point + np.array([4e-3, 0.0])
        orb2 = integrate_hamiltonian(sys_, *np.split(
            chart_point(chart, start), 2), 6 * 110, initial_region=(1, 2))
        hits = section_hits(orb2, [chart])
        uv = start
        for hit in hits[:100]:
            uv = t_map(uv)
            if np.max(np.abs(uv - np.array([hit.u, hit.v]))) > 1e-8:
                return False
        return True
    check("six-loop return map: det, ellipticity, 100-hit prediction",
          return_map)

    if game_sys is not None:
        def user_game():
            rep = diagrams.check_conditions(diagrams.diagram_from_game(game_sys))
            if not rep.admissible:
                return False
            rng = np.random.default_rng(10)
            p, q = _random_level_point(game_sys, rng)
            orb = integrate_hamiltonian(game_sys, p, q, 500)
            hs = [hamiltonian(game_sys, row[:3], row[3:])
                  for row in orb.points[::11]]
            return max(abs(h - game_sys.flow_level) for h in hs) \
                < 1e-9 * max(1.0, game_sys.flow_level)
        check("user game: admissibility and conservation", user_game)

    all_ok = True
    for name, fn in checks:
        try:
            ok = bool(fn())
        except Exception as err:  # surfaced as a failure, not a crash
            ok = False
            name = f"{name} [{type(err).__name__}: {err}]"
        all_ok &= ok
        if stream is not None:
            stream.write(f"{'PASS' if ok else 'FAIL'}  {name}\n")
    return all_ok
