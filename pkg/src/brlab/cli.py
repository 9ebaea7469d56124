"""Command-line front end; all outputs are machine-readable JSON/CSV/JSONL.

Exit codes: 0 success, 1 invalid input, 2 assumption violation (the module
error is printed verbatim), 3 invariant-suite failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import _io, diagrams, flow, game
from .errors import BrlabError
from .flow import CrossingPlane, integrate_br, integrate_hamiltonian
from .game import hamiltonian, project_to_level_set, region_of, validate_game
from .returnmap import classify_return_map, itinerary_domain, loop_return_map
from .sections import build_section_charts, chart_point, section_hits
from .stats import (
    convergence_trace,
    region_time_fractions,
    time_fractions,
    transition_counts,
    visit_frequencies,
)

TOLERANCE_TARGETS = {
    "tie": (game, "EPS_TIE_REL"),
    "distinct": (game, "DISTINCT_REL"),
    "zero_sum": (game, "ZERO_SUM_RESIDUAL_REL"),
    "interior": (game, "EPS_INTERIOR"),
    "min_dt": (flow, "MIN_DT"),
    "event_rel": (flow, "DEGENERATE_REL"),
    "renorm_drift": (flow, "RENORM_DRIFT"),
}


def _parse_plane(text: str) -> CrossingPlane:
    side, _, pair = text.partition(":")
    i, j = (int(x) for x in pair.split(","))
    return CrossingPlane(side.strip().upper(), tuple(sorted((i, j))))


def _parse_itinerary(text: str) -> list[tuple[int, int]]:
    labels = []
    for tok in text.split(","):
        tok = tok.strip()
        if len(tok) != 2 or not tok.isdigit():
            raise ValueError(f"bad label {tok!r}; expected two digits like 12")
        labels.append((int(tok[0]), int(tok[1])))
    return labels


def _parse_coords(text: str):
    p_text, _, q_text = text.partition(":")
    p = np.array([float(x) for x in p_text.split(",")])
    q = np.array([float(x) for x in q_text.split(",")])
    return p, q


def _apply_tolerances(entries):
    for entry in entries or []:
        name, _, value = entry.partition("=")
        if name not in TOLERANCE_TARGETS:
            raise ValueError(f"unknown tolerance {name!r}; "
                             f"known: {sorted(TOLERANCE_TARGETS)}")
        val = float(value)
        if not 1e-15 <= val <= 1e-3:
            raise ValueError(f"tolerance {name}={val:g} outside [1e-15, 1e-3]")
        module, attr = TOLERANCE_TARGETS[name]
        setattr(module, attr, val)


def _load_system(spec: str):
    a, b = _io.load_game_file(spec)
    return validate_game(a, b)


def _plane_record(plane: CrossingPlane):
    return {"side": plane.side, "pair": list(plane.pair)}


def _diagram_record(d: diagrams.TransitionDiagram):
    return {
        "code": d.code,
        "code_hex": f"{d.code:#07x}",
        # bit layout: bits 0-8 horizontal (row-major over column pairs
        # {1,2},{1,3},{2,3}), bits 9-17 vertical likewise; set = min->max
        "arrows": [[list(src), list(dst)] for src, dst in d.arrows()],
    }


# --- subcommands -------------------------------------------------------------

def cmd_classify(args) -> int:
    sys_ = _load_system(args.game)
    d = diagrams.diagram_from_game(sys_)
    report = diagrams.check_conditions(d)
    loops = diagrams.short_loops(d)
    atlas = diagrams.cached_atlas()
    out = {
        "game": _io.game_hash(sys_.game.a, sys_.game.b),
        "diagram": _diagram_record(d),
        "conditions": {
            "row3cycle": list(report.row3cycle),
            "col3cycle": list(report.col3cycle),
            "dominated_rows": [list(x) for x in report.dominated_rows],
            "dominated_cols": [list(x) for x in report.dominated_cols],
            "sinks": [list(x) for x in report.sinks],
            "sources": [list(x) for x in report.sources],
            "alternating_cycles": [[list(c) for c in cyc]
                                   for cyc in report.alternating_cycles],
            "admissible": report.admissible,
        },
        "short_loops": [
            {"rows": list(sl.rows), "cols": list(sl.cols),
             "orientation": sl.orientation, "center": list(sl.center)}
            for sl in loops
        ],
        "short_loop_count": len(loops),
        "canonical_code": f"{diagrams.canonical_form(d):#07x}",
        "class_id": atlas.class_of(d),
    }
    text = _io.dump_json(out, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_enumerate(args) -> int:
    atlas = diagrams.cached_atlas()
    classes = []
    for cls in atlas.classes:
        rng = np.random.default_rng(np.uint64(args.seed) ^ np.uint64(cls.class_id))
        realization = diagrams.find_realization(cls.class_id, rng)
        classes.append({
            "classId": cls.class_id,
            "canonicalCode": f"{cls.canonical_code:#07x}",
            "shortLoops": cls.short_loops,
            "representative": _diagram_record(cls.representative),
            "rawCount": cls.member_count,
            "realization": realization.tolist(),
        })
    out = {
        "classes": classes,
        "raw_total": atlas.raw_total,
        "cond1_implied_by_rest": atlas.cond1_implied_by_rest,
        "seed": args.seed,
    }
    text = _io.dump_json(out, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_realize(args) -> int:
    rng = np.random.default_rng(np.uint64(args.seed) ^ np.uint64(args.class_id))
    matrix = diagrams.find_realization(args.class_id, rng)
    text = _io.dump_json({"class_id": args.class_id, "seed": args.seed,
                          "matrix": matrix.tolist()}, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def _random_start(sys_, rng, mode):
    for _ in range(1000):
        p = rng.dirichlet(np.ones(3))
        q = rng.dirichlet(np.ones(3))
        try:
            if mode == "ham":
                p, q = project_to_level_set(sys_, p, q, level=sys_.flow_level)
            region_of(sys_, p, q)
            if mode == "br" and hamiltonian(sys_, p, q) < 1e-6 * sys_.scale:
                continue
            return p, q
        except BrlabError:
            continue
    raise BrlabError("could not sample an admissible initial condition")


def _simulate_one(sys_, mode, seed, transitions, coords):
    rng = np.random.default_rng(np.uint64(seed))
    if coords is None:
        p, q = _random_start(sys_, rng, mode)
    else:
        p, q = coords
        if mode == "ham":
            p, q = project_to_level_set(sys_, p, q, level=sys_.flow_level)
    if mode == "ham":
        return integrate_hamiltonian(sys_, p, q, transitions)
    return integrate_br(sys_, p, q, transitions)


def _orbit_records(orbit, index, seed, ghash):
    yield {
        "header": True, "orbit": index, "mode": orbit.mode, "seed": seed,
        "game": ghash, "level": orbit.level,
        "renormalizations": orbit.renormalizations,
        "initial": {"p": orbit.initial.p.tolist(),
                    "q": orbit.initial.q.tolist(),
                    "region": list(map(int, orbit.itinerary[0]))},
    }
    for k in range(len(orbit)):
        plane = orbit.plane(k)
        row = orbit.points[k]
        yield {
            "k": k, "t": float(orbit.times[k]),
            "region": list(map(int, orbit.itinerary[k + 1])),
            "plane": _plane_record(plane),
            "p": row[:3].tolist(), "q": row[3:].tolist(),
        }


def cmd_simulate(args) -> int:
    sys_ = _load_system(args.game)
    ghash = _io.game_hash(sys_.game.a, sys_.game.b)
    coords = None
    if args.init == "coords":
        if not args.coords:
            raise ValueError("--init coords requires --coords p1,p2,p3:q1,q2,q3")
        coords = _parse_coords(args.coords)
    n_orbits = args.ensemble or 1
    seeds = [args.seed ^ i for i in range(n_orbits)]

    def run(i):
        return _simulate_one(sys_, args.mode, seeds[i], args.transitions, coords)

    threads = int(os.environ.get("BRLAB_THREADS", "0")) or (os.cpu_count() or 1)
    if n_orbits > 1 and threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(threads, n_orbits)) as pool:
            orbits = list(pool.map(
                _simulate_worker,
                [(sys_, args.mode, seeds[i], args.transitions, coords)
                 for i in range(n_orbits)]))
    else:
        orbits = [run(i) for i in range(n_orbits)]

    lines = []
    for i, orbit in enumerate(orbits):
        for rec in _orbit_records(orbit, i, seeds[i], ghash):
            lines.append(_io.dump_json(rec).rstrip("\n"))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _simulate_worker(payload):
    return _simulate_one(*payload)


def _read_orbits(path):
    """Parse orbit JSONL into per-orbit dicts with arrays."""
    import json

    orbits = []
    cur = None
    with open(path) as fh:
        for line in fh:
            rec = json.loads(line)
            if rec.get("header"):
                cur = {"mode": rec["mode"], "level": rec.get("level"),
                       "initial": rec["initial"], "times": [], "planes": [],
                       "points": [], "itinerary": [rec["initial"]["region"]]}
                orbits.append(cur)
            else:
                if cur is None:
                    raise ValueError("orbit file does not start with a header")
                cur["times"].append(rec["t"])
                cur["planes"].append(rec["plane"])
                cur["points"].append(rec["p"] + rec["q"])
                cur["itinerary"].append(rec["region"])
    out = []
    for rec in orbits:
        orbit = flow.Orbit(
            rec["mode"],
            flow.OrbitPoint(np.array(rec["initial"]["p"]),
                            np.array(rec["initial"]["q"]), 0.0),
            np.array(rec["times"]),
            None, np.array(rec["points"]).reshape(-1, 6),
            np.array(rec["itinerary"], dtype=np.int8),
            level=rec["level"])
        orbit._plane_dicts = rec["planes"]
        out.append(orbit)
    return out


def _orbit_plane(orbit, k) -> CrossingPlane:
    if getattr(orbit, "_plane_dicts", None) is not None:
        rec = orbit._plane_dicts[k]
        return CrossingPlane(rec["side"], tuple(rec["pair"]))
    return orbit.plane(k)


def cmd_stats(args) -> int:
    orbits = _read_orbits(args.orbit)
    if not orbits:
        raise ValueError("empty orbit file")
    qs, ps, tfs = [], [], []
    pooled = np.zeros((9, 9))
    for orbit in orbits:
        qs.append(visit_frequencies(orbit.itinerary[:-1]))
        raw = transition_counts(orbit.itinerary)
        pooled += raw
        if orbit.mode == "br":
            ps.append(time_fractions(orbit, args.time))
        else:
            tfs.append(region_time_fractions(orbit))
    out = {
        "orbits": len(orbits),
        "Q": (sum(qs) / len(qs)).tolist(),
        "transitions": (pooled / len(orbits)).tolist(),
        "trace": convergence_trace(orbits[0], parametrization=args.time),
    }
    if ps:
        out["P_BR"] = (sum(ps) / len(ps)).tolist()
        out["time"] = args.time
    if tfs:
        out["time_fractions_ham"] = (sum(tfs) / len(tfs)).tolist()
    text = _io.dump_json(out, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_sections(args) -> int:
    sys_ = _load_system(args.game)
    plane = _parse_plane(args.plane)
    orbits = _read_orbits(args.orbit)
    level = orbits[0].level if orbits and orbits[0].level else sys_.flow_level
    charts = build_section_charts(sys_, plane, level=level)
    ff = _io.format_float
    rows = ["plane_side,plane_pair,piece,hit_index,u,v,p1,p2,p3,q1,q2,q3"]
    count = 0
    for orbit in orbits:
        if orbit.mode != "hamiltonian":
            raise BrlabError("sections need a Hamiltonian-mode orbit")
        hits = section_hits(orbit, charts) if getattr(
            orbit, "_plane_dicts", None) is None else _hits_from_file(
                orbit, charts, plane)
        for hit in hits:
            rows.append(",".join(
                [plane.side, f"{plane.pair[0]}{plane.pair[1]}", str(hit.piece),
                 str(count)] + [ff(x) for x in (hit.u, hit.v)]
                + [ff(x) for x in hit.p] + [ff(x) for x in hit.q]))
            count += 1
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        _io.dump_json(_charts_record(plane, level, charts),
                      args.out + ".charts.json")
    else:
        sys.stdout.write(text)
    return 0


def _hits_from_file(orbit, charts, plane):
    from .sections import SectionHit, chart_coords

    by_piece = {c.piece: c for c in charts}
    hits = []
    for k in range(len(orbit)):
        if _orbit_plane(orbit, k) != plane:
            continue
        label = orbit.itinerary[k + 1]
        piece = int(label[0]) if plane.side == "B" else int(label[1])
        chart = by_piece[piece]
        x = orbit.points[k]
        u, v = chart_coords(chart, x)
        hits.append(SectionHit(len(hits), k, piece, float(u), float(v),
                               x[:3].copy(), x[3:].copy()))
    return hits


def _charts_record(plane, level, charts):
    return {
        "plane": _plane_record(plane),
        "level": level,
        "pieces": [
            {"piece": c.piece, "origin": c.origin.tolist(),
             "basis": c.basis.tolist(), "polygon": c.polygon.tolist(),
             "empty": c.is_empty}
            for c in charts
        ],
    }


def cmd_detect_qp(args) -> int:
    sys_ = _load_system(args.game)
    plane = _parse_plane(args.plane)
    loop = _parse_itinerary(args.itinerary)
    charts = build_section_charts(sys_, plane)
    from .returnmap import loop_transitions
    from .flow import plane_between

    piece = None
    for a, b in loop_transitions(loop):
        pl = plane_between(a, b)
        if pl == plane:
            piece = a[0] if plane.side == "B" else a[1]
            break
    if piece is None:
        raise BrlabError(f"itinerary never crosses plane {args.plane}")
    chart = next(c for c in charts if c.piece == piece)
    t_map = loop_return_map(sys_, loop, chart)
    cls = classify_return_map(t_map)
    domain = itinerary_domain(sys_, loop, chart)

    verified = None
    fixed_ambient = None
    if cls.fixed_point is not None:
        fixed_ambient = chart_point(chart, cls.fixed_point)
        dst = next(b for a, b in loop_transitions(loop)
                   if plane_between(a, b) == plane
                   and (a[0] if plane.side == "B" else a[1]) == piece)
        try:
            orb = integrate_hamiltonian(sys_, fixed_ambient[:3],
                                        fixed_ambient[3:],
                                        4 * len(loop), initial_region=dst,
                                        level=chart.level)
            labels = orb.labels()
            verified = all(labels[k] == labels[k % len(loop)]
                           for k in range(len(labels) - 1))
        except BrlabError:
            verified = False

    out = {
        "itinerary": [list(lab) for lab in loop],
        "period": len(loop),
        "plane": _plane_record(plane),
        "piece": piece,
        "level": chart.level,
        "map": {"m": t_map.m.tolist(), "b": t_map.b.tolist()},
        "trace": cls.trace,
        "det": t_map.det,
        "kind": cls.kind,
        "order": cls.order,
        "angle": cls.angle,
        "rotation_number": (None if cls.angle is None
                            else (cls.angle / (2.0 * np.pi)) % 1.0),
        "fixed_point": (None if cls.fixed_point is None
                        else cls.fixed_point.tolist()),
        "fixed_point_ambient": (None if fixed_ambient is None
                                else fixed_ambient.tolist()),
        "fixed_point_verified": verified,
        "ellipse": None if cls.ellipse is None else cls.ellipse.tolist(),
        "domain_polygon": domain.polygon.tolist(),
        "domain": {
            "kind": domain.kind,
            "center": None if domain.center is None else domain.center.tolist(),
            "form": None if domain.form is None else domain.form.tolist(),
            "radius": domain.radius,
        },
        "chart": {
            "origin": chart.origin.tolist(),
            "basis": chart.basis.tolist(),
            "polygon": chart.polygon.tolist(),
        },
    }
    text = _io.dump_json(out, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    from . import verify as verify_mod

    game_sys = _load_system(args.game) if args.game else None
    ok = verify_mod.run_invariant_suite(game_sys, quick=args.quick,
                                        stream=sys.stdout)
    return 0 if ok else 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="brlab",
        description="Best-response flows of 3x3 zero-sum games: exact "
                    "simulation, transition-diagram classification, return "
                    "maps and statistics.")
    parser.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="tolerance override, bounded to [1e-15, 1e-3]")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="transition diagram and class of a game")
    p.add_argument("--game", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("enumerate", help="the 23 diagram classes with realizations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("realize", help="sample an integer matrix of a class")
    p.add_argument("--class-id", type=int, required=True, dest="class_id")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("simulate", help="integrate orbits to JSONL")
    p.add_argument("--game", required=True)
    p.add_argument("--mode", choices=("ham", "br"), default="ham")
    p.add_argument("--init", choices=("random", "coords"), default="random")
    p.add_argument("--coords", help="p1,p2,p3:q1,q2,q3 (with --init coords)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transitions", type=int, default=1000)
    p.add_argument("--ensemble", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="frequency statistics of an orbit file")
    p.add_argument("--orbit", required=True)
    p.add_argument("--time", choices=("br", "fp"), default="br")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sections", help="section hits of an orbit file to CSV")
    p.add_argument("--orbit", required=True)
    p.add_argument("--game", required=True)
    p.add_argument("--plane", required=True, help="SIDE:i,j e.g. B:1,2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sections)

    p = sub.add_parser("detect-qp", help="return map of a periodic itinerary")
    p.add_argument("--game", required=True)
    p.add_argument("--itinerary", required=True, help="e.g. 11,12,22,23,33,31")
    p.add_argument("--plane", required=True, help="SIDE:i,j")
    p.add_argument("--out")
    p.set_defaults(func=cmd_detect_qp)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--game")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        _apply_tolerances(args.tol)
        return args.func(args)
    except BrlabError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
