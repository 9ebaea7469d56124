import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brlab.diagrams import (
    PAIRS,
    TransitionDiagram,
    _hbit,
    _vbit,
    canonical_form,
    cached_atlas,
    check_conditions,
    diagram_from_game,
    find_realization,
    is_alternating_cycle,
    short_loops,
)
from brlab import validate_game

from conftest import EX2, random_game_matrix

# Frozen from direct pairwise comparisons of the Example 2 matrix.
EX2_ARROWS = {
    ((1, 1), (1, 2)), ((1, 1), (1, 3)), ((1, 3), (1, 2)),
    ((2, 2), (2, 1)), ((2, 2), (2, 3)), ((2, 1), (2, 3)),
    ((3, 2), (3, 1)), ((3, 3), (3, 2)), ((3, 3), (3, 1)),
    ((2, 1), (1, 1)), ((3, 1), (2, 1)), ((3, 1), (1, 1)),
    ((1, 2), (2, 2)), ((3, 2), (2, 2)), ((1, 2), (3, 2)),
    ((2, 3), (1, 3)), ((2, 3), (3, 3)), ((1, 3), (3, 3)),
}

# First verified run of the exhaustive enumeration (regression pin).
RAW_ADMISSIBLE_TOTAL = 1596


def diagram_from_arrows(arrows):
    code = 0
    for (src, dst) in arrows:
        if src[0] == dst[0] and src[1] < dst[1]:
            code |= 1 << _hbit(src[0], src[1], dst[1])
        elif src[1] == dst[1] and src[0] < dst[0]:
            code |= 1 << _vbit(src[1], src[0], dst[0])
    return TransitionDiagram(code)


def test_example2_diagram_arrows(ex2):
    d = diagram_from_game(ex2)
    assert set(d.arrows()) == EX2_ARROWS
    assert d.has_arrow((1, 1), (1, 2))
    assert d.has_arrow((1, 2), (2, 2))
    # the period-6 loop is a directed path in the diagram
    loop = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 1), (1, 1)]
    assert all(d.has_arrow(a, b) for a, b in zip(loop, loop[1:]))


def test_diagram_invariant_under_linear_equivalence(ex1):
    a = ex1.game.a
    sys2 = validate_game(2.5 * a + np.array([3.0, -7.0, 11.0])[None, :], -a)
    assert diagram_from_game(sys2).code == diagram_from_game(ex1).code


def test_example2_short_loops(ex2):
    loops = short_loops(diagram_from_game(ex2))
    assert len(loops) == 6
    rects = {(sl.rows, sl.cols) for sl in loops}
    assert rects == {
        ((1, 2), (1, 2)), ((1, 2), (2, 3)), ((1, 3), (1, 2)),
        ((1, 3), (1, 3)), ((2, 3), (1, 3)), ((2, 3), (2, 3)),
    }
    for sl in loops:
        # the four rectangle arrows form a directed cycle
        (i, i2), (j, j2) = sl.rows, sl.cols
        cells = [(i, j), (i2, j), (i2, j2), (i, j2), (i, j)]
        d = diagram_from_game(ex2)
        forward = all(d.has_arrow(a, b) for a, b in zip(cells, cells[1:]))
        backward = all(d.has_arrow(b, a) for a, b in zip(cells, cells[1:]))
        assert forward or backward


def test_example2_conditions_pass(ex2):
    rep = check_conditions(diagram_from_game(ex2))
    assert rep.admissible


def test_row_three_cycle_flagged(ex2):
    d = diagram_from_game(ex2)
    # rewire row 1 into (1,1)->(1,2), (1,2)->(1,3), (1,3)->(1,1)
    code = d.code
    code |= 1 << _hbit(1, 1, 2)
    code |= 1 << _hbit(1, 2, 3)
    code &= ~(1 << _hbit(1, 1, 3))
    rep = check_conditions(TransitionDiagram(code))
    assert rep.row3cycle[0]


def test_source_and_sink_configuration():
    # Lemma-4-style configuration: source at (2,2), sink at (2,1).
    arrows = [
        ((1, 2), (1, 1)), ((1, 3), (1, 1)), ((1, 2), (1, 3)),
        ((2, 2), (2, 1)), ((2, 3), (2, 1)), ((2, 2), (2, 3)),
        ((3, 2), (3, 1)), ((3, 3), (3, 1)), ((3, 3), (3, 2)),
        ((1, 1), (2, 1)), ((3, 1), (2, 1)), ((3, 1), (1, 1)),
        ((2, 2), (1, 2)), ((2, 2), (3, 2)), ((3, 2), (1, 2)),
        ((2, 3), (1, 3)), ((3, 3), (2, 3)), ((1, 3), (3, 3)),
    ]
    rep = check_conditions(diagram_from_arrows(arrows))
    assert rep.sources == [(2, 2)]
    assert rep.sinks == [(2, 1)]


def test_alternating_cycle_witness_reverifies():
    rng = np.random.default_rng(20)
    seen = 0
    while seen < 25:
        d = TransitionDiagram(int(rng.integers(0, 1 << 18)))
        rep = check_conditions(d)
        for cyc in rep.alternating_cycles:
            assert is_alternating_cycle(d, cyc)
            seen += 1


def test_transform_matches_table_implementation():
    rng = np.random.default_rng(4)
    perms = list(itertools.permutations((1, 2, 3)))
    for _ in range(50):
        d = TransitionDiagram(int(rng.integers(0, 1 << 18)))
        rp = perms[rng.integers(6)]
        cp = perms[rng.integers(6)]
        tr = bool(rng.integers(2))
        from brlab.diagrams import _apply_table, _transform_table
        assert d.transformed(rp, cp, tr).code == _apply_table(
            d.code, _transform_table(rp, cp, tr))


def test_group_soundness():
    rng = np.random.default_rng(8)
    perms = list(itertools.permutations((1, 2, 3)))
    for _ in range(100):
        d = TransitionDiagram(int(rng.integers(0, 1 << 18)))
        key = canonical_form(d)
        for rp in perms:
            for cp in perms:
                for tr in (False, True):
                    assert canonical_form(d.transformed(rp, cp, tr)) == key


def test_transpose_of_matrix_diagram():
    # transpose equivalence corresponds to the game (-A', A') swap
    rng = np.random.default_rng(17)
    a, _ = random_game_matrix(rng)
    d = TransitionDiagram.from_matrix(a)
    dt = TransitionDiagram.from_matrix(-a.T)
    assert d.transformed(transpose=True).code == dt.code
    assert canonical_form(d) == canonical_form(dt)


def test_enumeration_reproduces_theorem():
    atlas = cached_atlas()
    assert len(atlas.classes) == 23
    dist = {}
    for cls in atlas.classes:
        dist[cls.short_loops] = dist.get(cls.short_loops, 0) + 1
    assert dist == {3: 2, 4: 15, 5: 5, 6: 1}
    assert atlas.raw_total == RAW_ADMISSIBLE_TOTAL
    assert sum(c.member_count for c in atlas.classes) == atlas.raw_total
    # class ids ordered by (short loops, canonical code)
    keys = [(c.short_loops, c.canonical_code) for c in atlas.classes]
    assert keys == sorted(keys)
    assert [c.class_id for c in atlas.classes] == list(range(1, 24))


def test_example_games_classified(ex1, ex2):
    atlas = cached_atlas()
    d1, d2 = diagram_from_game(ex1), diagram_from_game(ex2)
    assert canonical_form(d1) != canonical_form(d2)
    assert atlas.class_of(d2) == 23  # the unique six-loop class
    assert len(short_loops(d1)) == 4


def test_necessity_on_random_games():
    rng = np.random.default_rng(123)
    for _ in range(100):
        _, sys = random_game_matrix(rng)
        rep = check_conditions(diagram_from_game(sys))
        assert rep.admissible


def _rows_differ_positions(d, i, i2):
    return [pair for pair in PAIRS
            if ((d.code >> _hbit(i, *pair)) & 1) != ((d.code >> _hbit(i2, *pair)) & 1)]


def test_short_loop_row_lemmas():
    atlas = cached_atlas()
    rng = np.random.default_rng(5)
    members = [cls.representative for cls in atlas.classes]
    for d in members:
        loops = short_loops(d)
        assert 3 <= len(loops) <= 6
        for (i, i2) in PAIRS:
            between = [sl for sl in loops if sl.rows == (i, i2)]
            assert len(between) <= 2
            differ = _rows_differ_positions(d, i, i2)
            if len(differ) == 2:
                assert len(between) >= 1
            if len(differ) == 3:
                assert len(between) == 2
    del rng


@settings(max_examples=200, deadline=None)
@given(st.integers(0, (1 << 18) - 1))
def test_alternating_cycles_match_order_realizability(code):
    """Given condition (1), absence of alternating cycles is equivalent to
    acyclicity of the comparison graph (vertical arrows kept, horizontal
    reversed), i.e. to the existence of a compatible entry ordering."""
    d = TransitionDiagram(code)
    rep = check_conditions(d)
    if any(rep.row3cycle) or any(rep.col3cycle):
        return
    edges = []
    for (src, dst) in d.arrows():
        if src[1] == dst[1]:
            edges.append((src, dst))
        else:
            edges.append((dst, src))
    # Kahn's algorithm on the 9 cells
    cells = [(i, j) for i in range(1, 4) for j in range(1, 4)]
    indeg = {c: 0 for c in cells}
    for _, b in edges:
        indeg[b] += 1
    queue = [c for c in cells if indeg[c] == 0]
    seen = 0
    while queue:
        c = queue.pop()
        seen += 1
        for a, b in edges:
            if a == c:
                indeg[b] -= 1
                if indeg[b] == 0:
                    queue.append(b)
    acyclic = seen == len(cells)
    assert acyclic == (not rep.alternating_cycles)


def test_find_realization_deterministic():
    atlas = cached_atlas()
    a1 = find_realization(23, np.random.default_rng(42))
    a2 = find_realization(23, np.random.default_rng(42))
    assert np.array_equal(a1, a2)
    d = diagram_from_game(validate_game(a1.astype(float)))
    assert atlas.class_of(d) == 23
    assert len(short_loops(d)) == 6


def test_find_realization_one_of_each_loop_count():
    atlas = cached_atlas()
    by_loops = {}
    for cls in atlas.classes:
        by_loops.setdefault(cls.short_loops, cls.class_id)
    for n_loops, class_id in sorted(by_loops.items()):
        a = find_realization(class_id, np.random.default_rng(100 + class_id))
        d = diagram_from_game(validate_game(a.astype(float)))
        assert atlas.class_of(d) == class_id
        assert len(short_loops(d)) == n_loops


def test_to_dot(ex2):
    dot = diagram_from_game(ex2).to_dot()
    assert dot.startswith("digraph")
    assert dot.count("->") == 18
