"""Transition diagrams, admissibility conditions, and the 23-class enumeration.

A diagram assigns a direction to each of the 18 comparisons between
neighbouring cells of the 3x3 region grid (9 horizontal, 9 vertical) and is
encoded as an 18-bit integer:

* bit ``(i-1)*3 + P`` (horizontal), ``P`` indexing the column pair
  {1,2}, {1,3}, {2,3}: set iff the arrow runs (i, min) -> (i, max);
* bit ``9 + (j-1)*3 + P`` (vertical) over row pairs likewise.

For a validated game the arrows are induced by payoff comparisons of the
canonical matrix ``m``: vertically (i,j) -> (i',j) iff m[i',j] > m[i,j],
horizontally (i,j) -> (i,j') iff m[i,j] > m[i,j'].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import RealizationNotFound, TheoremViolation
from .game import GameSystem

__all__ = [
    "ClassAtlas",
    "ConditionReport",
    "DiagramClass",
    "ShortLoop",
    "TransitionDiagram",
    "canonical_form",
    "check_conditions",
    "diagram_from_game",
    "enumerate_classes",
    "find_realization",
    "short_loops",
]

PAIRS = ((1, 2), (1, 3), (2, 3))
_PIDX = {(1, 2): 0, (2, 1): 0, (1, 3): 1, (3, 1): 1, (2, 3): 2, (3, 2): 2}


def _hbit(i: int, j: int, j2: int) -> int:
    return (i - 1) * 3 + _PIDX[(j, j2)]


def _vbit(j: int, i: int, i2: int) -> int:
    return 9 + (j - 1) * 3 + _PIDX[(i, i2)]


@dataclass(frozen=True)
class TransitionDiagram:
    """The 18 arrow orientations over the 3x3 cell grid."""

    code: int

    def __post_init__(self):
        if not 0 <= self.code < 1 << 18:
            raise ValueError(f"code out of range: {self.code}")

    @classmethod
    def from_matrix(cls, m) -> "TransitionDiagram":
        m = np.asarray(m, dtype=float)
        code = 0
        for i in range(3):
            for p, (a, b) in enumerate(PAIRS):
                if m[i, a - 1] > m[i, b - 1]:
                    code |= 1 << (i * 3 + p)
        for j in range(3):
            for p, (a, b) in enumerate(PAIRS):
                if m[b - 1, j] > m[a - 1, j]:
                    code |= 1 << (9 + j * 3 + p)
        return cls(code)

    def has_arrow(self, src: tuple[int, int], dst: tuple[int, int]) -> bool:
        """True iff the arrow src -> dst is present (cells differ in one index)."""
        (i, j), (i2, j2) = src, dst
        if i == i2 and j != j2:
            bit = (self.code >> _hbit(i, j, j2)) & 1
            return bit == (1 if j < j2 else 0)
        if j == j2 and i != i2:
            bit = (self.code >> _vbit(j, i, i2)) & 1
            return bit == (1 if i < i2 else 0)
        raise ValueError(f"cells {src} and {dst} are not in one line")

    def arrows(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        out = []
        for i in range(1, 4):
            for a, b in PAIRS:
                src, dst = ((i, a), (i, b)) if (self.code >> _hbit(i, a, b)) & 1 \
                    else ((i, b), (i, a))
                out.append((src, dst))
        for j in range(1, 4):
            for a, b in PAIRS:
                src, dst = (((a, j), (b, j)) if (self.code >> _vbit(j, a, b)) & 1
                            else ((b, j), (a, j)))
                out.append((src, dst))
        return out

    def out_arrows(self, cell: tuple[int, int]) -> list[tuple[int, int]]:
        i, j = cell
        targets = [(i, j2) for j2 in range(1, 4) if j2 != j] + \
                  [(i2, j) for i2 in range(1, 4) if i2 != i]
        return [t for t in targets if self.has_arrow(cell, t)]

    def transformed(self, row_perm=(1, 2, 3), col_perm=(1, 2, 3),
                    transpose: bool = False) -> "TransitionDiagram":
        """Relabel cells (i, j) -> (row_perm[i], col_perm[j]), then optionally
        transpose the grid (swap the players); arrows are carried along."""
        code = 0
        for (src, dst) in self.arrows():
            s = (row_perm[src[0] - 1], col_perm[src[1] - 1])
            d = (row_perm[dst[0] - 1], col_perm[dst[1] - 1])
            if transpose:
                s, d = (s[1], s[0]), (d[1], d[0])
            if s[0] == d[0]:
                if s[1] < d[1]:
                    code |= 1 << _hbit(s[0], s[1], d[1])
            else:
                if s[0] < d[0]:
                    code |= 1 << _vbit(s[1], s[0], d[0])
        return TransitionDiagram(code)

    def to_dot(self) -> str:
        lines = ["digraph transition_diagram {", "  node [shape=circle];"]
        for i in range(1, 4):
            for j in range(1, 4):
                lines.append(f'  c{i}{j} [label="{i},{j}" pos="{j},{4 - i}!"];')
        for (src, dst) in self.arrows():
            lines.append(f"  c{src[0]}{src[1]} -> c{dst[0]}{dst[1]};")
        lines.append("}")
        return "\n".join(lines)


def diagram_from_game(sys: GameSystem) -> TransitionDiagram:
    return TransitionDiagram.from_matrix(sys.m)


@dataclass(frozen=True)
class ShortLoop:
    """Directed 4-cycle over a 2x2 cell rectangle.

    ``center`` is the grid junction encircled by the loop, named by the
    boundary between the two rows/columns: pair {a, a+1} -> a, {1, 3} -> 3.
    Orientation "ccw" means the cycle runs (min_row, min_col) ->
    (max_row, min_col) first (counterclockwise with the row axis downward).
    """

    rows: tuple[int, int]
    cols: tuple[int, int]
    orientation: str
    center: tuple[int, int]


def _boundary(a: int, b: int) -> int:
    return a if b == a + 1 else 3


def short_loops(d: TransitionDiagram) -> list[ShortLoop]:
    loops = []
    for (i, i2) in PAIRS:
        for (j, j2) in PAIRS:
            ver_j = (d.code >> _vbit(j, i, i2)) & 1
            ver_j2 = (d.code >> _vbit(j2, i, i2)) & 1
            hor_i = (d.code >> _hbit(i, j, j2)) & 1
            hor_i2 = (d.code >> _hbit(i2, j, j2)) & 1
            if ver_j != ver_j2 and hor_i != hor_i2 and ver_j == hor_i2:
                orientation = "ccw" if ver_j == 1 else "cw"
                loops.append(ShortLoop((i, i2), (j, j2), orientation,
                                       (_boundary(i, i2), _boundary(j, j2))))
    return loops


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the five admissibility conditions.

    Dominated pairs are ordered (dominated, dominator): all three arrows
    between the two lines point from the first to the second.
    """

    row3cycle: tuple[bool, bool, bool]
    col3cycle: tuple[bool, bool, bool]
    dominated_rows: list[tuple[int, int]]
    dominated_cols: list[tuple[int, int]]
    sinks: list[tuple[int, int]]
    sources: list[tuple[int, int]]
    alternating_cycles: list[tuple[tuple[int, int], ...]]

    @property
    def admissible(self) -> bool:
        return not (any(self.row3cycle) or any(self.col3cycle)
                    or self.dominated_rows or self.dominated_cols
                    or self.sinks or self.sources or self.alternating_cycles)


def _line_cycle(d12: int, d13: int, d23: int) -> bool:
    # 1->2->3->1 is (1,1,0) in (d12, d23, d13); the reverse is (0,0,1).
    return d12 == d23 != d13


def _find_alternating_cycle(d: TransitionDiagram):
    """Search the auxiliary graph (horizontal arrows kept, vertical reversed)
    for a directed cycle alternating horizontal/vertical moves.

    One reversal suffices: reversing the vertical family instead yields the
    same cycles traversed backwards.  States are (cell, type of last move).
    """
    moves = {}
    for cell in itertools.product(range(1, 4), repeat=2):
        i, j = cell
        hor = [(i, j2) for j2 in range(1, 4) if j2 != j and d.has_arrow(cell, (i, j2))]
        ver = [(i2, j) for i2 in range(1, 4) if i2 != i and d.has_arrow((i2, j), cell)]
        moves[(cell, "V")] = [((c, "H")) for c in hor]
        moves[(cell, "H")] = [((c, "V")) for c in ver]

    WHITE, GREY, BLACK = 0, 1, 2
    color = {s: WHITE for s in moves}
    for start in moves:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(moves[start]))]
        color[start] = GREY
        path = [start]
        while stack:
            state, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GREY:
                    k = path.index(nxt)
                    cells = tuple(s[0] for s in path[k:]) + (nxt[0],)
                    return cells
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, iter(moves[nxt])))
                    path.append(nxt)
                    advanced = True
                    break
            if not advanced:
                color[state] = BLACK
                stack.pop()
                path.pop()
    return None


def is_alternating_cycle(d: TransitionDiagram, cells) -> bool:
    """Re-verify a witness against Definition: a closed sequence whose moves
    follow the arrows in one family and oppose them in the other."""
    if len(cells) < 3 or cells[0] != cells[-1]:
        return False
    for case in (0, 1):
        ok = True
        for a, b in zip(cells, cells[1:]):
            vertical = a[1] == b[1] and a[0] != b[0]
            horizontal = a[0] == b[0] and a[1] != b[1]
            if not (vertical or horizontal):
                ok = False
                break
            follow = d.has_arrow(a, b)
            want_follow = (case == 0) == vertical
            if follow != want_follow:
                ok = False
                break
        if ok:
            return True
    return False


def check_conditions(d: TransitionDiagram) -> ConditionReport:
    code = d.code
    row3 = tuple(
        _line_cycle((code >> _hbit(i, 1, 2)) & 1, (code >> _hbit(i, 1, 3)) & 1,
                    (code >> _hbit(i, 2, 3)) & 1)
        for i in range(1, 4))
    col3 = tuple(
        _line_cycle((code >> _vbit(j, 1, 2)) & 1, (code >> _vbit(j, 1, 3)) & 1,
                    (code >> _vbit(j, 2, 3)) & 1)
        for j in range(1, 4))

    dom_rows = []
    for (i, i2) in PAIRS:
        bits = [(code >> _vbit(j, i, i2)) & 1 for j in range(1, 4)]
        if bits in ([1, 1, 1], [0, 0, 0]):
            dom_rows.append((i, i2) if bits[0] else (i2, i))
    dom_cols = []
    for (j, j2) in PAIRS:
        bits = [(code >> _hbit(i, j, j2)) & 1 for i in range(1, 4)]
        if bits in ([1, 1, 1], [0, 0, 0]):
            dom_cols.append((j, j2) if bits[0] else (j2, j))

    sinks, sources = [], []
    for cell in itertools.product(range(1, 4), repeat=2):
        i, j = cell
        neighbours = [(i, j2) for j2 in range(1, 4) if j2 != j] + \
                     [(i2, j) for i2 in range(1, 4) if i2 != i]
        inward = sum(d.has_arrow(n, cell) for n in neighbours)
        if inward == 4:
            sinks.append(cell)
        elif inward == 0:
            sources.append(cell)

    cycle = _find_alternating_cycle(d)
    cycles = [cycle] if cycle is not None else []
    return ConditionReport(row3, col3, dom_rows, dom_cols, sinks, sources, cycles)


# --- The 72-element symmetry group -----------------------------------------

def _transform_table(row_perm, col_perm, transpose):
    """For each target bit: (source bit, flip) under the group element."""
    inv_r = [0] * 4
    inv_c = [0] * 4
    for k in range(3):
        inv_r[row_perm[k]] = k + 1
        inv_c[col_perm[k]] = k + 1
    table = []
    for r in range(1, 4):
        for (c, dd) in PAIRS:
            if transpose:
                # new hor bit (r, {c,d}) carries the pre-transpose ver bit
                line, a, b = inv_c[r], inv_r[c], inv_r[dd]
                src = _vbit(line, min(a, b), max(a, b))
            else:
                line, a, b = inv_r[r], inv_c[c], inv_c[dd]
                src = _hbit(line, min(a, b), max(a, b))
            table.append((src, a > b))
    for cc in range(1, 4):
        for (r, s) in PAIRS:
            if transpose:
                line, a, b = inv_r[cc], inv_c[r], inv_c[s]
                src = _hbit(line, min(a, b), max(a, b))
            else:
                line, a, b = inv_c[cc], inv_r[r], inv_r[s]
                src = _vbit(line, min(a, b), max(a, b))
            table.append((src, a > b))
    return table


@lru_cache(maxsize=1)
def _group_tables():
    perms = list(itertools.permutations((1, 2, 3)))
    tables = []
    for rp in perms:
        for cp in perms:
            for tr in (False, True):
                tables.append(_transform_table(rp, cp, tr))
    return tables


def _apply_table(code: int, table) -> int:
    out = 0
    for tgt, (src, flip) in enumerate(table):
        bit = (code >> src) & 1
        if flip:
            bit ^= 1
        out |= bit << tgt
    return out


def canonical_form(d: TransitionDiagram) -> int:
    """Minimum code over the 72 transforms (6 x 6 permutations x transpose)."""
    return min(_apply_table(d.code, t) for t in _group_tables())


# --- Exhaustive enumeration -------------------------------------------------

@dataclass(frozen=True)
class DiagramClass:
    class_id: int
    canonical_code: int
    short_loops: int
    representative: TransitionDiagram
    member_count: int


@dataclass(frozen=True)
class ClassAtlas:
    classes: list[DiagramClass]
    raw_total: int
    cond1_implied_by_rest: bool

    def class_of(self, d: TransitionDiagram) -> int:
        key = canonical_form(d)
        for cls in self.classes:
            if cls.canonical_code == key:
                return cls.class_id
        raise KeyError(f"diagram {d.code:#07x} is not admissible")


def _admissible_mask():
    """Vectorized conditions (1)-(4) over all 2^18 codes."""
    codes = np.arange(1 << 18, dtype=np.uint32)
    bit = [(codes >> k) & 1 for k in range(18)]

    ok = np.ones(codes.shape, dtype=bool)
    for i in range(1, 4):
        d12, d13, d23 = (bit[_hbit(i, 1, 2)], bit[_hbit(i, 1, 3)],
                         bit[_hbit(i, 2, 3)])
        ok &= ~((d12 == d23) & (d12 != d13))
    for j in range(1, 4):
        d12, d13, d23 = (bit[_vbit(j, 1, 2)], bit[_vbit(j, 1, 3)],
                         bit[_vbit(j, 2, 3)])
        ok &= ~((d12 == d23) & (d12 != d13))

    for (i, i2) in PAIRS:
        b0, b1, b2 = (bit[_vbit(j, i, i2)] for j in (1, 2, 3))
        ok &= ~((b0 == b1) & (b1 == b2))
    for (j, j2) in PAIRS:
        b0, b1, b2 = (bit[_hbit(i, j, j2)] for i in (1, 2, 3))
        ok &= ~((b0 == b1) & (b1 == b2))
    cond12 = ok.copy()

    no_sink = np.ones(codes.shape, dtype=bool)
    no_source = np.ones(codes.shape, dtype=bool)
    for i in range(1, 4):
        for j in range(1, 4):
            inward = []
            for j2 in range(1, 4):
                if j2 != j:
                    b = bit[_hbit(i, j, j2)]
                    inward.append(b == (0 if j < j2 else 1))
            for i2 in range(1, 4):
                if i2 != i:
                    b = bit[_vbit(j, i, i2)]
                    inward.append(b == (0 if i < i2 else 1))
            all_in = inward[0] & inward[1] & inward[2] & inward[3]
            all_out = ~(inward[0] | inward[1] | inward[2] | inward[3])
            no_sink &= ~all_in
            no_source &= ~all_out
    return cond12, no_sink & no_source


def enumerate_classes() -> ClassAtlas:
    """Iterate all 2^18 diagrams, keep those passing conditions (1)-(5), and
    group them by canonical form.

    Raises :class:`TheoremViolation` unless there are exactly 23 classes with
    short-loop distribution {3: 2, 4: 15, 5: 5, 6: 1}.
    """
    cond12, cond34 = _admissible_mask()
    survivors = np.nonzero(cond12 & cond34)[0]
    admissible = [int(c) for c in survivors
                  if _find_alternating_cycle(TransitionDiagram(int(c))) is None]

    # Side report: is condition (1) implied by (2)-(5)?
    only234 = np.nonzero(~cond12 & cond34)[0]
    implied = True
    for c in only234:
        d = TransitionDiagram(int(c))
        rep = check_conditions(d)
        if (not rep.dominated_rows and not rep.dominated_cols
                and not rep.alternating_cycles
                and (any(rep.row3cycle) or any(rep.col3cycle))):
            implied = False
            break

    groups: dict[int, list[int]] = {}
    for c in admissible:
        groups.setdefault(canonical_form(TransitionDiagram(c)), []).append(c)

    loop_counts = {}
    for key, members in groups.items():
        counts = {len(short_loops(TransitionDiagram(c))) for c in members}
        if len(counts) != 1:
            raise TheoremViolation(
                f"short-loop count not constant on class {key:#07x}: {counts}")
        loop_counts[key] = counts.pop()

    ordered = sorted(groups, key=lambda k: (loop_counts[k], k))
    classes = [
        DiagramClass(class_id=n + 1, canonical_code=key,
                     short_loops=loop_counts[key],
                     representative=TransitionDiagram(key),
                     member_count=len(groups[key]))
        for n, key in enumerate(ordered)
    ]

    if len(classes) != 23:
        raise TheoremViolation(f"expected 23 classes, found {len(classes)}")
    dist = {}
    for cls in classes:
        dist[cls.short_loops] = dist.get(cls.short_loops, 0) + 1
    if dist != {3: 2, 4: 15, 5: 5, 6: 1}:
        raise TheoremViolation(f"short-loop distribution {dist}")
    return ClassAtlas(classes=classes, raw_total=len(admissible),
                      cond1_implied_by_rest=implied)


@lru_cache(maxsize=1)
def cached_atlas() -> ClassAtlas:
    return enumerate_classes()


@lru_cache(maxsize=1)
def _code_to_class() -> dict[int, int]:
    atlas = cached_atlas()
    cond12, cond34 = _admissible_mask()
    survivors = np.nonzero(cond12 & cond34)[0]
    by_canonical = {cls.canonical_code: cls.class_id for cls in atlas.classes}
    mapping = {}
    for c in survivors:
        d = TransitionDiagram(int(c))
        if _find_alternating_cycle(d) is None:
            mapping[int(c)] = by_canonical[canonical_form(d)]
    return mapping


def find_realization(class_id: int, rng, max_attempts: int = 10**7) -> np.ndarray:
    """Rejection-sample an integer matrix whose game (A, -A) realizes the class.

    Entries are uniform in [-99, 99], matching the magnitude of all known
    example matrices; the result is deterministic for a given generator state.
    """
    from .game import validate_game
    from .errors import BrlabError

    if not 1 <= class_id <= 23:
        raise ValueError(f"class_id must be 1..23, got {class_id}")
    lookup = _code_to_class()
    for _ in range(max_attempts):
        a = rng.integers(-99, 100, size=(3, 3))
        af = a.astype(float)
        cols_ok = all(len({a[0, j], a[1, j], a[2, j]}) == 3 for j in range(3))
        rows_ok = all(len({a[i, 0], a[i, 1], a[i, 2]}) == 3 for i in range(3))
        if not (cols_ok and rows_ok):
            continue
        code = TransitionDiagram.from_matrix(af).code
        if lookup.get(code) != class_id:
            continue
        try:
            validate_game(af)
        except BrlabError:
            continue
        return a
    raise RealizationNotFound(f"class {class_id}: no realization in {max_attempts} samples")
