"""Game representation, standing assumptions, equilibrium and level-set geometry.

A validated 3x3 game is held in an immutable :class:`GameSystem`.  All
comparisons of payoffs are done on the canonical matrix ``m`` (the input
matrix ``A`` shifted by the column offsets of the zero-sum witness), which
equals ``A`` whenever ``B = -A``.  Both players' best responses, the
Hamiltonian and the equilibrium are expressed through ``m`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AtEquilibrium,
    DegenerateMatrix,
    NoInteriorEquilibrium,
    NotZeroSumEquivalent,
    OnIndifferencePlane,
    OutsideSimplex,
)

EPS_SIMPLEX = 1e-12
EPS_INTERIOR = 1e-9
EPS_H = 1e-12
EPS_TIE_REL = 1e-9
DISTINCT_REL = 1e-9
ZERO_SUM_RESIDUAL_REL = 1e-9
MAX_CONDITION = 1e12

__all__ = [
    "BimatrixGame",
    "GameSystem",
    "NashData",
    "ZeroSumWitness",
    "best_responses",
    "hamiltonian",
    "project_to_level_set",
    "region_of",
    "simplex_point",
    "tangent_vector",
    "validate_game",
]


def simplex_point(x) -> np.ndarray:
    """Validate and return a probability 3-vector as a float array."""
    x = np.asarray(x, dtype=float)
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise ValueError(f"not a finite 3-vector: {x!r}")
    if np.min(x) < -EPS_SIMPLEX:
        raise ValueError(f"negative component beyond {EPS_SIMPLEX}: {x!r}")
    if abs(float(np.sum(x)) - 1.0) > EPS_SIMPLEX:
        raise ValueError(f"components do not sum to 1: {x!r}")
    return x


def tangent_vector(v) -> np.ndarray:
    """Validate and return a zero-sum 3-vector (tangent to the simplex)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"not a finite 3-vector: {v!r}")
    if abs(float(np.sum(v))) > EPS_SIMPLEX:
        raise ValueError(f"components do not sum to 0: {v!r}")
    return v


@dataclass(frozen=True)
class BimatrixGame:
    """Payoff matrices of the two players; ``b`` defaults to ``-a``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("a", "b"):
            mat = np.asarray(getattr(self, name), dtype=float)
            if mat.shape != (3, 3) or not np.all(np.isfinite(mat)):
                raise ValueError(f"{name} must be a finite 3x3 matrix")
            object.__setattr__(self, name, mat)
        self.a.setflags(write=False)
        self.b.setflags(write=False)


@dataclass(frozen=True)
class NashData:
    """Interior equilibrium (e_a, e_b) and the game value (lambda = mu)."""

    e_a: np.ndarray
    e_b: np.ndarray
    value: float


@dataclass(frozen=True)
class ZeroSumWitness:
    """Scalars of the linear equivalence a_ij + g*b_ij + f_j + h_i = 0 (e = 1)."""

    e: float
    g: float
    f: np.ndarray
    h: np.ndarray
    residual: float


@dataclass(frozen=True)
class GameSystem:
    """A validated game together with its derived equilibrium data.

    ``m = a + f`` is the canonical zero-sum representative used by every
    payoff comparison; ``flow_level`` is the Hamiltonian level on which the
    induced flow is integrated (1.0 when the unit level set lies inside the
    simplex, half the largest in-simplex level otherwise).
    """

    game: BimatrixGame
    nash: NashData
    witness: ZeroSumWitness
    m: np.ndarray = field(repr=False)
    scale: float
    flow_level: float

    def __post_init__(self):
        self.m.setflags(write=False)

    @property
    def equilibrium(self) -> np.ndarray:
        """Equilibrium as a single 6-vector (p then q)."""
        return np.concatenate([self.nash.e_a, self.nash.e_b])


def _solve_indifference(m: np.ndarray, side: str) -> tuple[np.ndarray, float]:
    """Solve m q = mu 1 (side 'b') or p m = lambda 1' (side 'a') on the simplex."""
    sys4 = np.zeros((4, 4))
    sys4[:3, :3] = m if side == "b" else m.T
    sys4[:3, 3] = -1.0
    sys4[3, :3] = 1.0
    rhs = np.array([0.0, 0.0, 0.0, 1.0])
    try:
        sol = np.linalg.solve(sys4, rhs)
    except np.linalg.LinAlgError:
        raise NoInteriorEquilibrium(f"indifference system on side {side} is singular")
    return sol[:3], float(sol[3])


def _boundary_min_level(m: np.ndarray, nash: NashData) -> float:
    """Smallest value of H on the boundary of the product simplex.

    H splits as hp(p) + hq(q) with hp = lambda - min_j (p m)_j and
    hq = max_i (m q)_i - mu, both nonnegative and vanishing only at the
    equilibrium, so the boundary minimum is min(min_{dSigma} hp,
    min_{dSigma} hq).  On each simplex edge the restriction is piecewise
    linear; its minimum is attained at an endpoint or a column/row tie.
    """
    lam = nash.value

    def edge_min(values_at_a: np.ndarray, values_at_b: np.ndarray, sign: float) -> float:
        # Piecewise-linear phi(tau) = sign * extremum_j of affine functions.
        taus = [0.0, 1.0]
        for j in range(3):
            for k in range(j + 1, 3):
                d0 = values_at_a[j] - values_at_a[k]
                d1 = values_at_b[j] - values_at_b[k]
                if d0 != d1:
                    t = d0 / (d0 - d1)
                    if 0.0 < t < 1.0:
                        taus.append(t)
        best = np.inf
        for t in taus:
            vals = (1 - t) * values_at_a + t * values_at_b
            phi = np.min(vals) if sign < 0 else np.max(vals)
            best = min(best, -phi if sign < 0 else phi)
        return best

    best = np.inf
    for a in range(3):
        for b in range(3):
            if a == b:
                continue
            # p on the edge e_a -> e_b of Sigma_A: hp = lam - min_j (p m)_j
            hp = lam + edge_min(m[a, :], m[b, :], -1.0)
            # q on the edge of Sigma_B: hq = max_i (m q)_i - mu
            hq = edge_min(m[:, a], m[:, b], +1.0) - lam
            best = min(best, hp, hq)
    return best


def validate_game(a, b=None) -> GameSystem:
    """Check the standing assumptions and assemble a :class:`GameSystem`.

    Raises :class:`DegenerateMatrix` when a payoff comparison ties,
    :class:`NotZeroSumEquivalent` when no linear equivalence to a zero-sum
    game exists, and :class:`NoInteriorEquilibrium` when the indifference
    systems have no unique interior solution (or the matrix is close to
    singular, condition number above 1e12).
    """
    a = np.asarray(a, dtype=float)
    if b is None:
        b = -a
    game = BimatrixGame(a, np.asarray(b, dtype=float))
    a, b = game.a, game.b
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        raise DegenerateMatrix("zero matrix")
    tie = DISTINCT_REL * scale

    # Distinctness: within-column entries of A, within-row entries of B.
    for j in range(3):
        for i in range(3):
            for i2 in range(i + 1, 3):
                if abs(a[i, j] - a[i2, j]) <= tie:
                    raise DegenerateMatrix(
                        f"A[{i + 1},{j + 1}] == A[{i2 + 1},{j + 1}] = {a[i, j]!r}"
                    )
    for i in range(3):
        for j in range(3):
            for j2 in range(j + 1, 3):
                if abs(b[i, j] - b[i, j2]) <= tie:
                    raise DegenerateMatrix(
                        f"B[{i + 1},{j + 1}] == B[{i + 1},{j2 + 1}] = {b[i, j]!r}"
                    )

    # Zero-sum witness: a_ij + g b_ij + f_j + h_i = 0, unknowns (g, f, h2, h3).
    if np.array_equal(b, -a):
        witness = ZeroSumWitness(1.0, 1.0, np.zeros(3), np.zeros(3), 0.0)
    else:
        rows = []
        rhs = []
        for i in range(3):
            for j in range(3):
                row = np.zeros(6)
                row[0] = b[i, j]
                row[1 + j] = 1.0
                if i > 0:
                    row[3 + i] = 1.0
                rows.append(row)
                rhs.append(-a[i, j])
        sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
        g = float(sol[0])
        f = sol[1:4].copy()
        h = np.array([0.0, sol[4], sol[5]])
        residual = float(np.max(np.abs(a + g * b + f[None, :] + h[:, None])))
        if residual >= ZERO_SUM_RESIDUAL_REL * scale:
            raise NotZeroSumEquivalent(
                f"residual {residual:g} exceeds {ZERO_SUM_RESIDUAL_REL * scale:g}")
        if g <= 0:
            raise NotZeroSumEquivalent(f"witness scaling g = {g:g} is not positive")
        witness = ZeroSumWitness(1.0, g, f, h, residual)

    m = a + witness.f[None, :]
    if np.linalg.cond(m) > MAX_CONDITION:
        raise NoInteriorEquilibrium("matrix condition number exceeds 1e12")

    e_b, mu = _solve_indifference(m, "b")
    e_a, lam = _solve_indifference(m, "a")
    if abs(lam - mu) > 1e-10 * scale:
        raise NoInteriorEquilibrium(f"lambda {lam:g} != mu {mu:g}")
    if np.min(e_a) <= EPS_INTERIOR or np.min(e_b) <= EPS_INTERIOR:
        raise NoInteriorEquilibrium(
            f"equilibrium not interior: e_a={e_a.tolist()}, e_b={e_b.tolist()}"
        )
    nash = NashData(e_a, e_b, float(lam))

    rho = _boundary_min_level(m, nash)
    flow_level = 1.0 if rho > 1.0 + 1e-9 else 0.5 * rho
    return GameSystem(game=game, nash=nash, witness=witness, m=m, scale=scale,
                      flow_level=flow_level)


def best_responses(sys: GameSystem, p, q) -> tuple[set[int], set[int]]:
    """Best-response index sets (1-based) within the tie tolerance."""
    p = simplex_point(p)
    q = simplex_point(q)
    tie = EPS_TIE_REL * sys.scale
    aq = sys.m @ q
    pa = p @ sys.m
    set_a = {i + 1 for i in range(3) if aq[i] >= np.max(aq) - tie}
    set_b = {j + 1 for j in range(3) if pa[j] <= np.min(pa) + tie}
    return set_a, set_b


def region_of(sys: GameSystem, p, q) -> tuple[int, int]:
    """Region label (k, l) of a point off the indifference planes."""
    set_a, set_b = best_responses(sys, p, q)
    if len(set_a) > 1 or len(set_b) > 1:
        raise OnIndifferencePlane(f"best responses {sorted(set_a)}, {sorted(set_b)}")
    return next(iter(set_a)), next(iter(set_b))


def hamiltonian(sys: GameSystem, p, q) -> float:
    """H(p, q) = max_i (m q)_i - min_j (p m)_j; zero exactly at the equilibrium."""
    p = simplex_point(p)
    q = simplex_point(q)
    return float(np.max(sys.m @ q) - np.min(p @ sys.m))


def project_to_level_set(sys: GameSystem, p, q, level: float = 1.0):
    """Central projection from the equilibrium onto the level set H = level."""
    h = hamiltonian(sys, p, q)
    if h <= EPS_H:
        raise AtEquilibrium(f"H = {h:g} below {EPS_H:g}")
    factor = level / h
    p_star = sys.nash.e_a + (np.asarray(p, dtype=float) - sys.nash.e_a) * factor
    q_star = sys.nash.e_b + (np.asarray(q, dtype=float) - sys.nash.e_b) * factor
    if np.min(p_star) < -EPS_SIMPLEX or np.min(q_star) < -EPS_SIMPLEX:
        raise OutsideSimplex(
            f"level {level:g} not reached inside the simplex (H = {h:g})"
        )
    return p_star, q_star
