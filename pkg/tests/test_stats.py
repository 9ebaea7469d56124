import numpy as np
import pytest

from brlab import project_to_level_set
from brlab.errors import WrongMode
from brlab.flow import integrate_br, integrate_hamiltonian
from brlab.stats import (
    convergence_trace,
    detect_periodic_itinerary,
    time_fractions,
    transition_counts,
    visit_frequencies,
)

from conftest import PERIOD6, PERIOD13, PERIOD60, EX4_BLOCK_A, EX4_BLOCK_B

SIXTH_PATTERN = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]]) / 6.0


def test_visit_frequencies_period6():
    itinerary = PERIOD6 * 10
    q = visit_frequencies(itinerary)
    assert np.allclose(q, SIXTH_PATTERN, atol=1e-15)
    assert q.sum() == pytest.approx(1.0, abs=1e-12)


def test_visit_frequencies_uniform():
    labels = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]
    assert np.allclose(visit_frequencies(labels), np.full((3, 3), 1 / 9), atol=1e-15)


def test_time_fractions_single_segment(ex1):
    rng = np.random.default_rng(0)
    p = rng.dirichlet(np.ones(3))
    q = rng.dirichlet(np.ones(3))
    orb = integrate_br(ex1, p, q, 1)
    frac = time_fractions(orb)
    expected = np.zeros((3, 3))
    i, j = orb.itinerary[0]
    expected[i - 1, j - 1] = 1.0
    assert np.allclose(frac, expected, atol=1e-15)


def test_time_fractions_rejects_hamiltonian(ex1):
    rng = np.random.default_rng(1)
    p = rng.dirichlet(np.ones(3))
    q = rng.dirichlet(np.ones(3))
    p, q = project_to_level_set(ex1, p, q)
    orb = integrate_hamiltonian(ex1, p, q, 10)
    with pytest.raises(WrongMode):
        time_fractions(orb)


def test_fp_parametrization_weights(ex1):
    rng = np.random.default_rng(2)
    p = rng.dirichlet(np.ones(3))
    q = rng.dirichlet(np.ones(3))
    orb = integrate_br(ex1, p, q, 500)
    br = time_fractions(orb, "br")
    fp = time_fractions(orb, "fp")
    assert br.sum() == pytest.approx(1.0, abs=1e-12)
    assert fp.sum() == pytest.approx(1.0, abs=1e-12)
    assert not np.allclose(br, fp, atol=1e-3)  # genuinely different weightings


def test_transition_counts_period6():
    table = transition_counts(PERIOD6 * 20)
    assert table.shape == (9, 9)
    # each visited label deterministically moves to its successor
    nonzero_rows = np.nonzero(table.sum(axis=1))[0]
    assert len(nonzero_rows) == 6
    for r in nonzero_rows:
        row = table[r]
        assert row.max() == pytest.approx(1.0, abs=1e-12)
        assert np.count_nonzero(row) == 1


def test_transition_support_in_diagram(ex1):
    from brlab.diagrams import diagram_from_game

    rng = np.random.default_rng(3)
    p = rng.dirichlet(np.ones(3))
    q = rng.dirichlet(np.ones(3))
    orb = integrate_br(ex1, p, q, 2000)
    table = transition_counts(orb.itinerary)
    d = diagram_from_game(ex1)
    for r in range(9):
        for c in range(9):
            if table[r, c] > 0:
                src = (r // 3 + 1, r % 3 + 1)
                dst = (c // 3 + 1, c % 3 + 1)
                assert d.has_arrow(src, dst)


def test_convergence_trace_marks(ex1):
    rng = np.random.default_rng(4)
    p = rng.dirichlet(np.ones(3))
    q = rng.dirichlet(np.ones(3))
    orb = integrate_br(ex1, p, q, 1000)
    trace = convergence_trace(orb, n_points=20)
    ns = [rec["n"] for rec in trace]
    assert ns == sorted(set(ns))
    assert ns[-1] == 1000
    for rec in trace:
        assert np.asarray(rec["P"]).sum() == pytest.approx(1.0, abs=1e-9)
        assert np.asarray(rec["Q"]).sum() == pytest.approx(1.0, abs=1e-9)
    # final trace entry matches the direct statistics
    assert np.allclose(trace[-1]["Q"], visit_frequencies(orb.itinerary[:-1]),
                       atol=1e-12)


def test_detect_periodic_simple():
    seq = PERIOD6 * 12
    assert detect_periodic_itinerary(seq, 12) == (0, 6)


def test_detect_periodic_with_preperiod():
    seq = [(2, 1), (2, 2)] + PERIOD6 * 12
    pre, per = detect_periodic_itinerary(seq, 12)
    assert per == 6
    assert pre == 2


def test_detect_periodic_period60_block_word():
    seq = PERIOD60 * 6
    pre, per = detect_periodic_itinerary(seq, 80)
    assert per == 60
    # the period decomposes into the cyclic block word a a b a b b a b
    tail = seq[-60:]
    rotations = [tuple(tail[k:] + tail[:k]) for k in range(60)]
    target = tuple(
        sum([EX4_BLOCK_A, EX4_BLOCK_A, EX4_BLOCK_B, EX4_BLOCK_A,
             EX4_BLOCK_B, EX4_BLOCK_B, EX4_BLOCK_A, EX4_BLOCK_B], []))
    assert target in rotations


def test_detect_periodic_absent():
    rng = np.random.default_rng(5)
    seq = [(int(rng.integers(1, 4)), int(rng.integers(1, 4))) for _ in range(200)]
    assert detect_periodic_itinerary(seq, 20) is None


def test_detect_periodic_requires_length():
    with pytest.raises(ValueError):
        detect_periodic_itinerary(PERIOD6 * 2, 12)
