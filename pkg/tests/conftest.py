import numpy as np
import pytest

from brlab import validate_game

SIGMA = (np.sqrt(5.0) - 1.0) / 2.0

EX1 = np.array([[22.0, 34.0, -4.0], [7.0, -32.0, 16.0], [-53.0, 96.0, 23.0]])
EX2 = np.array([[1.0, 0.0, SIGMA], [SIGMA, 1.0, 0.0], [0.0, SIGMA, 1.0]])
EX3 = np.array([[84.0, -37.0, 10.0], [24.0, 33.0, -14.0], [-26.0, 9.0, 20.0]])
EX4 = np.array([[-92.0, 18.0, 52.0], [62.0, -37.0, -33.0], [-10.0, 9.0, -18.0]])

PERIOD6 = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 1)]
PERIOD13 = [
    (1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 1),
    (1, 1), (1, 2), (3, 2), (2, 2), (2, 3), (3, 3), (3, 1),
]
EX4_BLOCK_A = [(1, 1), (3, 1), (2, 1), (2, 2), (3, 2), (3, 3), (1, 3)]
EX4_BLOCK_B = EX4_BLOCK_A + [(1, 2)]
PERIOD60 = (
    EX4_BLOCK_A + EX4_BLOCK_A + EX4_BLOCK_B + EX4_BLOCK_A
    + EX4_BLOCK_B + EX4_BLOCK_B + EX4_BLOCK_A + EX4_BLOCK_B
)


@pytest.fixture(scope="session")
def ex1():
    return validate_game(EX1)


@pytest.fixture(scope="session")
def ex2():
    return validate_game(EX2)


@pytest.fixture(scope="session")
def ex3():
    return validate_game(EX3)


@pytest.fixture(scope="session")
def ex4():
    return validate_game(EX4)


def random_game_matrix(rng):
    """Integer matrix in [-99, 99] with a validating zero-sum game (A, -A)."""
    from brlab.errors import BrlabError

    while True:
        a = rng.integers(-99, 100, size=(3, 3)).astype(float)
        try:
            return a, validate_game(a)
        except BrlabError:
            continue
