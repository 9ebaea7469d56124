"""Region-visit statistics, time fractions and itinerary periodicity."""

from __future__ import annotations

import numpy as np

from .errors import WrongMode
from .flow import Orbit

__all__ = [
    "convergence_trace",
    "detect_periodic_itinerary",
    "time_fractions",
    "transition_counts",
    "visit_frequencies",
]


def _labels_array(itinerary) -> np.ndarray:
    arr = np.asarray(itinerary, dtype=int)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("itinerary must be a sequence of (i, j) labels")
    return arr


def visit_frequencies(itinerary) -> np.ndarray:
    """Empirical 3x3 frequency matrix Q of the visited region labels."""
    arr = _labels_array(itinerary)
    if len(arr) == 0:
        raise ValueError("empty itinerary")
    counts = np.zeros((3, 3))
    np.add.at(counts, (arr[:, 0] - 1, arr[:, 1] - 1), 1.0)
    return counts / len(arr)


def _segment_weights(orbit: Orbit, parametrization: str) -> np.ndarray:
    if parametrization == "br":
        return orbit.segment_durations
    if parametrization == "fp":
        # FP time t = e^s: segment weight e^{s_{k+1}} - e^{s_k}
        s = np.concatenate([[orbit.initial.time], orbit.times])
        return np.diff(np.exp(s))
    raise ValueError(f"unknown parametrization {parametrization!r}")


def time_fractions(orbit: Orbit, parametrization: str = "br") -> np.ndarray:
    """Fraction of time spent in each region (matrix P).

    ``parametrization`` is "br" (flow time s) or "fp" (rescaled t = e^s).
    Only defined for best-response orbits; Hamiltonian-mode time fractions
    are a different statistic and are reported separately.
    """
    if orbit.mode != "br":
        raise WrongMode(f"time fractions need a BR orbit, got {orbit.mode!r}")
    return region_time_fractions(orbit, _segment_weights(orbit, parametrization))


def region_time_fractions(orbit: Orbit, weights=None) -> np.ndarray:
    """Duration-weighted region occupancy over the completed segments."""
    if len(orbit) == 0:
        raise ValueError("orbit has no completed segments")
    if weights is None:
        weights = orbit.segment_durations
    labels = orbit.itinerary[:-1]
    frac = np.zeros((3, 3))
    np.add.at(frac, (labels[:, 0] - 1, labels[:, 1] - 1), weights)
    return frac / weights.sum()


def transition_counts(itinerary) -> np.ndarray:
    """Row-stochastic 9x9 table of one-step label transitions.

    Rows/columns are labels (i, j) flattened as 3*(i-1) + (j-1); rows of
    unvisited labels are zero.
    """
    arr = _labels_array(itinerary)
    if len(arr) < 2:
        raise ValueError("itinerary must contain at least two labels")
    flat = 3 * (arr[:, 0] - 1) + (arr[:, 1] - 1)
    table = np.zeros((9, 9))
    np.add.at(table, (flat[:-1], flat[1:]), 1.0)
    sums = table.sum(axis=1, keepdims=True)
    np.divide(table, sums, out=table, where=sums > 0)
    return table


def convergence_trace(orbit: Orbit, n_points: int = 40,
                      parametrization: str = "br") -> list[dict]:
    """P(n) and Q(n) snapshots at logarithmically spaced prefix lengths.

    Hamiltonian orbits are weighted by their own flow time (which matches the
    rescaled t = e^s clock of the best-response spiral); for BR orbits the
    ``parametrization`` selects the clock as in :func:`time_fractions`.
    """
    n = len(orbit)
    if n == 0:
        return []
    marks = np.unique(np.geomspace(1, n, min(n_points, n)).astype(int))
    labels = orbit.itinerary[:-1]
    weights = (orbit.segment_durations if orbit.mode != "br"
               else _segment_weights(orbit, parametrization))
    q_counts = np.zeros((3, 3))
    p_sums = np.zeros((3, 3))
    trace = []
    next_mark = 0
    for k in range(n):
        i, j = labels[k, 0] - 1, labels[k, 1] - 1
        q_counts[i, j] += 1.0
        p_sums[i, j] += weights[k]
        if k + 1 == marks[next_mark]:
            trace.append({
                "n": int(k + 1),
                "P": (p_sums / p_sums.sum()).tolist(),
                "Q": (q_counts / (k + 1)).tolist(),
            })
            next_mark += 1
            if next_mark >= len(marks):
                break
    return trace


def detect_periodic_itinerary(itinerary, max_period: int):
    """Smallest period p <= max_period of the itinerary tail, or None.

    The final 3*p labels must repeat with period p; the returned preperiod is
    the first index from which the periodicity holds.  Requires at least
    4*max_period labels so that every candidate period sees three full copies.
    """
    arr = _labels_array(itinerary)
    n = len(arr)
    if n < 4 * max_period:
        raise ValueError(f"need at least {4 * max_period} labels, got {n}")
    for p in range(1, max_period + 1):
        tail = arr[n - 3 * p:]
        if np.array_equal(tail[:-p], tail[p:]):
            start = n - 3 * p
            while start > 0 and np.array_equal(arr[start - 1], arr[start - 1 + p]):
                start -= 1
            return start, p
    return None
