"""Independent reference implementations used to cross-check the library.

These deliberately avoid the code paths they validate: the ML oracle is a
flat scan over every message (no tree, no prefix sharing), the pair spectrum
is a double loop over all ordered constellation pairs, the floor oracle runs
in exact rational arithmetic, and g_value's oracle sums pairwise terms
point by point.
"""

from fractions import Fraction

import numpy as np

from spinalcodes import (
    CodeParams, Constellation, Message, ObservationGrid, encode,
    pairwise_expectation,
)


def _path_cost(obs: ObservationGrid, params: CodeParams, value: int) -> float:
    """Pinned metric grouping: pass terms into a segment subtotal, subtotals
    into the path cost, both in ascending order."""
    x = encode(Message.from_int(value, params.n), params)
    cost = 0.0
    for i in range(params.n_segments):
        subtotal = 0.0
        for j in range(params.L):
            d = obs.y[i, j] - obs.h[i, j] * x[i, j]
            subtotal = subtotal + (d.real * d.real + d.imag * d.imag)
        cost = cost + subtotal
    return cost


def flat_ml_oracle(obs: ObservationGrid, params: CodeParams) -> Message:
    """Argmin over all 2^n messages, no tree, no prefix sharing; strict <
    keeps the first, i.e. lexicographically smallest, minimizer."""
    best_value = None
    best_cost = None
    for value in range(1 << params.n):
        cost = _path_cost(obs, params, value)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_value = value
    return Message.from_int(best_value, params.n)


def flat_ml_costs(obs: ObservationGrid, params: CodeParams) -> np.ndarray:
    """Exact path cost of every message, indexed by message integer."""
    return np.array([
        _path_cost(obs, params, value) for value in range(1 << params.n)
    ])


def pair_spectrum_bruteforce(psi: Constellation) -> dict[int, int]:
    """Ordered-pair multiplicities keyed by (distance/d_min)^2, via the
    O(4^c) double loop over point pairs."""
    counts: dict[int, int] = {}
    inv = 1.0 / (psi.d_min * psi.d_min)
    for a in psi.points:
        for b in psi.points:
            q = abs(a - b) ** 2 * inv
            key = round(q)
            assert abs(q - key) < 1e-9 * max(1.0, q)
            counts[key] = counts.get(key, 0) + 1
    return counts


def g_value_pair_sum(psi: Constellation, sigma2: float, theta: float,
                     model) -> float:
    """Direct sum of pairwise_expectation over all 2^(2c) ordered pairs,
    one constellation point at a time (no distance spectrum)."""
    total = 0.0
    for a in psi.points:
        d2 = np.abs(a - psi.points) ** 2
        total += sum(pairwise_expectation(model, float(q), sigma2, theta)
                     for q in d2)
    return total


def floor_fraction(params: CodeParams) -> Fraction:
    """Union-bound error floor in exact rational arithmetic."""
    rows = params.n // params.k
    prod = Fraction(1)
    for a in range(1, rows + 1):
        l_a = params.L * (rows - a + 1)
        exponent = params.n - a * params.k - l_a * params.c - 1
        term = ((1 << params.k) - 1) * Fraction(2) ** exponent
        prod *= 1 - min(Fraction(1), term)
    return 1 - prod
