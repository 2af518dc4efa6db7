"""Reference implementations used only by the tests.

These deliberately avoid the package's own transforms so that agreement is
evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.integrate import quad


def rademacher_by_sine(k: int, n: int) -> np.ndarray:
    """``sign sin(2 pi 2^k t)`` evaluated at the midpoint of each level-n cell."""
    t = (np.arange(2**n) + 0.5) / 2**n
    return np.sign(np.sin(2 * np.pi * 2**k * t)).astype(int)


def walsh_by_binary_digits(j: int, n: int) -> np.ndarray:
    """``w_j`` as the product of ``r_k`` over the set bits ``k`` of ``j - 1``."""
    out = np.ones(2**n, dtype=int)
    s = j - 1
    k = 0
    while s:
        if s & 1:
            out = out * rademacher_by_sine(k, n)
        s >>= 1
        k += 1
    return out


def walsh_table(n: int) -> np.ndarray:
    """Rows ``j - 1`` hold ``w_j`` on the level-n cells."""
    return np.array([walsh_by_binary_digits(j, n) for j in range(1, 2**n + 1)])


def correlation_by_integral(r: int, I, n: int) -> float:
    W = walsh_table(n)
    s = W[np.asarray(list(I), dtype=int) - 1].sum(axis=0) if len(I) else np.zeros(2**n)
    return float(np.mean(W[r - 1] * s * s))


def longest_ap_exhaustive(members) -> tuple[int, int, int]:
    """Longest AP by trying every start and step; ties to smallest step then start."""
    s = set(members)
    best = (min(s), 1, 1)
    best_key = (1, -1, -min(s))
    span = max(s) - min(s)
    for a in sorted(s):
        for d in range(1, span + 1):
            m = 1
            while a + m * d in s:
                m += 1
            key = (m, -d, -a)
            if m >= 2 and key > best_key:
                best_key, best = key, (a, d, m)
    return best


def trig_sup_dense(coeffs: dict, points: int = 200_000) -> float:
    t = np.arange(points) / points
    s = sum(c * np.exp(2j * np.pi * k * t) for k, c in coeffs.items())
    return float(np.max(np.abs(s)))


def dirichlet_l1_quad(n: int) -> float:
    """``int_0^1 |sum_{|k|<n} exp(2 pi i k t)| dt`` by adaptive quadrature."""
    width = 2 * n - 1
    f = lambda t: abs(math.sin(math.pi * width * t) / math.sin(math.pi * t)) if t % 1 else width
    breaks = [i / width for i in range(1, width)]
    val, _ = quad(f, 0, 1, points=breaks, limit=500)
    return val


def min_sup_grid_search(signal_fixed, comp_columns, lim: float = 2.0, steps: int = 401) -> float:
    """Min over a grid of compensation coefficients (one or two free columns)."""
    grid = np.linspace(-lim, lim, steps)
    best = math.inf
    for b in itertools.product(grid, repeat=comp_columns.shape[1]):
        s = signal_fixed + comp_columns @ np.asarray(b)
        best = min(best, float(np.max(np.abs(s))))
    return best
