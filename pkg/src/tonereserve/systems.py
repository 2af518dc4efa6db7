"""Orthonormal systems on [0, 1): Rademacher, Walsh, Hadamard and DFT.

Walsh-side signals are piecewise constant on dyadic cells and are stored as
:class:`DyadicStepSignal`.  Cell ``i`` at level ``n`` is the right-open
interval ``[i 2^-n, (i+1) 2^-n)``; values are taken in cell interiors, so the
``sign 0 = -1`` convention at dyadic points never enters.

Walsh indices are 1-based and follow the recursion ``w_1 = 1``,
``w_{2^k+m} = r_k w_m``.  With ``s = j - 1`` this gives
``w_j(cell i) = (-1)^popcount(s & bitrev_n(i))``, which is what the fast
transforms below use.  The literal recursion is kept in
:func:`walsh_signal` so the two can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

MAX_HADAMARD_ORDER = 20


class ResolutionError(ValueError):
    """Requested dyadic level is too coarse for the object."""


# ---------------------------------------------------------------------------
# index sets and coefficient vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexSet:
    """Sorted set of 1-based indices inside ``{1, ..., ambient_size}``."""

    ambient_size: int
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(k) for k in self.members)))
        if members and (members[0] < 1 or members[-1] > self.ambient_size):
            raise ValueError(f"indices must lie in 1..{self.ambient_size}: {members}")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_iterable(cls, ambient_size: int, members: Iterable[int]) -> "IndexSet":
        return cls(ambient_size, tuple(members))

    @classmethod
    def full(cls, ambient_size: int) -> "IndexSet":
        return cls(ambient_size, tuple(range(1, ambient_size + 1)))

    @classmethod
    def from_mask(cls, mask) -> "IndexSet":
        mask = np.asarray(mask, dtype=bool)
        return cls(len(mask), tuple(int(k) + 1 for k in np.flatnonzero(mask)))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, k):
        return k in set(self.members)

    def mask(self) -> np.ndarray:
        out = np.zeros(self.ambient_size, dtype=bool)
        out[np.asarray(self.members, dtype=int) - 1] = True
        return out

    def complement(self) -> "IndexSet":
        return IndexSet.from_mask(~self.mask())

    def isdisjoint(self, other: "IndexSet") -> bool:
        return set(self.members).isdisjoint(other.members)

    def to_list(self) -> list[int]:
        return list(self.members)


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients over ``{1..N}``; ``values[k-1]`` belongs to index ``k``.

    Real for Walsh-side problems, complex for Fourier-side ones.  Integer or
    ``Fraction`` (object dtype) values are kept as-is so that Walsh-side
    computations can stay exact.
    """

    ambient_size: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.ambient_size,):
            raise ValueError(
                f"expected {self.ambient_size} coefficients, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_entries(cls, ambient_size: int, entries: dict, dtype=float) -> "CoefficientVector":
        values = np.zeros(ambient_size, dtype=dtype)
        for k, v in entries.items():
            if not 1 <= k <= ambient_size:
                raise ValueError(f"index {k} outside 1..{ambient_size}")
            values[k - 1] = v
        return cls(ambient_size, values)

    @classmethod
    def on_support(cls, support: IndexSet, coefficients) -> "CoefficientVector":
        coefficients = np.asarray(coefficients)
        values = np.zeros(support.ambient_size, dtype=coefficients.dtype)
        values[np.asarray(support.members, dtype=int) - 1] = coefficients
        return cls(support.ambient_size, values)

    @property
    def support(self) -> IndexSet:
        return IndexSet.from_mask(self.values != 0)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def norm2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values.astype(complex)) ** 2)))

    def norm2_squared_exact(self) -> Fraction:
        """``sum a_k^2`` computed from the exact binary value of each entry."""
        return sum((Fraction(v) ** 2 for v in self.values.tolist()), Fraction(0))

    def restricted(self, index_set: IndexSet) -> "CoefficientVector":
        values = np.where(index_set.mask(), self.values, 0).astype(self.values.dtype)
        return CoefficientVector(self.ambient_size, values)

    def scaled(self, c) -> "CoefficientVector":
        return CoefficientVector(self.ambient_size, self.values * c)

    def to_json(self):
        if self.is_complex:
            return [[float(v.real), float(v.imag)] for v in self.values]
        return [float(v) for v in self.values]

    @classmethod
    def from_json(cls, data) -> "CoefficientVector":
        if data and isinstance(data[0], (list, tuple)):
            values = np.array([complex(re, im) for re, im in data])
        else:
            values = np.array(data, dtype=float)
        return cls(len(values), values)


# ---------------------------------------------------------------------------
# dyadic step signals
# ---------------------------------------------------------------------------


def _is_exact(values: np.ndarray) -> bool:
    return values.dtype.kind in "iub" or values.dtype == object


@dataclass(frozen=True, eq=False)
class DyadicStepSignal:
    """Piecewise-constant function on ``[0, 1)`` at resolution ``2^-level``."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be non-negative")
        values = np.asarray(self.values)
        if values.shape != (2**self.level,):
            raise ValueError(
                f"level {self.level} needs {2 ** self.level} values, got {values.shape}"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value, level: int = 0) -> "DyadicStepSignal":
        return cls(level, np.full(2**level, value))

    @property
    def is_exact(self) -> bool:
        return _is_exact(self.values)

    def refine(self, level: int) -> "DyadicStepSignal":
        if level < self.level:
            raise ResolutionError(f"cannot refine level {self.level} down to {level}")
        return DyadicStepSignal(level, np.repeat(self.values, 2 ** (level - self.level)))

    def coarsen(self, level: int) -> "DyadicStepSignal":
        """Exact inverse of :meth:`refine`; fails if the signal is not constant on cells."""
        if level > self.level:
            raise ResolutionError(f"cannot coarsen level {self.level} up to {level}")
        blocks = self.values.reshape(2**level, -1)
        if not np.all(blocks == blocks[:, :1]):
            raise ResolutionError(f"signal is not constant on level-{level} cells")
        return DyadicStepSignal(level, blocks[:, 0])

    def _aligned(self, other: "DyadicStepSignal"):
        level = max(self.level, other.level)
        return level, self.refine(level).values, other.refine(level).values

    def __add__(self, other):
        if isinstance(other, DyadicStepSignal):
            level, a, b = self._aligned(other)
            return DyadicStepSignal(level, a + b)
        return DyadicStepSignal(self.level, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DyadicStepSignal):
            level, a, b = self._aligned(other)
            return DyadicStepSignal(level, a - b)
        return DyadicStepSignal(self.level, self.values - other)

    def __neg__(self):
        return DyadicStepSignal(self.level, -self.values)

    def __mul__(self, other):
        if isinstance(other, DyadicStepSignal):
            level, a, b = self._aligned(other)
            return DyadicStepSignal(level, a * b)
        return DyadicStepSignal(self.level, self.values * other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DyadicStepSignal):
            return NotImplemented
        level, a, b = self._aligned(other)
        return bool(np.all(a == b))

    def __hash__(self):
        return hash((self.level, self.values.tobytes()))

    def integral(self):
        """``int_0^1 f``; a ``Fraction`` for exact signals."""
        total = self.values.sum()
        if self.is_exact:
            return Fraction(total) / 2**self.level
        return float(total) / 2**self.level

    def sup(self):
        return abs(self.values).max()


class StepNorms(NamedTuple):
    l1: object
    l2: float
    linf: object
    l2_squared: object


def step_norms(f: DyadicStepSignal) -> StepNorms:
    """L1, L2 and L-infinity norms of a step signal.

    For integer or ``Fraction`` signals ``l1``, ``linf`` and ``l2_squared`` are
    exact ``Fraction`` values and ``l2`` is the float square root.
    """
    v = f.values
    scale = 2**f.level
    if f.is_exact:
        a = [abs(Fraction(x)) for x in v.tolist()]
        l1 = sum(a, Fraction(0)) / scale
        l2sq = sum((x * x for x in a), Fraction(0)) / scale
        linf = max(a)
        return StepNorms(l1, math.sqrt(l2sq), linf, l2sq)
    a = np.abs(v)
    l2sq = float(np.sum(a * a)) / scale
    return StepNorms(float(a.sum()) / scale, math.sqrt(l2sq), float(a.max()), l2sq)


# ---------------------------------------------------------------------------
# Rademacher / Walsh functions
# ---------------------------------------------------------------------------


def rademacher_signal(k: int, n: int) -> DyadicStepSignal:
    """``r_k = sign sin(2 pi 2^k t)`` at level ``n`` (needs ``n >= k + 1``)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if n < k + 1:
        raise ResolutionError(f"r_{k} needs level >= {k + 1}, got {n}")
    block = np.arange(2**n) >> (n - k - 1)
    return DyadicStepSignal(n, np.where(block % 2 == 0, 1, -1).astype(np.int64))


def walsh_signal(j: int, n: int) -> DyadicStepSignal:
    """``w_j`` at level ``n`` via ``w_1 = 1``, ``w_{2^k+m} = r_k w_m``."""
    if not 1 <= j <= 2**n:
        raise ValueError(f"Walsh index {j} outside 1..{2 ** n}")
    if j == 1:
        return DyadicStepSignal(n, np.ones(2**n, dtype=np.int64))
    k = (j - 1).bit_length() - 1
    m = j - 2**k
    return rademacher_signal(k, n) * walsh_signal(m, n)


def walsh_product_index(j: int, k: int, N: int) -> int:
    """Index ``l`` with ``w_j w_k = w_l``."""
    if not (1 <= j <= N and 1 <= k <= N):
        raise ValueError(f"indices ({j}, {k}) outside 1..{N}")
    return ((j - 1) ^ (k - 1)) + 1


def level_of(N: int) -> int:
    n = int(N).bit_length() - 1
    if N < 1 or 2**n != N:
        raise ValueError(f"N must be a power of two, got {N}")
    return n


def bit_reverse_permutation(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    out = np.zeros_like(idx)
    for b in range(n):
        out |= ((idx >> b) & 1) << (n - 1 - b)
    return out


def fwht(values) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform in natural (Sylvester) order.

    Works on float, integer and object (Python int / Fraction) arrays; the
    last axis must have power-of-two length.
    """
    v = np.array(values)
    size = v.shape[-1]
    level_of(size)
    lead = v.shape[:-1]
    h = 1
    while h < size:
        v = v.reshape(*lead, -1, 2, h)
        a, b = v[..., 0, :], v[..., 1, :]
        v = np.stack([a + b, a - b], axis=-2)
        h *= 2
    return v.reshape(*lead, size)


def walsh_synthesis(coefficients, n: int) -> np.ndarray:
    """Cell values of ``sum_k c_k w_k`` at level ``n`` (``len(c) == 2^n``)."""
    c = np.asarray(coefficients)
    if c.shape[-1] != 2**n:
        raise ValueError(f"need {2 ** n} coefficients, got {c.shape[-1]}")
    return fwht(c)[..., bit_reverse_permutation(n)]


def walsh_coefficients(f: DyadicStepSignal) -> np.ndarray:
    """``c_k = int f w_k`` for ``k = 1..2^level``; ``Fraction`` entries if exact."""
    n = f.level
    raw = fwht(f.values[bit_reverse_permutation(n)])
    if f.is_exact:
        return np.array([Fraction(x) / 2**n for x in raw.tolist()], dtype=object)
    return raw / 2**n


def walsh_matrix(n: int) -> np.ndarray:
    """Integer matrix with ``W[i, j-1] = w_j(cell i)``."""
    return walsh_synthesis(np.eye(2**n, dtype=np.int64), n).T.copy()


def signal_from_coefficients(coefficients, n: int) -> DyadicStepSignal:
    return DyadicStepSignal(n, walsh_synthesis(np.asarray(coefficients), n))


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


def hadamard_matrix(k: int, normalized: bool = True) -> np.ndarray:
    """Hadamard matrix of order ``2^k`` by the recursive block construction.

    ``H_{2^(k+1)} = [[H, H], [H, -H]] / sqrt(2)`` starting from ``H_1 = [1]``.
    With ``normalized=False`` the integer ``+-1`` matrix is returned.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > MAX_HADAMARD_ORDER:
        raise ValueError(f"refusing to build a 2^{k} x 2^{k} matrix")
    H = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        H = np.block([[H, H], [H, -H]])
    if normalized:
        return H / math.sqrt(2**k)
    return H


def dft_matrix(N: int) -> np.ndarray:
    """Unitary ``F_jk = exp(-2 pi i (j-1)(k-1) / N) / sqrt(N)``."""
    j = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(j, j) / N) / math.sqrt(N)


# ---------------------------------------------------------------------------
# Fourier side
# ---------------------------------------------------------------------------


class SupNormEstimate(NamedTuple):
    value: float
    grid_size: int
    t_max: float


def trig_supnorm(coeffs: CoefficientVector, oversample: int = 8) -> SupNormEstimate:
    """Grid estimate of ``sup_t |sum_k a_k exp(2 pi i k t)|`` on ``[0, 1)``.

    Entry ``k`` (1-based) of ``coeffs`` multiplies frequency ``k``.  The grid has
    ``oversample * N`` uniform points, so the value is a lower bound on the
    true sup norm.
    """
    if oversample < 4:
        raise ValueError("oversample must be at least 4")
    N = coeffs.ambient_size
    grid = oversample * N
    spectrum = np.zeros(grid, dtype=complex)
    spectrum[1 : N + 1] = coeffs.values
    samples = np.fft.ifft(spectrum) * grid
    i = int(np.argmax(np.abs(samples)))
    return SupNormEstimate(float(np.abs(samples[i])), grid, i / grid)


# ---------------------------------------------------------------------------
# extremal directions of L1 balls
# ---------------------------------------------------------------------------


def l1_ball_vertices(basis: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vertex directions of ``{c : ||basis @ c||_1 <= 1}`` for a real basis.

    ``basis`` is a ``cells x d`` real matrix of full column rank.  Every vertex
    of this polytope lies on a ray cut out by ``d - 1`` independent rows, so the
    rays are found by enumerating row subsets.  Rows are returned as unit
    vectors (one per ray, sign not normalised).
    """
    from itertools import combinations

    basis = np.asarray(basis, dtype=float)
    cells, d = basis.shape
    if d == 1:
        return np.ones((1, 1))
    subsets = np.array(list(combinations(range(cells), d - 1)), dtype=int)
    out = []
    for chunk in np.array_split(subsets, max(1, len(subsets) // 4096 + 1)):
        if len(chunk) == 0:
            continue
        rows = basis[chunk]  # (m, d-1, d)
        _, s, vt = np.linalg.svd(rows, full_matrices=True)
        ok = s[:, -1] > tol * max(1.0, float(s[:, 0].max()))
        out.append(vt[ok, -1, :])
    if not out:
        return np.empty((0, d))
    return np.concatenate(out)


def subset_orbit_labels(N: int, permutations) -> np.ndarray:
    """Label every subset bitmask of ``N`` positions by its orbit.

    ``permutations`` are integer arrays mapping position ``p`` (0-based) to
    ``perm[p]``; the orbits are the connected components of the graph that
    links each mask to its images.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    masks = np.arange(2**N, dtype=np.int64)
    src, dst = [], []
    for perm in permutations:
        image = np.zeros_like(masks)
        for b in range(N):
            image |= ((masks >> b) & 1) << int(perm[b])
        src.append(masks)
        dst.append(image)
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(2**N, 2**N))
    _, labels = connected_components(graph, directed=True, connection="weak")
    return labels


def orbit_representatives(labels: np.ndarray, size: int | None = None) -> list[int]:
    """Smallest mask of each orbit, optionally only masks with ``size`` bits set."""
    first = np.unique(labels, return_index=True)[1]
    reps = sorted(int(x) for x in first)
    if size is not None:
        reps = [x for x in reps if bin(x).count("1") == size]
    return reps


def mask_to_index_set(mask: int, N: int) -> IndexSet:
    return IndexSet(N, tuple(b + 1 for b in range(N) if mask >> b & 1))
