"""Arithmetic progressions and trigonometric kernels for the Fourier system.

Continuous objects use the characters ``exp(2 pi i k t)`` on ``[0, 1)``.
The discrete transform is the unitary ``F`` of :func:`tonereserve.systems.dft_matrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .systems import CoefficientVector, IndexSet


@dataclass(frozen=True)
class ApDescriptor:
    """Progression ``a, a+d, ..., a+(m-1)d``."""

    a: int
    d: int
    m: int

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError("step and length must be positive")

    def members(self) -> list[int]:
        return [self.a + self.d * l for l in range(self.m)]

    def to_json(self) -> dict:
        return {"a": self.a, "d": self.d, "m": self.m}


def longest_ap(I: IndexSet) -> ApDescriptor:
    """Longest arithmetic progression inside ``I``.

    Dynamic programming over (last element, step): ``L[j][d]`` is the
    length of the longest progression ending at ``x_j`` with step ``d``.
    Time is ``O(|I|^2)``; the table is stored as one dict per element, so
    memory is ``O(|I|^2)`` in the worst case.  Ties go to the smallest step,
    then the smallest start.

    Raises
    ------
    ValueError
        If ``I`` is empty.
    """
    xs = list(I.members)
    if not xs:
        raise ValueError("cannot search an empty set")
    best = (1, -1, -xs[0])  # (length, -step, -start), step 1 for singletons
    best_ap = ApDescriptor(xs[0], 1, 1)
    tables: list[dict[int, int]] = []
    for j, x in enumerate(xs):
        row: dict[int, int] = {}
        for i in range(j):
            d = x - xs[i]
            row[d] = tables[i].get(d, 1) + 1
        tables.append(row)
        for d, length in row.items():
            start = x - (length - 1) * d
            key = (length, -d, -start)
            if key > best:
                best = key
                best_ap = ApDescriptor(start, d, length)
    return best_ap


def _ap_kernel_l1(N: int, ap: ApDescriptor, t: np.ndarray) -> np.ndarray:
    """``||F D_t||_1`` for the progression witness at each shift ``t``.

    ``|F D_t|`` at output ``j`` (1-based) is a Dirichlet kernel of length
    ``m`` evaluated at ``d (t - j + 1) / N``, divided by ``sqrt(N m)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    j = np.arange(N)
    out = np.empty(len(t))
    chunk = max(1, 2**21 // N)
    for lo in range(0, len(t), chunk):
        x = np.pi * ap.d * (t[lo : lo + chunk, None] - j) / N
        num = np.sin(ap.m * x)
        den = np.sin(x)
        small = np.abs(den) < 1e-12
        ratio = np.where(small, ap.m, np.abs(num) / np.where(small, 1.0, np.abs(den)))
        out[lo : lo + chunk] = ratio.sum(axis=-1)
    return out / math.sqrt(N * ap.m)


class ApWitness(NamedTuple):
    D: CoefficientVector
    t_star: float
    l1_of_FD: float
    bound: float
    grid_points: int


def _witness_vector(N: int, ap: ApDescriptor, t: float) -> CoefficientVector:
    values = np.zeros(N, dtype=complex)
    ks = np.array(ap.members())
    values[ks - 1] = np.exp(2j * np.pi * ks * t / N) / math.sqrt(ap.m)
    return CoefficientVector(N, values)


def ap_witness_search(N: int, ap: ApDescriptor, t_grid: int | None = None, refinements: int = 3) -> ApWitness:
    """Progression witness with the shift minimising ``||F D||_1`` on a grid.

    ``t_grid`` fixes the grid spacing as ``N / t_grid``.  The objective is
    even and has period ``gcd(d, N) / d`` in ``t``, so only one half-period
    is sampled at that spacing.  When the grid minimum misses
    ``(ln m / sqrt m) sqrt N``, the grid is refined four times around the
    best point, at most ``refinements`` times.

    Raises
    ------
    ValueError
        If the progression leaves ``{1..N}``, ``m < 2`` or ``t_grid < 16 N``.
    """
    members = ap.members()
    if members[0] < 1 or members[-1] > N:
        raise ValueError(f"progression {ap} is not contained in 1..{N}")
    if ap.m < 2:
        raise ValueError("progression witness needs length m >= 2")
    t_grid = 16 * N if t_grid is None else t_grid
    if t_grid < 16 * N:
        raise ValueError("t_grid must be at least 16 N")
    bound = math.log(ap.m) / math.sqrt(ap.m) * math.sqrt(N)
    half_period = math.gcd(ap.d, N) / (2 * ap.d)
    count = max(2, math.ceil(half_period * t_grid / N))
    ts = np.linspace(0.0, half_period, count + 1)
    values = _ap_kernel_l1(N, ap, ts)
    i = int(np.argmin(values))
    t_star, step = float(ts[i]), float(ts[1] - ts[0])
    points = len(ts)
    for _ in range(refinements):
        if values[i] <= bound:
            break
        ts = np.linspace(t_star - step, t_star + step, 9)
        values = _ap_kernel_l1(N, ap, ts)
        i = int(np.argmin(values))
        t_star, step = float(ts[i]), float(ts[1] - ts[0])
        points += len(ts)
    D = _witness_vector(N, ap, t_star)
    measured = float(np.sum(np.abs(np.fft.fft(D.values, norm="ortho"))))
    return ApWitness(D, t_star, measured, bound, points)


def ap_witness(N: int, ap: ApDescriptor, t_grid: int | None = None) -> CoefficientVector:
    """Unit vector on the progression whose transform has small 1-norm."""
    return ap_witness_search(N, ap, t_grid).D


class ApBound(NamedTuple):
    value: float
    formula: float
    measured: float
    ap: ApDescriptor
    certified: bool
    informative: bool


def cex_lower_bound_ap(I: IndexSet, N: int | None = None, t_grid: int | None = None) -> ApBound:
    """Extension-constant lower bound from the longest progression in ``I``.

    ``formula`` is ``sqrt(m) / ln m``; ``measured`` is
    ``sqrt(N) ||D||_2 / ||F D||_1`` for the constructed witness, itself a
    valid lower bound.  ``value`` is the larger of the two, and ``certified``
    says whether the witness reaches the formula.  For ``m < 2`` the value
    is 1 and ``informative`` is false.
    """
    N = I.ambient_size if N is None else N
    ap = longest_ap(I)
    if ap.m < 2:
        return ApBound(1.0, 1.0, 1.0, ap, True, False)
    formula = math.sqrt(ap.m) / math.log(ap.m)
    w = ap_witness_search(N, ap, t_grid)
    measured = math.sqrt(N) / w.l1_of_FD
    return ApBound(max(formula, measured), formula, measured, ap, measured >= formula, True)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


KERNEL_KINDS = ("dirichlet", "fejer", "difference")


@dataclass(frozen=True)
class KernelSpec:
    """Real symmetric trigonometric kernel ``sum_k c_k exp(2 pi i k t)``.

    dirichlet(n): ``c_k = 1`` for ``|k| < n``.
    fejer(n): ``c_k = 1 - |k|/n`` for ``|k| < n``.
    difference(r_L, N): ``(N Fej_N - r_L Fej_{r_L}) / (N - r_L)``, which has
    ``c_k = 1`` for ``|k| <= r_L`` and ``c_k = (N - |k|) / (N - r_L)`` for
    ``r_L < |k| < N``.
    """

    kind: str
    n: int = 0
    r_L: int = 0
    N: int = 0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "difference":
            if not 0 < self.r_L < self.N:
                raise ValueError("difference kernel needs 0 < r_L < N")
        elif self.n < 1:
            raise ValueError("kernel order must be positive")

    @classmethod
    def dirichlet(cls, n: int) -> "KernelSpec":
        return cls("dirichlet", n=n)

    @classmethod
    def fejer(cls, n: int) -> "KernelSpec":
        return cls("fejer", n=n)

    @classmethod
    def difference(cls, r_L: int, N: int) -> "KernelSpec":
        return cls("difference", r_L=r_L, N=N)

    @property
    def degree(self) -> int:
        return self.N if self.kind == "difference" else self.n

    def coefficients(self) -> np.ndarray:
        """``c_k`` for ``k = -degree .. degree``."""
        deg = self.degree
        k = np.abs(np.arange(-deg, deg + 1))
        if self.kind == "dirichlet":
            return (k < self.n).astype(float)
        if self.kind == "fejer":
            return np.clip(1 - k / self.n, 0, None)
        tail = (self.N - k) / (self.N - self.r_L)
        return np.where(k <= self.r_L, 1.0, np.clip(tail, 0, None))


def kernel_l1(spec: KernelSpec, quad_points: int | None = None) -> float:
    """``int_0^1 |K(t)| dt`` by the rectangle rule on a uniform grid.

    The grid evaluation is exact for the kernel's samples (inverse FFT of
    its coefficients); the rule converges quickly because ``|K|`` is smooth
    away from finitely many zeros.

    Raises
    ------
    ValueError
        If ``quad_points < 64 * degree``.
    """
    deg = spec.degree
    quad_points = 64 * deg if quad_points is None else quad_points
    if quad_points < 64 * deg:
        raise ValueError(f"need at least {64 * deg} quadrature points")
    c = spec.coefficients()
    spectrum = np.zeros(quad_points)
    k = np.arange(-deg, deg + 1)
    np.add.at(spectrum, k % quad_points, c)
    samples = np.fft.ifft(spectrum).real * quad_points
    return float(np.mean(np.abs(samples)))


def difference_kernel_bound(lam: float) -> float:
    return 2 * lam / (lam - 1)


# ---------------------------------------------------------------------------
# lacunary sets
# ---------------------------------------------------------------------------


def lacunary_set(lam: float, L: int) -> tuple[IndexSet, int]:
    """``r_1 = 1``, ``r_l = ceil(lam r_{l-1})`` inside ``{1..N}``, ``N = ceil(lam r_L)``."""
    if lam <= 1:
        raise ValueError("lacunarity ratio must exceed 1")
    if L < 1:
        raise ValueError("need at least one element")
    rs = [1]
    for _ in range(L - 1):
        rs.append(math.ceil(lam * rs[-1]))
    N = max(math.ceil(lam * rs[-1]), rs[-1])
    return IndexSet(N, tuple(rs)), N


def lacunary_ratio(lam: float, L: int, trials: int, rng_seed: int) -> float:
    """Largest ``sqrt(N) ||a||_2 / ||F a||_1`` over random ``a`` on a lacunary set.

    Coefficients are complex Gaussian.  The value is a lower estimate of the
    set's extension constant.
    """
    K, N = lacunary_set(lam, L)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(rng_seed)
    cols = np.asarray(K.members) - 1
    a = np.zeros((trials, N), dtype=complex)
    a[:, cols] = rng.standard_normal((trials, len(cols))) + 1j * rng.standard_normal((trials, len(cols)))
    y = np.fft.fft(a, axis=1, norm="ortho")
    ratios = math.sqrt(N) * np.linalg.norm(a, axis=1) / np.sum(np.abs(y), axis=1)
    return float(ratios.max())
