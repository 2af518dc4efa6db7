"""Combinatorics of Walsh index sets.

Correlation counts, pairing sets, the greedy splitting construction and the
low-L1 / high-L2 witness it produces, dyadic conditional expectations, and an
exhaustive search for the largest index set with a given extension constant.

All integrals here are exact: signals are integer or ``Fraction`` valued.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .systems import (
    CoefficientVector,
    DyadicStepSignal,
    IndexSet,
    ResolutionError,
    bit_reverse_permutation,
    fwht,
    level_of,
    mask_to_index_set,
    orbit_representatives,
    rademacher_signal,
    signal_from_coefficients,
    step_norms,
    subset_orbit_labels,
    walsh_product_index,
    walsh_signal,
)


class InternalInconsistencyError(RuntimeError):
    """A proven identity failed; indicates a defect, not bad input."""


class NoCorrelatorError(ValueError):
    """No Walsh function other than ``w_1`` pairs two elements of the set."""


def _check_set(I: IndexSet, N: int) -> int:
    n = level_of(N)
    if I.ambient_size != N:
        raise ValueError(f"index set lives in 1..{I.ambient_size}, expected 1..{N}")
    return n


# ---------------------------------------------------------------------------
# correlation
# ---------------------------------------------------------------------------


def m_set(r: int, I: IndexSet, N: int) -> IndexSet:
    """Elements ``k`` of ``I`` whose partner ``w_k w_r`` is also indexed in ``I``."""
    _check_set(I, N)
    if not 1 <= r <= N:
        raise ValueError(f"r={r} outside 1..{N}")
    members = set(I.members)
    return IndexSet(N, tuple(k for k in members if walsh_product_index(k, r, N) in members))


def _sum_signal(I: IndexSet, n: int) -> DyadicStepSignal:
    return signal_from_coefficients(I.mask().astype(np.int64), n)


def correlation(r: int, I: IndexSet, N: int) -> int:
    """``int_0^1 w_r |sum_{k in I} w_k|^2``, evaluated exactly on dyadic cells."""
    n = _check_set(I, N)
    s = _sum_signal(I, n)
    value = (walsh_signal(r, n) * s * s).integral()
    if value.denominator != 1:
        raise InternalInconsistencyError(f"non-integer correlation {value}")
    return int(value)


@dataclass(frozen=True)
class CorrelationProfile:
    """All correlations of ``I``; ``values[r - 1]`` belongs to ``w_r``."""

    N: int
    I: IndexSet
    values: np.ndarray

    def at(self, r: int) -> int:
        return int(self.values[r - 1])

    def to_rows(self) -> list[dict]:
        return [{"r": r, "correlation": int(v)} for r, v in enumerate(self.values, start=1)]


def correlation_profile(I: IndexSet, N: int) -> CorrelationProfile:
    """Every ``C(w_r, I)`` at once from one transform of ``|sum w_k|^2``.

    Raises
    ------
    InternalInconsistencyError
        If the values do not sum to ``|I|^2`` or ``C(w_1, I) != |I|``.
    """
    n = _check_set(I, N)
    cells = fwht(I.mask().astype(np.int64))[bit_reverse_permutation(n)]
    raw = fwht((cells * cells)[bit_reverse_permutation(n)])
    if np.any(raw % N):
        raise InternalInconsistencyError("correlation integrals are not integers")
    values = raw // N
    size = len(I)
    if int(values.sum()) != size * size or int(values[0]) != size:
        raise InternalInconsistencyError(
            f"profile sums to {int(values.sum())}, expected {size * size}"
        )
    return CorrelationProfile(N, I, values)


# ---------------------------------------------------------------------------
# splitting construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitStage:
    r: int
    correlation: int
    m_set: IndexSet
    half_a: IndexSet
    half_b: IndexSet

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "correlation": self.correlation,
            "m_size": len(self.m_set),
            "M": self.m_set.to_list(),
            "A": self.half_a.to_list(),
            "B": self.half_b.to_list(),
        }


def split_stage(I: IndexSet, N: int) -> tuple[int, IndexSet, IndexSet]:
    """One greedy halving step.

    Picks the ``r >= 2`` of largest correlation (smallest ``r`` on ties) and
    splits its pairing set into the lower and upper index of each pair.

    Raises
    ------
    NoCorrelatorError
        If every correlation with ``r >= 2`` vanishes.
    """
    stage = _split(I, N)
    return stage.r, stage.half_a, stage.half_b


def _split(I: IndexSet, N: int) -> SplitStage:
    profile = correlation_profile(I, N)
    tail = profile.values[1:]
    if len(tail) == 0 or tail.max() == 0:
        raise NoCorrelatorError("no Walsh function with r >= 2 correlates with the set")
    r = int(np.argmax(tail)) + 2
    M = m_set(r, I, N)
    lower = tuple(k for k in M.members if k < walsh_product_index(k, r, N))
    A = IndexSet(N, lower)
    B = IndexSet(N, tuple(walsh_product_index(k, r, N) for k in lower))
    return SplitStage(r, profile.at(r), M, A, B)


@dataclass(frozen=True)
class SplitTrace:
    """Record of the repeated halving started from ``I``."""

    N: int
    I: IndexSet
    stages: tuple[SplitStage, ...]
    terminal_pair: tuple[int, int]

    @property
    def m(self) -> int:
        return len(self.stages)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "I": self.I.to_list(),
            "m": self.m,
            "terminal_pair": list(self.terminal_pair),
            "stages": [s.to_json() for s in self.stages],
        }


def split_trace(I: IndexSet, N: int) -> SplitTrace:
    """Halve repeatedly, keeping the lower halves, until one index remains."""
    _check_set(I, N)
    if len(I) < 2:
        raise ValueError("need at least two indices to split")
    stages = []
    J = I
    while len(J) >= 2:
        try:
            stage = _split(J, N)
        except NoCorrelatorError:
            break
        stages.append(stage)
        J = stage.half_a
    last = stages[-1]
    i1 = last.half_a.members[0]
    return SplitTrace(N, I, tuple(stages), (i1, walsh_product_index(i1, last.r, N)))


@dataclass(frozen=True)
class WitnessReport:
    """Witness built from a split trace.

    ``f0`` is the sum of ``2^m`` distinct Walsh functions indexed inside
    ``I``.  Norm fields are exact ``Fraction`` values.
    """

    f0: DyadicStepSignal
    support: IndexSet
    m: int
    l1_of_f: Fraction
    l2sq_of_f: Fraction
    l1_of_one_plus_f: Fraction
    l2sq_of_one_plus_f: Fraction
    ratio: float
    product_identity_holds: bool
    trace: SplitTrace = field(repr=False)

    @property
    def l1_bound(self) -> int:
        return 1 + self.m

    @property
    def l2sq_bound(self) -> int:
        return 2**self.m - self.m**2

    def bounds_hold(self) -> bool:
        return self.l1_of_one_plus_f <= self.l1_bound and self.l2sq_of_one_plus_f >= self.l2sq_bound

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "support": self.support.to_list(),
            "l1_of_f": str(self.l1_of_f),
            "l2sq_of_f": str(self.l2sq_of_f),
            "l1_of_one_plus_f": str(self.l1_of_one_plus_f),
            "l2sq_of_one_plus_f": str(self.l2sq_of_one_plus_f),
            "ratio": self.ratio,
            "product_identity_holds": self.product_identity_holds,
            "trace": self.trace.to_json(),
        }


def main_lemma_witness(I: IndexSet, N: int) -> WitnessReport:
    """Witness with ``||1+f||_1 <= 1+m`` and ``||1+f||_2^2 >= 2^m - m^2``.

    Starting from ``w_{i1}`` of the terminal pair, each stage is undone by
    multiplying with ``1 + w_r``; the halves being disjoint, every product
    doubles the number of distinct Walsh terms and keeps them inside ``I``.

    Raises
    ------
    ValueError
        If ``I`` has fewer than two elements.
    InternalInconsistencyError
        If the support leaves ``I`` or a norm bound fails.
    """
    n = _check_set(I, N)
    trace = split_trace(I, N)
    terms = {trace.terminal_pair[0]}
    for stage in reversed(trace.stages):
        terms |= {walsh_product_index(k, stage.r, N) for k in terms}
    m = trace.m
    support = IndexSet(N, tuple(terms))
    if len(support) != 2**m or not set(terms) <= set(I.members):
        raise InternalInconsistencyError("witness support is not 2^m distinct members of I")

    f0 = _sum_signal(support, n)
    one_plus = f0 + 1
    nf = step_norms(f0)
    ng = step_norms(one_plus)

    product = DyadicStepSignal.constant(1, n)
    for stage in trace.stages:
        product = product * (walsh_signal(stage.r, n) + 1)
    for stage in trace.stages:
        product = product - walsh_signal(stage.r, n)
    identity = product == one_plus

    report = WitnessReport(
        f0=f0,
        support=support,
        m=m,
        l1_of_f=nf.l1,
        l2sq_of_f=nf.l2_squared,
        l1_of_one_plus_f=ng.l1,
        l2sq_of_one_plus_f=ng.l2_squared,
        ratio=ng.l2 / float(ng.l1),
        product_identity_holds=bool(identity),
        trace=trace,
    )
    if not report.bounds_hold():
        raise InternalInconsistencyError(f"witness norm bounds fail for m={m}")
    return report


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def guaranteed_stages(delta, N: int) -> int:
    """Largest integer ``m`` with ``N >= (2/delta)^(m+1)``; ``-1`` if none is >= 0.

    Floats are read through their shortest decimal representation, so
    ``0.3`` means ``3/10``.
    """
    d = _as_fraction(delta)
    if not 0 < d <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    base = 2 / d
    m = -1
    while base ** (m + 2) <= N:
        m += 1
    return m


class CexBound(NamedTuple):
    m: int
    bound: Fraction
    informative: bool


def cex_lower_bound_walsh(delta, N: int) -> CexBound:
    """Lower bound ``(2^m - m^2)/(1+m)`` on the extension constant at density ``delta``.

    ``informative`` is false when the bound does not exceed 1, which every
    nonzero information set attains trivially.

    Raises
    ------
    ValueError
        If no ``m >= 1`` satisfies ``N >= (2/delta)^(m+1)``.
    """
    level_of(N)
    m = guaranteed_stages(delta, N)
    if m < 1:
        raise ValueError(f"N={N} is too small for density {delta}: need N >= (2/delta)^2")
    bound = Fraction(2**m - m * m, 1 + m)
    return CexBound(m, bound, bound > 1)


# ---------------------------------------------------------------------------
# dyadic projections
# ---------------------------------------------------------------------------


def _exact_values(f: DyadicStepSignal) -> np.ndarray:
    return np.array([Fraction(v) for v in f.values.tolist()], dtype=object)


def dyadic_projection(f: DyadicStepSignal, target_level: int) -> DyadicStepSignal:
    """Average ``f`` over dyadic cells of length ``2^-target_level``.

    The result is returned at ``target_level``.  Averages are taken by
    repeated pairwise halving so that the float result never exceeds the
    input sup norm; integer and ``Fraction`` inputs yield ``Fraction`` output.
    """
    if not 0 <= target_level <= f.level:
        raise ResolutionError(f"cannot project level {f.level} onto level {target_level}")
    v = _exact_values(f) if f.is_exact else f.values.astype(float)
    for _ in range(f.level - target_level):
        v = (v[0::2] + v[1::2]) / 2
    return DyadicStepSignal(target_level, v)


def q_shift(f: DyadicStepSignal, m: int) -> DyadicStepSignal:
    """``r_m (P_{2^(m+1)} f - P_{2^m} f)``, returned at level ``m``.

    Multiplying the band ``w_{2^m+1} .. w_{2^(m+1)}`` by ``r_m = w_{2^m+1}``
    moves it onto ``w_1 .. w_{2^m}``, so the product is constant on level-m
    cells.
    """
    if m < 0 or f.level < m + 1:
        raise ResolutionError(f"q_shift with m={m} needs level >= {m + 1}, got {f.level}")
    band = dyadic_projection(f, m + 1) - dyadic_projection(f, m)
    # the product is constant on level-m cells; averaging pairs reads it off
    return dyadic_projection(rademacher_signal(m, m + 1) * band, m)


# ---------------------------------------------------------------------------
# optimal subset search
# ---------------------------------------------------------------------------


MAX_SUBSET_SEARCH_N = 16


def _affine_generators(n: int) -> list[np.ndarray]:
    """Index permutations generating the affine group of ``F_2^n`` on 0-based indices."""
    s = np.arange(2**n)
    gens = [s ^ (1 << i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                gens.append(s ^ (((s >> j) & 1) << i))
    return gens


def subset_orbits(N: int) -> np.ndarray:
    """Orbit label of every subset bitmask of ``{1..N}`` under the affine group of ``F_2^n``.

    The extension constant of a Walsh index set is unchanged by these
    relabellings: translations multiply the signal by a fixed ``w_t``, and
    linear maps permute dyadic cells.
    """
    return subset_orbit_labels(N, _affine_generators(level_of(N)))


class OptimalSubset(NamedTuple):
    size: int
    subset: IndexSet
    cex: float


def _default_oracle(N: int, K: IndexSet, a: CoefficientVector) -> float:
    from .extension_solver import ExtensionProblem, solve_min_sup

    problem = ExtensionProblem("walsh", N, K, K.complement(), a)
    return solve_min_sup(problem, method="lp").achieved_sup


def optimal_subset_size(
    N: int,
    C: float,
    solver_handle: Callable[[int, IndexSet, CoefficientVector], float] | None = None,
    tol: float = 1e-6,
) -> OptimalSubset:
    """Largest Walsh index set whose every unit vector extends with peak ``<= C``.

    Subsets are scanned from the largest size down, one representative per
    affine orbit.  For each candidate the hardest unit vector is found
    exactly from the vertices of the L1 ball of its span; the set is accepted
    when ``solver_handle`` reports a min-sup peak at most ``C + tol`` for it.

    Parameters
    ----------
    N : int
        Power of two, at most 16.
    C : float
        Target extension constant.
    solver_handle : callable, optional
        ``(N, K, a) -> min-sup peak`` with the complement as compensation
        set.  Defaults to the LP solver.

    Returns
    -------
    OptimalSubset
        Size, a witnessing subset (empty if none) and its extension constant.
    """
    from .extension_solver import walsh_cex_exact

    level_of(N)
    if N > MAX_SUBSET_SEARCH_N:
        raise ValueError(f"exhaustive subset search limited to N <= {MAX_SUBSET_SEARCH_N}")
    oracle = solver_handle or _default_oracle
    labels = subset_orbits(N)
    for size in range(N, 0, -1):
        for rep in orbit_representatives(labels, size):
            K = mask_to_index_set(rep, N)
            cex, a = walsh_cex_exact(K, N)
            if oracle(N, K, a) <= C + tol:
                return OptimalSubset(size, K, cex)
    return OptimalSubset(0, IndexSet(N, ()), 0.0)
