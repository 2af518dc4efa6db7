"""Min-sup compensation solvers and extension-constant estimates.

An :class:`ExtensionProblem` fixes information coefficients ``a`` on ``K``
and asks for compensation coefficients ``b`` on ``comp_set`` minimising the
peak modulus of the combined signal.

Signals are sampled on a finite grid:

* Walsh: the ``N`` dyadic cells at level ``log2 N`` (exact sup norm).
* Fourier: ``grid_factor * N`` uniform points ``t_q = q / (grid_factor N)``
  with characters ``exp(2 pi i k t)``, ``k = 1..N``.  With ``grid_factor=1``
  these are the points of the discrete transform.

On either grid the basis matrix ``Phi`` satisfies ``Phi^H Phi = M I`` with
``M`` the number of samples, which makes orthogonal projection cheap.

For a full compensation set the smallest achievable peak for unit ``a``,
maximised over ``a``, equals the largest value of
``sqrt(M) ||g||_2 / ||g||_1`` over samples ``g`` of signals in the span of
``K``.  :func:`norm_equiv_ratio` estimates the right-hand side and
:func:`empirical_cex` the left-hand side.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog

from .papr_core import adversarial_witness, check_system
from .systems import (
    CoefficientVector,
    IndexSet,
    bit_reverse_permutation,
    l1_ball_vertices,
    level_of,
    mask_to_index_set,
    orbit_representatives,
    subset_orbit_labels,
    walsh_matrix,
)
from .walsh_tools import dyadic_projection, main_lemma_witness, subset_orbits

METHODS = ("lp", "pocs", "brute")
POLYGON_SIDES = 32
BRUTE_MAX_N = 8
EXHAUSTIVE_MAX_K = 16


class NonConvergenceError(RuntimeError):
    """A solver exhausted its budget; the partial result is attached."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


# ---------------------------------------------------------------------------
# problem / result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtensionProblem:
    """Tone-reservation instance.

    Attributes
    ----------
    system_tag : str
        ``"walsh"`` or ``"fourier"``.
    N : int
        Number of basis functions.
    info_set : IndexSet
        Indices carrying the fixed coefficients ``a``.
    comp_set : IndexSet
        Indices available for compensation; disjoint from ``info_set``.
    a : CoefficientVector
        Nonzero, supported on ``info_set``.
    grid_factor : int
        Fourier oversampling of the peak grid; ignored for Walsh.
    """

    system_tag: str
    N: int
    info_set: IndexSet
    comp_set: IndexSet
    a: CoefficientVector
    grid_factor: int = 1

    def __post_init__(self):
        check_system(self.system_tag)
        if self.system_tag == "walsh":
            level_of(self.N)
            if self.a.is_complex:
                raise ValueError("Walsh coefficients must be real")
        for s in (self.info_set, self.comp_set):
            if s.ambient_size != self.N:
                raise ValueError("index sets must live in 1..N")
        if self.a.ambient_size != self.N:
            raise ValueError("coefficient vector has the wrong length")
        if not self.info_set.isdisjoint(self.comp_set):
            raise ValueError("information and compensation sets overlap")
        if not np.any(self.a.values != 0):
            raise ValueError("information coefficients must be nonzero")
        if np.any(self.a.values[~self.info_set.mask()] != 0):
            raise ValueError("a has entries outside the information set")
        if self.grid_factor < 1:
            raise ValueError("grid_factor must be positive")

    def basis(self) -> np.ndarray:
        return basis_matrix(self.system_tag, self.N, self.grid_factor)

    def to_json(self) -> dict:
        return {
            "system_tag": self.system_tag,
            "N": self.N,
            "info_set": self.info_set.to_list(),
            "comp_set": self.comp_set.to_list(),
            "a": self.a.to_json(),
            "grid_factor": self.grid_factor,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExtensionProblem":
        N = int(data["N"])
        a = CoefficientVector.from_json(data["a"])
        if data["system_tag"] == "fourier" and not a.is_complex:
            a = CoefficientVector(N, a.values.astype(complex))
        return cls(
            data["system_tag"],
            N,
            IndexSet(N, tuple(data["info_set"])),
            IndexSet(N, tuple(data["comp_set"])),
            a,
            int(data.get("grid_factor", 1)),
        )


@dataclass(frozen=True)
class ExtensionResult:
    """Solver output.

    ``achieved_sup`` is the peak of the signal assembled from ``a`` and
    ``b``, recomputed after solving.  ``optimality_gap`` is the distance to a
    certified lower bound for ``lp`` and ``brute``, and the final bisection
    bracket width for ``pocs``.
    """

    b: CoefficientVector
    achieved_sup: float
    method: str
    optimality_gap: float
    iterations: int
    converged: bool = True

    def to_json(self) -> dict:
        return {
            "b": self.b.to_json(),
            "achieved_sup": self.achieved_sup,
            "method": self.method,
            "optimality_gap": self.optimality_gap,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExtensionResult":
        return cls(
            CoefficientVector.from_json(data["b"]),
            float(data["achieved_sup"]),
            data["method"],
            float(data["optimality_gap"]),
            int(data["iterations"]),
            bool(data.get("converged", True)),
        )


def basis_matrix(system_tag: str, N: int, grid_factor: int = 1) -> np.ndarray:
    """Samples of the basis: column ``k - 1`` holds the ``k``-th function."""
    check_system(system_tag)
    if system_tag == "walsh":
        return walsh_matrix(level_of(N)).astype(float)
    M = grid_factor * N
    q = np.arange(M)[:, None]
    k = np.arange(1, N + 1)[None, :]
    return np.exp(2j * np.pi * ((q * k) % M) / M)


def assemble(problem: ExtensionProblem, b: CoefficientVector) -> np.ndarray:
    """Grid samples of the signal with coefficients ``a + b``."""
    return problem.basis() @ (problem.a.values + b.values)


def peak(problem: ExtensionProblem, b: CoefficientVector) -> float:
    return float(np.max(np.abs(assemble(problem, b))))


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------


def _zero_b(problem: ExtensionProblem) -> CoefficientVector:
    dtype = complex if problem.system_tag == "fourier" else float
    return CoefficientVector(problem.N, np.zeros(problem.N, dtype=dtype))


def _trivial(problem: ExtensionProblem, method: str) -> ExtensionResult:
    b = _zero_b(problem)
    return ExtensionResult(b, peak(problem, b), method, 0.0, 0)


def _solve_lp(problem: ExtensionProblem) -> ExtensionResult:
    Phi = problem.basis()
    comp = np.asarray(problem.comp_set.members, dtype=int) - 1
    fixed = Phi @ problem.a.values
    if problem.system_tag == "walsh":
        A = Phi[:, comp]
        ones = np.ones((len(fixed), 1))
        A_ub = np.block([[A, -ones], [-A, -ones]])
        b_ub = np.concatenate([-fixed, fixed])
        nb = len(comp)
    else:
        # |s| <= t relaxed to Re(s exp(-i theta_p)) <= t on P directions.
        A = Phi[:, comp]
        theta = 2 * np.pi * np.arange(POLYGON_SIDES) / POLYGON_SIDES
        rot = np.exp(-1j * theta)[:, None, None]
        re_part = (rot * A[None]).real
        im_part = (rot * 1j * A[None]).real
        rows = np.concatenate([re_part, im_part], axis=2).reshape(-1, 2 * len(comp))
        ones = np.ones((rows.shape[0], 1))
        A_ub = np.hstack([rows, -ones])
        b_ub = -(np.exp(-1j * theta)[:, None] * fixed[None]).real.reshape(-1)
        nb = 2 * len(comp)
    c = np.zeros(nb + 1)
    c[-1] = 1.0
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=[(None, None)] * (nb + 1),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise NonConvergenceError(f"LP failed: {res.message}")
    x = res.x
    values = np.zeros(problem.N, dtype=complex if problem.system_tag == "fourier" else float)
    if problem.system_tag == "walsh":
        values[comp] = x[: len(comp)]
    else:
        values[comp] = x[: len(comp)] + 1j * x[len(comp) : 2 * len(comp)]
    b = CoefficientVector(problem.N, values)
    achieved = peak(problem, b)
    dual_bound = float(b_ub @ res.ineqlin.marginals)
    gap = max(0.0, achieved - dual_bound)
    return ExtensionResult(b, achieved, "lp", gap, int(res.nit))


def _solve_brute(problem: ExtensionProblem) -> ExtensionResult:
    """Exact optimum by enumerating the vertices of the epigraph polytope.

    At an optimal vertex ``|comp| + 1`` cell constraints ``sign_i s_i = t``
    are tight; every such system is solved and the best feasible one kept.
    """
    if problem.system_tag != "walsh":
        raise ValueError("brute force is only available for the Walsh system")
    if problem.N > BRUTE_MAX_N:
        raise ValueError(f"brute force is limited to N <= {BRUTE_MAX_N}")
    Phi = problem.basis()
    comp = np.asarray(problem.comp_set.members, dtype=int) - 1
    fixed = Phi @ problem.a.values
    d = len(comp) + 1
    A = Phi[:, comp]
    cells = np.array(list(itertools.combinations(range(problem.N), d)))
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=d)))
    rows = A[cells]  # (C, d, d-1)
    rhs_fixed = fixed[cells]  # (C, d)
    # sign * (A b + fixed) = t  ->  [sign*A, -1] (b, t) = -sign*fixed
    mats = signs[None, :, :, None] * rows[:, None, :, :]
    mats = np.concatenate([mats, -np.ones(mats.shape[:-1] + (1,))], axis=-1)
    rhs = -signs[None] * rhs_fixed[:, None]
    mats = mats.reshape(-1, d, d)
    rhs = rhs.reshape(-1, d)
    ok = np.abs(np.linalg.det(mats)) > 1e-9
    sol = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    b_all, t_all = sol[:, :-1], sol[:, -1]
    sig = fixed[None] + b_all @ A.T
    feasible = np.max(np.abs(sig), axis=1) <= t_all + 1e-9
    best = int(np.argmin(np.where(feasible, t_all, np.inf)))
    values = np.zeros(problem.N)
    values[comp] = b_all[best]
    b = CoefficientVector(problem.N, values)
    return ExtensionResult(b, peak(problem, b), "brute", 0.0, int(ok.sum()))


def pocs_min_sup(
    system_tag: str,
    N: int,
    info_set: IndexSet,
    comp_set: IndexSet,
    a_batch: np.ndarray,
    grid_factor: int = 1,
    max_iter: int = 4000,
    rel_tol: float = 1e-4,
) -> list[ExtensionResult]:
    """Clip-and-project solver, vectorised over a batch of information vectors.

    For a trial level ``tau`` the iteration alternates two projections:
    clipping every sample to modulus ``tau`` (phase kept), and restoring the
    coefficient constraints (``a`` on ``info_set``, zero off
    ``info_set`` and ``comp_set``).  ``tau`` is bisected between the 2-norm of
    ``a``, which no compensation can beat, and the uncompensated peak, until
    the bracket is narrower than ``rel_tol * ||a||_2``.  The returned point is
    the best one seen, so its peak is attained exactly.

    Parameters
    ----------
    a_batch : ndarray, shape (B, N)
        Information vectors, each supported on ``info_set``.
    max_iter : int
        Clip-and-project sweeps allowed per bisection step.
    """
    Phi = basis_matrix(system_tag, N, grid_factor)
    M = Phi.shape[0]
    a_batch = np.atleast_2d(np.asarray(a_batch))
    keep = comp_set.mask()
    info = info_set.mask()
    fixed_coef = np.where(info[None], a_batch, 0)
    PhiH = Phi.conj().T / M

    def project(s, idx):
        c = s @ PhiH.T
        c = np.where(keep[None], c, fixed_coef[idx])
        return c, c @ Phi.T

    def peaks(s):
        return np.max(np.abs(s), axis=1)

    norm_a = np.sqrt(np.sum(np.abs(a_batch) ** 2, axis=1))
    c0 = fixed_coef.astype(Phi.dtype)
    s0 = c0 @ Phi.T
    best_sup = peaks(s0)
    best_c = c0.copy()
    lo = norm_a.copy()
    hi = best_sup.copy()
    s = s0.copy()
    iterations = np.zeros(len(a_batch), dtype=int)
    active = hi - lo > rel_tol * norm_a
    while np.any(active):
        tau = (lo + hi) / 2
        idx = np.flatnonzero(active)
        x = s[idx]
        feasible = np.zeros(len(idx), dtype=bool)
        stalled = np.zeros(len(idx), dtype=bool)
        for _ in range(max_iter):
            mag = np.abs(x)
            scale = np.minimum(1.0, tau[idx, None] / np.maximum(mag, 1e-300))
            prev = x
            c, x = project(x * scale, idx)
            # a fixed point above tau means the two sets do not meet
            stalled |= np.max(np.abs(x - prev), axis=1) <= 1e-13 * norm_a[idx]
            p = peaks(x)
            improved = p < best_sup[idx]
            if np.any(improved):
                best_sup[idx[improved]] = p[improved]
                best_c[idx[improved]] = c[improved]
            iterations[idx] += 1
            feasible |= p <= tau[idx] * (1 + 1e-12)
            if np.all(feasible | stalled):
                break
        s[idx] = x
        hi[idx] = np.where(feasible, np.minimum(hi[idx], best_sup[idx]), hi[idx])
        lo[idx] = np.where(feasible, lo[idx], tau[idx])
        active = hi - lo > rel_tol * norm_a
    out = []
    for i in range(len(a_batch)):
        values = np.where(keep, best_c[i], 0)
        if system_tag == "walsh":
            values = values.real
        b = CoefficientVector(N, values)
        out.append(
            ExtensionResult(b, float(best_sup[i]), "pocs", float(hi[i] - lo[i]), int(iterations[i]))
        )
    return out


def solve_min_sup(problem: ExtensionProblem, method: str = "lp", budget: int | None = None) -> ExtensionResult:
    """Minimise the peak of the compensated signal.

    Parameters
    ----------
    problem : ExtensionProblem
    method : {"lp", "pocs", "brute"}
        ``lp`` solves the epigraph linear program (exact for Walsh; for
        Fourier the modulus is replaced by a 32-sided polygon, which
        under-estimates it by at most a factor ``sec(pi/32)``, and the true
        peak of the returned point is reported).  ``pocs`` runs
        :func:`pocs_min_sup`.  ``brute`` enumerates LP vertices exactly
        (Walsh, ``N <= 8``).
    budget : int, optional
        Iteration cap per bisection step for ``pocs``.

    Raises
    ------
    NonConvergenceError
        When the LP solver fails.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if len(problem.comp_set) == 0:
        return _trivial(problem, method)
    if method == "lp":
        return _solve_lp(problem)
    if method == "brute":
        return _solve_brute(problem)
    kwargs = {} if budget is None else {"max_iter": int(budget)}
    return pocs_min_sup(
        problem.system_tag,
        problem.N,
        problem.info_set,
        problem.comp_set,
        problem.a.values[None],
        problem.grid_factor,
        **kwargs,
    )[0]


# ---------------------------------------------------------------------------
# extension constants and norm ratios
# ---------------------------------------------------------------------------


def _restricted_unit(values: np.ndarray, K: IndexSet) -> np.ndarray | None:
    v = np.where(K.mask(), values, 0)
    norm = np.sqrt(np.sum(np.abs(v) ** 2))
    if norm == 0:
        return None
    return v / norm


def empirical_cex(
    system_tag: str,
    N: int,
    K: IndexSet,
    comp: IndexSet,
    trials: int,
    rng_seed: int,
    method: str = "lp",
    probes: Sequence[CoefficientVector] = (),
    grid_factor: int = 1,
) -> float:
    """Largest compensated peak over sampled unit information vectors.

    Candidates are ``trials`` Gaussian vectors on ``K``, the all-ones witness
    restricted to ``K`` and any extra ``probes``.  Each is normalised.  A
    run that fails to converge is left out of the maximum.  The result is a
    lower bound on the extension constant of ``(K, comp)``.
    """
    check_system(system_tag)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if len(K) == 0:
        raise ValueError("information set is empty")
    rng = np.random.default_rng(rng_seed)
    candidates = []
    for _ in range(trials):
        g = rng.standard_normal(N)
        if system_tag == "fourier":
            g = g + 1j * rng.standard_normal(N)
        candidates.append(g)
    candidates.append(adversarial_witness(system_tag, N).values)
    candidates.extend(p.values for p in probes)
    best = 0.0
    for values in candidates:
        a = _restricted_unit(values, K)
        if a is None:
            continue
        problem = ExtensionProblem(system_tag, N, K, comp, CoefficientVector(N, a), grid_factor)
        try:
            result = solve_min_sup(problem, method)
        except NonConvergenceError:
            continue
        if result.converged:
            best = max(best, result.achieved_sup)
    return best


def sample_ratio(system_tag: str, N: int, coefficients: np.ndarray) -> np.ndarray:
    """``sqrt(N) ||y||_2 / ||y||_1`` for the grid samples ``y`` of each row.

    Walsh samples are the cell values; Fourier samples are the unitary DFT of
    the coefficient vector.
    """
    c = np.atleast_2d(coefficients)
    if system_tag == "walsh":
        n = level_of(N)
        from .systems import fwht

        y = fwht(c)[..., bit_reverse_permutation(n)]
    else:
        y = np.fft.fft(c, axis=-1, norm="ortho")
    mag = np.abs(y)
    return math.sqrt(N) * np.sqrt(np.sum(mag**2, axis=-1)) / np.sum(mag, axis=-1)


def walsh_cex_exact(K: IndexSet, N: int) -> tuple[float, CoefficientVector]:
    """Exact extension constant of ``K`` with the full complement as compensation.

    Equals the largest ``||g||_2 / ||g||_1`` over Walsh polynomials ``g``
    spanned by ``K``, attained on a vertex of the unit L1 ball of that span.
    Returns the value and the unit coefficient vector of a maximiser.
    """
    n = level_of(N)
    if len(K) == 0:
        raise ValueError("information set is empty")
    cols = np.asarray(K.members, dtype=int) - 1
    basis = walsh_matrix(n)[:, cols].astype(float)
    dirs = l1_ball_vertices(basis)
    g = dirs @ basis.T
    ratios = math.sqrt(N) * np.linalg.norm(g, axis=1) / np.sum(np.abs(g), axis=1)
    i = int(np.argmax(ratios))
    values = np.zeros(N)
    values[cols] = dirs[i] / np.linalg.norm(dirs[i])
    return float(ratios[i]), CoefficientVector(N, values)


NORM_MODES = ("witness", "random", "exhaustive_signs", "vertices")


def _sign_patterns(d: int, allow_zero: bool) -> np.ndarray:
    """Sign patterns on ``d`` slots up to a global sign (first nonzero entry +1)."""
    alphabet = (-1, 0, 1) if allow_zero else (-1, 1)
    pats = np.array(list(itertools.product(alphabet, repeat=d)), dtype=float)
    nz = pats != 0
    has = nz.any(axis=1)
    first = np.where(has, pats[np.arange(len(pats)), np.argmax(nz, axis=1)], 0)
    return pats[has & (first > 0)]


def norm_equiv_ratio(
    system_tag: str,
    N: int,
    K: IndexSet,
    mode: str = "random",
    budget: int = 1000,
    rng_seed: int = 0,
    allow_zero: bool = False,
    return_argmax: bool = False,
):
    """Largest ``sqrt(N) ||y||_2 / ||y||_1`` found among signals spanned by ``K``.

    Modes
    -----
    witness
        Walsh: the splitting witness ``f`` and, when ``1`` is in ``K``, also
        ``1 + f``.  Fourier: the progression witness on the longest AP in ``K``.
    random
        ``budget`` Gaussian coefficient vectors.
    exhaustive_signs
        Every ``+-1`` pattern on ``K`` (``{-1, 0, 1}`` with ``allow_zero``),
        ``|K| <= 16``.
    vertices
        Walsh only: the exact maximum over the span.

    With ``return_argmax`` a ``(ratio, CoefficientVector)`` pair is returned.
    """
    check_system(system_tag)
    if mode not in NORM_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {NORM_MODES}")
    if len(K) == 0:
        raise ValueError("information set is empty")
    cols = np.asarray(K.members, dtype=int) - 1
    dtype = complex if system_tag == "fourier" else float

    if mode == "vertices":
        if system_tag != "walsh":
            raise ValueError("vertex enumeration is only exact for the Walsh system")
        value, a = walsh_cex_exact(K, N)
        return (value, a) if return_argmax else value

    if mode == "witness":
        cands = _witness_candidates(system_tag, N, K)
    elif mode == "random":
        rng = np.random.default_rng(rng_seed)
        g = rng.standard_normal((budget, len(cols)))
        if system_tag == "fourier":
            g = g + 1j * rng.standard_normal((budget, len(cols)))
        cands = np.zeros((budget, N), dtype=dtype)
        cands[:, cols] = g
    else:
        limit = 12 if allow_zero else EXHAUSTIVE_MAX_K
        if len(cols) > limit:
            raise ValueError(f"exhaustive sign search is limited to |K| <= {limit}")
        pats = _sign_patterns(len(cols), allow_zero)
        cands = np.zeros((len(pats), N), dtype=dtype)
        cands[:, cols] = pats
    ratios = sample_ratio(system_tag, N, cands)
    i = int(np.argmax(ratios))
    if not return_argmax:
        return float(ratios[i])
    best = cands[i] / np.linalg.norm(cands[i])
    return float(ratios[i]), CoefficientVector(N, best)


def _witness_candidates(system_tag: str, N: int, K: IndexSet) -> np.ndarray:
    if system_tag == "walsh":
        if len(K) == 1:
            c = K.mask().astype(float)
            return c[None]
        report = main_lemma_witness(K, N)
        f = report.support.mask().astype(float)
        rows = [f]
        if 1 in K:
            g = f.copy()
            g[0] += 1
            rows.append(g)
        return np.array(rows)
    from .fourier_tools import ap_witness, longest_ap

    ap = longest_ap(K)
    if ap.m < 2:
        return K.mask().astype(complex)[None]
    return ap_witness(N, ap).values[None]


class CrosscheckReport(NamedTuple):
    lower: float
    upper: float
    holds: bool
    argmax: CoefficientVector


def equivalence_crosscheck(
    system_tag: str,
    N: int,
    K: IndexSet,
    comp: IndexSet | None = None,
    budget: int = 20,
    rng_seed: int = 0,
    method: str = "lp",
    rel_tol: float = 1e-3,
    slack: float = 1e-6,
) -> CrosscheckReport:
    """Bracket the extension constant between a norm ratio and a solver run.

    ``lower`` is the best norm ratio over the span of ``K`` (exact vertices
    for Walsh, exhaustive signs or random sampling for Fourier); ``upper`` is
    :func:`empirical_cex` with the ratio's maximiser included as a probe.
    Any valid compensation must reach the maximiser's ratio, so
    ``lower <= upper`` up to tolerance.
    """
    comp = K.complement() if comp is None else comp
    if system_tag == "walsh":
        mode = "vertices"
    elif len(K) <= EXHAUSTIVE_MAX_K:
        mode = "exhaustive_signs"
    else:
        mode = "random"
    lower, arg = norm_equiv_ratio(system_tag, N, K, mode, rng_seed=rng_seed, return_argmax=True)
    upper = empirical_cex(system_tag, N, K, comp, budget, rng_seed, method, probes=[arg])
    holds = lower <= upper * (1 + rel_tol) + slack
    return CrosscheckReport(lower, upper, bool(holds), arg)


# ---------------------------------------------------------------------------
# dyadic compensation with Rademacher information
# ---------------------------------------------------------------------------


def rademacher_positions(n: int, convention: str = "recursion") -> IndexSet:
    """Indices of Rademacher-type information inside ``{1..2^n}``.

    ``recursion``: ``2^j + 1`` for ``j < n``, where ``w_{2^j+1} = r_j``.
    ``powers``: ``1, 2, 4, ..., 2^n``, i.e. ``w_1`` and the products
    ``r_0 r_1 ... r_{j-1}``.
    """
    N = 2**n
    if convention == "recursion":
        return IndexSet(N, tuple(2**j + 1 for j in range(n)))
    if convention == "powers":
        return IndexSet(N, tuple(2**j for j in range(n + 1)))
    raise ValueError(f"unknown convention {convention!r}")


class KhintchineReport(NamedTuple):
    ratio: float
    achieved_sup: float
    norm_a: float
    level_sup: float
    finer_sup: float
    projected_sup: float
    locality_holds: bool


def khintchine_compensation_check(
    n: int,
    a: CoefficientVector,
    method: str = "lp",
    convention: str = "recursion",
    tol: float = 1e-7,
) -> KhintchineReport:
    """Compensate Rademacher information with every other Walsh function.

    Also solves the same problem one level finer, projects the finer
    solution back onto level ``n`` and checks that the projection keeps the
    information coefficients, does not raise the peak, and matches the
    level-``n`` optimum within ``tol``.
    """
    N = 2**n
    K = rademacher_positions(n, convention)
    if a.ambient_size != N:
        raise ValueError(f"expected {N} coefficients")
    if np.any(a.values[~K.mask()] != 0):
        raise ValueError("a must be supported on the Rademacher positions")
    problem = ExtensionProblem("walsh", N, K, K.complement(), a)
    result = solve_min_sup(problem, method)
    norm_a = a.norm2()

    N2 = 2 * N
    values2 = np.zeros(N2)
    values2[:N] = a.values
    K2 = IndexSet(N2, K.members)
    fine = ExtensionProblem("walsh", N2, K2, K2.complement(), CoefficientVector(N2, values2))
    fine_result = solve_min_sup(fine, method)
    from .systems import DyadicStepSignal, walsh_coefficients

    fine_signal = DyadicStepSignal(n + 1, assemble(fine, fine_result.b))
    projected = dyadic_projection(fine_signal, n)
    proj_coef = walsh_coefficients(projected)
    keeps_info = np.allclose(proj_coef[K.mask()], a.values[K.mask()], atol=1e-9)
    projected_sup = float(np.max(np.abs(projected.values)))
    no_increase = projected_sup <= fine_result.achieved_sup
    matches = abs(result.achieved_sup - fine_result.achieved_sup) <= tol * max(1.0, norm_a)
    dominated = result.achieved_sup <= projected_sup + tol
    return KhintchineReport(
        ratio=result.achieved_sup / norm_a,
        achieved_sup=result.achieved_sup,
        norm_a=norm_a,
        level_sup=result.achieved_sup,
        finer_sup=fine_result.achieved_sup,
        projected_sup=projected_sup,
        locality_holds=bool(keeps_info and no_increase and matches and dominated),
    )


# ---------------------------------------------------------------------------
# density trend
# ---------------------------------------------------------------------------


def _cyclic_affine_generators(N: int) -> list[np.ndarray]:
    """Position permutations from ``k -> k + 1`` and ``k -> u k`` (mod N) on indices 1..N."""
    pos = np.arange(N)
    residue = (pos + 1) % N
    gens = [(pos + 1) % N]
    for u in range(2, N):
        if math.gcd(u, N) == 1:
            gens.append((u * residue - 1) % N)
    return gens


class DensityPoint(NamedTuple):
    N: int
    value: float
    best_set: IndexSet


def density_trend_point(system_tag: str, N: int, delta: float = 0.5) -> DensityPoint:
    """Smallest worst-case norm ratio over index sets of density ``delta``.

    For every set ``K`` with ``|K| = delta N`` the worst ratio is taken over
    all ``{-1, 0, 1}`` patterns on ``K``; the returned value is the minimum
    of that over ``K``, i.e. the best extension constant any set of this
    density can have at this sign resolution.  Sets are reduced to one per
    symmetry orbit.
    """
    check_system(system_tag)
    size = int(round(delta * N))
    if size < 1 or size > N:
        raise ValueError("density gives an empty or oversized set")
    if system_tag == "walsh":
        labels = subset_orbits(N)
    else:
        labels = subset_orbit_labels(N, _cyclic_affine_generators(N))
    best = (math.inf, None)
    for rep in orbit_representatives(labels, size):
        K = mask_to_index_set(rep, N)
        value = norm_equiv_ratio(system_tag, N, K, "exhaustive_signs", allow_zero=True)
        if value < best[0] - 1e-12:
            best = (value, K)
    return DensityPoint(N, best[0], best[1])
