"""Experiment registry behind the command line.

Every experiment takes a validated parameter dict and a seed and returns a
list of :class:`ResultRow`.  Rows are produced in a deterministic order and
contain no timing information unless the caller adds it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import extension_solver as es
from . import fourier_tools as ft
from . import walsh_tools as wt
from .papr_core import adversarial_witness, compute_papr
from .systems import CoefficientVector, DyadicStepSignal, IndexSet, walsh_coefficients


class ParameterError(ValueError):
    """Invalid experiment id or parameter value."""


@dataclass
class ResultRow:
    experiment: str
    params: dict
    measured: dict
    bound: dict
    passed: bool
    converged: bool = True
    runtime_ms: float | None = None

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "measured": self.measured,
            "bound": self.bound,
            "pass": self.passed,
            "converged": self.converged,
            "runtime_ms": self.runtime_ms,
        }


@dataclass(frozen=True)
class Experiment:
    name: str
    run: Callable[[dict, int], list[ResultRow]]
    defaults: dict
    description: str
    validators: dict = field(default_factory=dict)


def _exact(x: Fraction) -> str:
    return str(Fraction(x))


# ---------------------------------------------------------------------------
# validators
# ---------------------------------------------------------------------------


def _int_list(lo: int, hi: int | None = None, power_of_two: bool = False):
    def check(value):
        items = value if isinstance(value, list) else [value]
        out = []
        for v in items:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
                raise ParameterError(f"expected integers, got {v!r}")
            v = int(v)
            if v < lo or (hi is not None and v > hi):
                raise ParameterError(f"value {v} outside [{lo}, {hi}]")
            if power_of_two and v & (v - 1):
                raise ParameterError(f"{v} is not a power of two")
            out.append(v)
        return out

    return check


def _float_list(lo: float, hi: float, open_lo: bool = True):
    def check(value):
        items = value if isinstance(value, list) else [value]
        out = []
        for v in items:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParameterError(f"expected numbers, got {v!r}")
            v = float(v)
            if not math.isfinite(v) or v > hi or v < lo or (open_lo and v == lo):
                raise ParameterError(f"value {v} outside the allowed range")
            out.append(v)
        return out

    return check


def _positive_int(hi: int | None = None):
    def check(value):
        return _int_list(1, hi)(value)[0] if not isinstance(value, list) else _bad(value)

    return check


def _bad(value):
    raise ParameterError(f"expected a single value, got {value!r}")


def _choice(options):
    def check(value):
        items = value if isinstance(value, list) else [value]
        for v in items:
            if v not in options:
                raise ParameterError(f"{v!r} not in {options}")
        return list(items)

    return check


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def run_papr_witness(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    for N in params["N"]:
        walsh = compute_papr("walsh", N, adversarial_witness("walsh", N))
        fourier = compute_papr("fourier", N, adversarial_witness("fourier", N))
        w_ok = walsh.papr_squared == N
        f_ok = abs(fourier.papr - math.sqrt(N)) <= 1e-9
        rows.append(
            ResultRow(
                "papr-witness",
                {"N": N},
                {
                    "papr": walsh.papr,
                    "papr_squared_walsh": _exact(walsh.papr_squared),
                    "papr_fourier": fourier.papr,
                    "walsh_cell": walsh.attaining_point,
                    "fourier_t": fourier.attaining_point,
                },
                {"bound": math.sqrt(N), "fourier_tol": 1e-9},
                bool(w_ok and f_ok),
            )
        )
    return rows


def _random_subset(rng, N: int, size: int | None = None) -> IndexSet:
    if size is None:
        mask = rng.random(N) < 0.5
        return IndexSet.from_mask(mask)
    return IndexSet(N, tuple(int(x) + 1 for x in rng.choice(N, size=size, replace=False)))


def run_walsh_identities(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    rng = np.random.default_rng(seed)
    trials = params["trials"]
    for N in params["N"]:
        corr = np.zeros(N, dtype=np.int64)
        msize = np.zeros(N, dtype=np.int64)
        mismatch = np.zeros(N, dtype=np.int64)
        sum_fail = 0
        for _ in range(trials):
            I = _random_subset(rng, N)
            profile = wt.correlation_profile(I, N)
            sizes = np.array([len(wt.m_set(r, I, N)) for r in range(1, N + 1)])
            corr += profile.values
            msize += sizes
            mismatch += profile.values != sizes
            sum_fail += int(profile.values.sum()) != len(I) ** 2
        for r in range(1, N + 1):
            rows.append(
                ResultRow(
                    "walsh-identities",
                    {"N": N, "trials": trials},
                    {
                        "r": r,
                        "correlation_total": int(corr[r - 1]),
                        "m_set_total": int(msize[r - 1]),
                        "mismatches": int(mismatch[r - 1]),
                        "sum_identity_failures": sum_fail,
                    },
                    {"mismatches": 0, "sum_identity_failures": 0},
                    bool(mismatch[r - 1] == 0 and sum_fail == 0),
                )
            )
    return rows


def run_main_lemma(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    rng = np.random.default_rng(seed)
    for delta in params["delta"]:
        for N in params["N"]:
            size = max(2, math.ceil(Fraction(repr(delta)) * N))
            if size > N:
                continue
            required = wt.guaranteed_stages(delta, N)
            for trial in range(params["trials"]):
                I = IndexSet.full(N) if size == N else _random_subset(rng, N, size)
                w = wt.main_lemma_witness(I, N)
                stages_ok = w.m >= required
                rows.append(
                    ResultRow(
                        "main-lemma",
                        {"N": N, "delta": delta, "trial": trial, "size": len(I)},
                        {
                            "m": w.m,
                            "l1_one_plus_f": float(w.l1_of_one_plus_f),
                            "l2sq_one_plus_f": float(w.l2sq_of_one_plus_f),
                            "l1_f": float(w.l1_of_f),
                            "l2sq_f": float(w.l2sq_of_f),
                            "product_identity_holds": w.product_identity_holds,
                            "stages_ok": stages_ok,
                            "bounds_ok": w.bounds_hold(),
                        },
                        {
                            "required_m": required,
                            "l1_bound": w.l1_bound,
                            "l2sq_bound": w.l2sq_bound,
                        },
                        bool(stages_ok and w.bounds_hold()),
                    )
                )
    return rows


def run_cex_table(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    for delta in params["delta"]:
        prev = None
        for n in params["n"]:
            N = 2**n
            try:
                res = wt.cex_lower_bound_walsh(delta, N)
            except ValueError:
                continue
            m = res.m
            formula_ok = res.bound == Fraction(2**m - m * m, 1 + m)
            increasing = prev is None or res.bound > prev
            rows.append(
                ResultRow(
                    "cex-table",
                    {"delta": delta, "n": n},
                    {
                        "m": m,
                        "bound": float(res.bound),
                        "bound_exact": _exact(res.bound),
                        "informative": res.informative,
                        "strictly_increasing": increasing,
                    },
                    {"formula": _exact(Fraction(2**m - m * m, 1 + m))},
                    bool(formula_ok and increasing),
                )
            )
            prev = res.bound
    return rows


def _ap_cases(N: int, m: int, rng) -> list[ft.ApDescriptor]:
    cases = [ft.ApDescriptor(1, 1, m)]
    max_d = (N - 1) // (m - 1)
    if max_d > 1:
        d = int(rng.integers(2, max_d + 1))
        a = int(rng.integers(1, N - (m - 1) * d + 1))
        cases.append(ft.ApDescriptor(a, d, m))
    return cases


def run_ap_witness(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    rng = np.random.default_rng(seed)
    slack = params["slack"]
    for N in params["N"]:
        for m in params["m"]:
            if m > N:
                continue
            for ap in _ap_cases(N, m, rng):
                w = ft.ap_witness_search(N, ap)
                norm = w.D.norm2()
                bound = slack * w.bound
                ok = w.l1_of_FD <= bound and abs(norm - 1) <= 1e-12
                rows.append(
                    ResultRow(
                        "ap-witness",
                        {"N": N, "m": m, "a": ap.a, "d": ap.d},
                        {"l1_of_FD": w.l1_of_FD, "norm_D": norm, "t_star": w.t_star,
                         "ratio_to_bound": w.l1_of_FD / bound},
                        {"l1_bound": bound, "slack": slack},
                        bool(ok),
                    )
                )
    return rows


def run_kernel_bound(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    for n in params["fejer_n"]:
        value = ft.kernel_l1(ft.KernelSpec.fejer(n))
        rows.append(
            ResultRow(
                "kernel-bound",
                {"kind": "fejer", "n": n, "lam": None, "r_L": None},
                {"l1": value},
                {"target": 1.0, "tol": 1e-6},
                abs(value - 1) <= 1e-6,
            )
        )
    for lam in params["lam"]:
        for r_L in params["r_L"]:
            N = math.ceil(lam * r_L)
            value = ft.kernel_l1(ft.KernelSpec.difference(r_L, N))
            bound = ft.difference_kernel_bound(lam)
            rows.append(
                ResultRow(
                    "kernel-bound",
                    {"kind": "difference", "n": N, "lam": lam, "r_L": r_L},
                    {"l1": value},
                    {"target": bound, "tol": 1e-3},
                    value <= bound + 1e-3,
                )
            )
    return rows


def run_projection(params: dict, seed: int) -> list[ResultRow]:
    """Random integer-valued signals keep every average exactly representable."""
    rows = []
    rng = np.random.default_rng(seed)
    for n in params["n"]:
        sup_ok = idem_ok = q_support_ok = q_sup_ok = True
        worst = -math.inf
        for _ in range(params["samples"]):
            f = DyadicStepSignal(n, rng.integers(-1000, 1001, size=2**n).astype(float))
            fsup = float(np.max(np.abs(f.values)))
            for target in range(n + 1):
                p = wt.dyadic_projection(f, target)
                psup = float(np.max(np.abs(p.values)))
                worst = max(worst, psup - fsup)
                sup_ok &= psup <= fsup
                idem_ok &= wt.dyadic_projection(p.refine(n), target) == p
            for m in range(n):
                q = wt.q_shift(f, m)
                coef = walsh_coefficients(q.refine(n))
                q_support_ok &= bool(np.all(coef[2**m :] == 0))
                band = wt.dyadic_projection(f, m + 1) - wt.dyadic_projection(f, m)
                q_sup_ok &= float(np.max(np.abs(q.values))) == float(np.max(np.abs(band.values)))
        const_ok = True
        for c in (1.0, -2.5, 7.0):
            f = DyadicStepSignal.constant(c, n)
            const_ok &= all(
                float(np.max(np.abs(wt.dyadic_projection(f, t).values))) == abs(c) for t in range(n + 1)
            )
        ok = sup_ok and idem_ok and q_support_ok and q_sup_ok and const_ok
        rows.append(
            ResultRow(
                "projection",
                {"n": n, "samples": params["samples"]},
                {
                    "max_sup_increase": worst,
                    "sup_contraction": bool(sup_ok),
                    "constants_preserved": bool(const_ok),
                    "idempotent": bool(idem_ok),
                    "q_support_ok": bool(q_support_ok),
                    "q_sup_equal": bool(q_sup_ok),
                },
                {"max_sup_increase": 0.0},
                bool(ok),
            )
        )
    return rows


def run_solver_crosscheck(params: dict, seed: int) -> list[ResultRow]:
    N = params["N"]
    rows = []
    rng = np.random.default_rng(seed)
    trials = params["trials"]
    for size in range(1, params["max_k"] + 1):
        for K_members in itertools.combinations(range(1, N + 1), size):
            K = IndexSet(N, K_members)
            comp = K.complement()
            cols = np.asarray(K_members) - 1
            a_batch = np.zeros((trials, N))
            a_batch[:, cols] = rng.standard_normal((trials, size))
            pocs = es.pocs_min_sup("walsh", N, K, comp, a_batch)
            lp_brute = 0.0
            pocs_lo = math.inf
            pocs_hi = -math.inf
            mono_ok = True
            converged = True
            for i in range(trials):
                a = CoefficientVector(N, a_batch[i])
                problem = es.ExtensionProblem("walsh", N, K, comp, a)
                try:
                    lp = es.solve_min_sup(problem, "lp")
                except es.NonConvergenceError:
                    converged = False
                    continue
                brute = es.solve_min_sup(problem, "brute")
                lp_brute = max(lp_brute, abs(lp.achieved_sup - brute.achieved_sup))
                diff = pocs[i].achieved_sup - lp.achieved_sup
                pocs_lo = min(pocs_lo, diff)
                pocs_hi = max(pocs_hi, diff)
                order = rng.permutation(comp.members)
                prev = compute_papr("walsh", N, a).papr * a.norm2()
                for j in range(1, len(order) + 1):
                    sub = IndexSet(N, tuple(int(x) for x in order[:j]))
                    value = es.solve_min_sup(es.ExtensionProblem("walsh", N, K, sub, a), "lp").achieved_sup
                    mono_ok &= value <= prev + 1e-9
                    prev = value
            ok = lp_brute <= 1e-6 and pocs_lo >= -1e-6 and pocs_hi <= 1e-3 and mono_ok
            rows.append(
                ResultRow(
                    "solver-crosscheck",
                    {"N": N, "K": list(K_members), "trials": trials},
                    {
                        "max_lp_brute": lp_brute,
                        "min_pocs_minus_lp": pocs_lo,
                        "max_pocs_minus_lp": pocs_hi,
                        "monotone": bool(mono_ok),
                    },
                    {"lp_brute": 1e-6, "pocs_below": 1e-6, "pocs_above": 1e-3},
                    bool(ok and converged),
                    converged,
                )
            )
    return rows


def run_equivalence(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    rng = np.random.default_rng(seed)
    for system in params["system"]:
        for N in params["N"]:
            for k in range(params["sets"]):
                K = _random_subset(rng, N, int(rng.integers(1, N + 1)))
                rep = es.equivalence_crosscheck(
                    system, N, K, budget=params["trials"], rng_seed=int(rng.integers(2**32))
                )
                rows.append(
                    ResultRow(
                        "equivalence",
                        {"system": system, "N": N, "set": k, "K": K.to_list()},
                        {"ratio": rep.lower, "empirical_cex": rep.upper},
                        {"rel_tol": 1e-3, "abs_tol": 1e-6},
                        rep.holds,
                    )
                )
    return rows


def run_doubling(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    for C in params["C"]:
        sizes = {N: wt.optimal_subset_size(N, C) for N in params["N"]}
        for small, big in zip(params["N"], params["N"][1:]):
            ok = 2 * sizes[small].size >= sizes[big].size
            rows.append(
                ResultRow(
                    "doubling",
                    {"C": C, "N_small": small, "N_big": big},
                    {
                        "E_small": sizes[small].size,
                        "E_big": sizes[big].size,
                        "set_small": sizes[small].subset.to_list(),
                        "set_big": sizes[big].subset.to_list(),
                        "cex_small": sizes[small].cex,
                        "cex_big": sizes[big].cex,
                    },
                    {"two_E_small": 2 * sizes[small].size},
                    bool(ok),
                )
            )
    return rows


def run_khintchine(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    rng = np.random.default_rng(seed)
    for convention in params["convention"]:
        for n in params["n"]:
            N = 2**n
            K = es.rademacher_positions(n, convention)
            cols = np.asarray(K.members) - 1
            ratios = []
            locality = True
            for _ in range(params["trials"]):
                values = np.zeros(N)
                values[cols] = rng.standard_normal(len(cols))
                rep = es.khintchine_compensation_check(n, CoefficientVector(N, values), convention=convention)
                ratios.append(rep.ratio)
                locality &= rep.locality_holds
            rmax = max(ratios)
            rows.append(
                ResultRow(
                    "khintchine",
                    {"n": n, "convention": convention, "trials": params["trials"]},
                    {"max_ratio": rmax, "mean_ratio": float(np.mean(ratios)), "locality": bool(locality)},
                    {"sqrt2": math.sqrt(2)},
                    bool(locality and math.isfinite(rmax)),
                )
            )
    return rows


def run_density_trend(params: dict, seed: int) -> list[ResultRow]:
    rows = []
    for system in params["system"]:
        prev = None
        for N in params["N"]:
            point = es.density_trend_point(system, N, params["delta"][0])
            ok = prev is None or point.value >= prev - 1e-12
            rows.append(
                ResultRow(
                    "density-trend",
                    {"system": system, "N": N, "delta": params["delta"][0]},
                    {"worst_case_ratio": point.value, "best_set": point.best_set.to_list()},
                    {"previous": prev},
                    bool(ok),
                )
            )
            prev = point.value
    return rows


_POW2 = _int_list(1, 2**12, power_of_two=True)

REGISTRY: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment(
            "papr-witness",
            run_papr_witness,
            {"N": [2**n for n in range(1, 11)]},
            "square-root-N witness for both systems",
            {"N": _int_list(1, 2**16, power_of_two=True)},
        ),
        Experiment(
            "walsh-identities",
            run_walsh_identities,
            {"N": [2**n for n in range(1, 9)], "trials": 200},
            "correlation equals pairing count; correlations sum to |I|^2",
            {"N": _int_list(2, 2**10, power_of_two=True), "trials": _positive_int()},
        ),
        Experiment(
            "main-lemma",
            run_main_lemma,
            {"N": [2**n for n in range(2, 13)], "delta": [1.0, 0.5, 0.25], "trials": 5},
            "splitting witness: stage count and norm bounds",
            {"N": _POW2, "delta": _float_list(0.0, 1.0), "trials": _positive_int()},
        ),
        Experiment(
            "cex-table",
            run_cex_table,
            {"delta": [0.5], "n": list(range(6, 13))},
            "lower bound (2^m - m^2)/(1+m) as N grows",
            {"delta": _float_list(0.0, 1.0), "n": _int_list(1, 40)},
        ),
        Experiment(
            "ap-witness",
            run_ap_witness,
            {"N": [16, 64, 256, 1024, 4096], "m": [4, 8, 16], "slack": 1.1},
            "progression witness transform 1-norm",
            {"N": _int_list(2, 2**16), "m": _int_list(2, 2**16),
             "slack": lambda v: _float_list(0.0, 100.0)(v)[0]},
        ),
        Experiment(
            "kernel-bound",
            run_kernel_bound,
            {"lam": [1.5, 2.0, 4.0], "r_L": [16, 64, 256], "fejer_n": [32]},
            "difference-kernel and Fejer kernel L1 norms",
            {"lam": _float_list(1.0, 100.0), "r_L": _int_list(1, 4096), "fejer_n": _int_list(1, 4096)},
        ),
        Experiment(
            "projection",
            run_projection,
            {"n": list(range(1, 9)), "samples": 1000},
            "dyadic projection contraction, idempotence and band shift",
            {"n": _int_list(1, 12), "samples": _positive_int()},
        ),
        Experiment(
            "solver-crosscheck",
            run_solver_crosscheck,
            {"N": 8, "max_k": 3, "trials": 20},
            "LP, vertex enumeration and POCS agree",
            {"N": lambda v: _int_list(2, 8, power_of_two=True)(v)[0] if not isinstance(v, list) else _bad(v),
             "max_k": _positive_int(8), "trials": _positive_int()},
        ),
        Experiment(
            "equivalence",
            run_equivalence,
            {"system": ["walsh", "fourier"], "N": [4, 8, 16], "sets": 50, "trials": 10},
            "norm ratio bounded by the empirical extension constant",
            {"system": _choice(["walsh", "fourier"]), "N": _int_list(2, 16, power_of_two=True),
             "sets": _positive_int(), "trials": _positive_int()},
        ),
        Experiment(
            "doubling",
            run_doubling,
            {"C": [1.2, 1.5, 2.0], "N": [4, 8, 16]},
            "optimal subset sizes at most double",
            {"C": _float_list(0.0, 100.0), "N": _int_list(2, 16, power_of_two=True)},
        ),
        Experiment(
            "khintchine",
            run_khintchine,
            {"n": [1, 2, 3, 4], "trials": 100, "convention": ["recursion", "powers"]},
            "Rademacher information with dyadic compensation",
            {"n": _int_list(1, 6), "trials": _positive_int(),
             "convention": _choice(["recursion", "powers"])},
        ),
        Experiment(
            "density-trend",
            run_density_trend,
            {"system": ["walsh", "fourier"], "N": [4, 8, 16], "delta": [0.5]},
            "best worst-case norm ratio at fixed density",
            {"system": _choice(["walsh", "fourier"]), "N": _int_list(2, 16, power_of_two=True),
             "delta": _float_list(0.0, 1.0)},
        ),
    ]
}


def validate(experiment: str, overrides: dict) -> dict:
    """Merge ``overrides`` into the defaults and check every value."""
    if experiment not in REGISTRY:
        raise ParameterError(f"unknown experiment {experiment!r}")
    exp = REGISTRY[experiment]
    unknown = set(overrides) - set(exp.defaults)
    if unknown:
        raise ParameterError(f"unknown parameters for {experiment}: {sorted(unknown)}")
    params = dict(exp.defaults)
    params.update(overrides)
    out = {}
    for key, value in params.items():
        check = exp.validators.get(key)
        out[key] = check(value) if check else value
    return out


def run(experiment: str, overrides: dict, seed: int) -> list[ResultRow]:
    params = validate(experiment, overrides)
    return REGISTRY[experiment].run(params, seed)
