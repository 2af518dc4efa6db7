"""Peak-to-average power ratio and the universal square-root-N witness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .systems import (
    CoefficientVector,
    bit_reverse_permutation,
    fwht,
    level_of,
    trig_supnorm,
)

SYSTEMS = ("walsh", "fourier")


def check_system(system_tag: str) -> str:
    if system_tag not in SYSTEMS:
        raise ValueError(f"unknown system {system_tag!r}; expected one of {SYSTEMS}")
    return system_tag


@dataclass(frozen=True)
class PaprReport:
    """Result of :func:`compute_papr`.

    Attributes
    ----------
    system_tag : str
        ``"walsh"`` or ``"fourier"``.
    N : int
        Number of basis functions.
    papr : float
        Peak modulus of the signal divided by the coefficient 2-norm.
    attaining_point : float or int
        Cell index (Walsh) or grid point ``t`` in ``[0, 1)`` (Fourier).
    papr_squared : Fraction or None
        Exact square of the ratio, available on the Walsh side.
    grid_size : int or None
        Number of sample points used on the Fourier side.
    """

    system_tag: str
    N: int
    papr: float
    attaining_point: float | int
    papr_squared: Fraction | None = None
    grid_size: int | None = None


def exact_walsh_cells(values) -> tuple[np.ndarray, int]:
    """Walsh synthesis in integer arithmetic.

    Returns ``(cells, denom)`` where ``cells`` is an object array of Python
    ints and the signal equals ``cells / denom`` exactly.  Float inputs are
    read at their exact binary value.
    """
    fr = [Fraction(v) for v in np.asarray(values).tolist()]
    denom = math.lcm(*(x.denominator for x in fr)) if fr else 1
    ints = np.array([x.numerator * (denom // x.denominator) for x in fr], dtype=object)
    n = level_of(len(ints))
    return fwht(ints)[bit_reverse_permutation(n)], denom


def compute_papr(system_tag: str, N: int, a: CoefficientVector, oversample: int = 16) -> PaprReport:
    """PAPR of the coefficient vector ``a`` over the chosen system.

    Walsh: exact maximum over dyadic cells at level ``log2 N``.
    Fourier: maximum over a grid of ``oversample * N`` points, which
    underestimates the true supremum.

    Raises
    ------
    ValueError
        If ``a`` is zero or its length differs from ``N``.
    """
    check_system(system_tag)
    if a.ambient_size != N:
        raise ValueError(f"coefficient vector has size {a.ambient_size}, expected {N}")
    if not np.any(a.values != 0):
        raise ValueError("PAPR is undefined for the zero vector")
    if system_tag == "walsh":
        if a.is_complex:
            raise ValueError("Walsh coefficients must be real")
        cells, denom = exact_walsh_cells(a.values)
        mags = [abs(c) for c in cells.tolist()]
        i = int(np.argmax(np.array(mags, dtype=object)))
        peak = Fraction(mags[i], denom)
        papr_sq = peak**2 / a.norm2_squared_exact()
        return PaprReport("walsh", N, math.sqrt(papr_sq), i, papr_squared=papr_sq)
    est = trig_supnorm(a, oversample=oversample)
    return PaprReport("fourier", N, est.value / a.norm2(), est.t_max, grid_size=est.grid_size)


def adversarial_witness(system_tag: str, N: int) -> CoefficientVector:
    """Unit vector whose signal peaks at ``sqrt(N)``.

    Every basis function is aligned in phase at one point: the first dyadic
    cell for Walsh (all ``w_k`` equal ``+1`` there) and ``t = 0`` for Fourier.
    Both systems have unit modulus everywhere, so the result is the constant
    vector ``1 / sqrt(N)``.
    """
    check_system(system_tag)
    if N < 1:
        raise ValueError("N must be positive")
    if system_tag == "walsh":
        level_of(N)
        phi_at_t0 = np.ones(N)
    else:
        phi_at_t0 = np.ones(N, dtype=complex)
    values = np.conj(phi_at_t0) / math.sqrt(np.sum(np.abs(phi_at_t0) ** 2))
    return CoefficientVector(N, values)
