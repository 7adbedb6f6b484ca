"""Exact steady-state coefficients and closed-form observables.

The pure absorber-doubled steady state is a power series in the delocalized
nearest-neighbor pair creation operator; its coefficients obey the one-term
recurrence a_n = delta / (mu~ - n e_c / L) * a_{n-1} with a_0 = 1.  All
sums over n are accumulated in log-domain with a single max-shift so that
chains up to ~1e5 sites stay inside floating-point range.

All observables returned here are dark-subspace values.  Physical-chain
expectation values of quadratic correlators carry one extra factor 1/2,
applied by :func:`dark_to_physical`; the mean density is the exception and
is returned as the physical per-site value directly (see its docstring).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import combinatorics, kernels
from .core import OBC, PBC, LogComplex, ModelParams, validate_params, wrap_phase
from .errors import BoundaryUnsupportedError

NEG_INF = float("-inf")


def max_pairs(L: int, bc: str) -> int:
    """Largest pair number appearing in the steady state.

    Open chains fit floor(L/2) pairs.  On even rings the half-filled
    component cancels between its two tilings, so the series stops one pair
    earlier; odd rings fit (L-1)/2.
    """
    if bc == OBC:
        return L // 2
    return L // 2 - 1 if L % 2 == 0 else (L - 1) // 2


@dataclass(frozen=True)
class CoefficientTable:
    """Log-domain coefficients and pair-number distribution of the state.

    ``alpha_log_mag``/``alpha_phase`` hold ln|a_n| and arg(a_n) for
    n = 0..n_max, ``log_counts`` the matching ln N(L, n) dimer counts,
    ``log_norm`` is ln(sum_n |a_n|^2 N(L, n)) and ``p`` the normalized
    probabilities |b_n|^2.
    """

    params: ModelParams
    n_max: int
    alpha_log_mag: np.ndarray
    alpha_phase: np.ndarray
    log_counts: np.ndarray
    log_norm: float
    p: np.ndarray

    def alpha(self, n: int) -> LogComplex:
        """Coefficient a_n as a LogComplex scalar."""
        if not 0 <= n <= self.n_max:
            raise IndexError(f"n={n} outside 0..{self.n_max}")
        lm = float(self.alpha_log_mag[n])
        if lm == NEG_INF:
            return LogComplex.zero()
        return LogComplex(lm, wrap_phase(float(self.alpha_phase[n])))

    def alpha_complex(self) -> np.ndarray:
        """Native-complex coefficients; overflows for large chains.

        Cross-check accessor: the log-domain arrays are the production
        representation.
        """
        with np.errstate(over="ignore"):
            return np.exp(self.alpha_log_mag + 1j * self.alpha_phase)


def build_coefficients(params: ModelParams) -> CoefficientTable:
    """Coefficient table for the validated parameter set."""
    p = validate_params(params)
    n_max = max_pairs(p.L, p.bc)
    if p.delta > 0:
        log_mag, phase = kernels.coefficient_logs(
            math.log(p.delta), p.mu, p.kappa, p.e_c, float(p.L), n_max
        )
    else:
        # vacuum: a_0 = 1, every higher coefficient is exactly zero
        log_mag = np.full(n_max + 1, NEG_INF)
        log_mag[0] = 0.0
        phase = np.zeros(n_max + 1)
    phase = _wrap_array(phase)
    log_counts = combinatorics.log_counts(p.L, p.bc, n_max)
    weights = 2.0 * log_mag + log_counts
    log_norm = float(kernels.logsumexp_real(weights))
    with np.errstate(invalid="ignore"):
        pn = np.exp(weights - log_norm)
    pn[np.isnan(pn)] = 0.0
    for arr in (log_mag, phase, log_counts, pn):
        arr.setflags(write=False)
    return CoefficientTable(
        params=p,
        n_max=n_max,
        alpha_log_mag=log_mag,
        alpha_phase=phase,
        log_counts=log_counts,
        log_norm=log_norm,
        p=pn,
    )


def _wrap_array(phase: np.ndarray) -> np.ndarray:
    w = np.mod(phase, 2.0 * np.pi)
    w[w > np.pi] -= 2.0 * np.pi
    return w


def recurrence_residual(tbl: CoefficientTable) -> float:
    """max_n |a_n (mu~ - n e_c/L) - delta a_{n-1}| / |a_n| over n >= 1."""
    p = tbl.params
    if tbl.n_max < 1 or p.delta == 0:
        return 0.0
    n = np.arange(1, tbl.n_max + 1)
    factor = (p.mu - (p.e_c / p.L) * n) + 0.5j * p.kappa
    # ratio a_n / a_{n-1} computed in log domain, then compared to
    # delta / factor with the common magnitude scaled out
    ratio = np.exp(
        tbl.alpha_log_mag[1:] - tbl.alpha_log_mag[:-1]
        + 1j * (tbl.alpha_phase[1:] - tbl.alpha_phase[:-1])
    )
    return float(np.max(np.abs(ratio * factor - p.delta) / np.abs(ratio * factor)))


def mean_density(tbl: CoefficientTable) -> float:
    """Physical per-site density (1/L) sum_n n p_n, in [0, 1/2).

    The dark-subspace total number is sum_n 2n p_n over 2L modes and the
    physical occupation is half the dark one, so the physical per-site
    density reduces to the same expression.
    """
    n = np.arange(tbl.n_max + 1)
    return float(np.dot(n, tbl.p)) / tbl.params.L


def number_moment(tbl: CoefficientTable, m: int) -> float:
    """m-th moment of the dark-subspace total number operator."""
    if m < 1:
        raise ValueError("moment order must be >= 1")
    n = np.arange(tbl.n_max + 1, dtype=float)
    return float(np.dot((2.0 * n) ** m, tbl.p))


def pair_expectation(tbl: CoefficientTable, m: int) -> complex:
    """Normalized expectation of the m-th power of the pair-raising operator.

    <(B^dag)^m> = sum_{n>=m} n!/(n-m)! conj(a_n) a_{n-m} N(L, n) / norm.
    """
    if m < 1:
        raise ValueError("power must be >= 1")
    if m > tbl.n_max:
        return 0j
    n = np.arange(m, tbl.n_max + 1, dtype=float)
    log_mag = (
        gammaln(n + 1.0)
        - gammaln(n - m + 1.0)
        + tbl.alpha_log_mag[m:]
        + tbl.alpha_log_mag[: tbl.n_max - m + 1]
        + tbl.log_counts[m:]
        - tbl.log_norm
    )
    phase = tbl.alpha_phase[: tbl.n_max - m + 1] - tbl.alpha_phase[m:]
    lm, ph = kernels.logsumexp_complex(
        np.ascontiguousarray(log_mag), np.ascontiguousarray(phase)
    )
    return _to_complex(lm, ph)


def _to_complex(log_mag: float, phase: float) -> complex:
    if log_mag == NEG_INF:
        return 0j
    return complex(math.exp(log_mag) * math.cos(phase),
                   math.exp(log_mag) * math.sin(phase))


def _require_even_pbc(tbl: CoefficientTable) -> None:
    p = tbl.params
    if p.bc != PBC or p.L % 2:
        raise BoundaryUnsupportedError(
            "closed-form correlations require an even-length periodic chain"
        )


def _log_binom(top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    return gammaln(top + 1.0) - gammaln(bottom + 1.0) - gammaln(top - bottom + 1.0)


def anomalous_correlation(tbl: CoefficientTable, m: int) -> complex:
    """Dark-subspace <c_1^dag c_{2m}^dag> on an even ring, 1 <= m <= L/2.

    Two binomial-weighted sums over adjacent-coefficient products; the
    second sum collects the strings that wrap around the ring and enters
    with a minus sign.  Translation invariance extends the result to
    <c_j^dag c_{j+2m-1}^dag> for every j; same-sublattice correlations
    vanish identically and are not exposed.
    """
    _require_even_pbc(tbl)
    L = tbl.params.L
    half = L // 2
    if not 1 <= m <= half:
        raise ValueError(f"m={m} outside 1..{half}")
    s1 = _corr_sum(tbl, n_lo=m, top_fn=lambda n: L - n - m, bot_fn=lambda n: n - m)
    s2 = _corr_sum(
        tbl,
        n_lo=half - (m - 1),
        top_fn=lambda n: half - n + m - 1,
        bot_fn=lambda n: n - half + m - 1,
    )
    return s1 - s2


def _corr_sum(tbl: CoefficientTable, n_lo: int, top_fn, bot_fn) -> complex:
    """sum_{n=n_lo}^{n_max} conj(a_n) a_{n-1} C(top(n), bot(n)) / norm."""
    n_hi = tbl.n_max
    if n_lo > n_hi:  # inconsistent bounds evaluate to zero
        return 0j
    n = np.arange(n_lo, n_hi + 1, dtype=float)
    log_mag = (
        tbl.alpha_log_mag[n_lo:]
        + tbl.alpha_log_mag[n_lo - 1 : n_hi]
        + _log_binom(top_fn(n), bot_fn(n))
        - tbl.log_norm
    )
    phase = tbl.alpha_phase[n_lo - 1 : n_hi] - tbl.alpha_phase[n_lo:]
    lm, ph = kernels.logsumexp_complex(
        np.ascontiguousarray(log_mag), np.ascontiguousarray(phase)
    )
    return _to_complex(lm, ph)


def normal_correlation(tbl: CoefficientTable, m: int) -> float:
    """Dark-subspace <c_1^dag c_{2m+1}> on an even ring, 0 <= m <= L/2.

    Real-valued; m = 0 (and m = L/2, which wraps to the same site) returns
    the dark occupation <n_1>.  Sums with inconsistent bounds are zero.
    """
    _require_even_pbc(tbl)
    L = tbl.params.L
    half = L // 2
    if not 0 <= m <= half:
        raise ValueError(f"m={m} outside 0..{half}")
    delta_term = 1.0 if m % half == 0 else 0.0
    s1 = _normal_sum(tbl, n_lo=m, top_fn=lambda n: L - n - m - 1,
                     bot_fn=lambda n: n - m)
    s2 = _normal_sum(tbl, n_lo=half - m, top_fn=lambda n: half - n + m - 1,
                     bot_fn=lambda n: n - half + m)
    return delta_term - s1 - s2


def _normal_sum(tbl: CoefficientTable, n_lo: int, top_fn, bot_fn) -> float:
    n_hi = tbl.n_max
    n_lo = max(n_lo, 0)
    if n_lo > n_hi:
        return 0.0
    n = np.arange(n_lo, n_hi + 1, dtype=float)
    log_vals = (
        2.0 * tbl.alpha_log_mag[n_lo:]
        + _log_binom(top_fn(n), bot_fn(n))
        - tbl.log_norm
    )
    lv = kernels.logsumexp_real(np.ascontiguousarray(log_vals))
    return 0.0 if lv == NEG_INF else math.exp(lv)


def dark_to_physical(value):
    """Physical-chain value of a dark-subspace quadratic correlator.

    Every quadratic physical correlator equals half its dark-subspace
    counterpart because the state carries no bright excitations; this is
    the single place that factor is applied.
    """
    return 0.5 * value
