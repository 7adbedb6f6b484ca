"""Mean-field self-consistency for the density and its bistable region.

The self-consistent mean density obeys

    nbar = (1 - sqrt(a) / sqrt(a + 4 delta^2)) / 2,
    a = (e_c nbar - mu)^2 + kappa^2 / 4,

which is exact at e_c = 0.  Clearing the radicals gives a quartic whose
roots are filtered against the un-squared equation (the quartic admits
spurious sign branches).  The equal-area construction for the would-be
transition point is performed in the (mu, nbar) plane using the closed-form
inverse mu(nbar); it brackets but does not reproduce the true transition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import NoBistableWindowError

RESIDUAL_TOL = 1e-12


def self_consistency_residual(nbar: float, mu: float, delta: float,
                              e_c: float, kappa: float) -> float:
    """Left minus right side of the self-consistency equation at nbar."""
    a = (e_c * nbar - mu) ** 2 + 0.25 * kappa**2
    return nbar - 0.5 * (1.0 - np.sqrt(a) / np.sqrt(a + 4.0 * delta**2))


def _residual_derivative(nbar, mu, delta, e_c, kappa):
    a = (e_c * nbar - mu) ** 2 + 0.25 * kappa**2
    da = 2.0 * e_c * (e_c * nbar - mu)
    return 1.0 + delta**2 * da / (np.sqrt(a) * (a + 4.0 * delta**2) ** 1.5)


@dataclass(frozen=True)
class MeanFieldRoots:
    """All self-consistent densities in [0, 1/2] for one parameter point.

    ``stable`` labels each root by the sign of d(residual)/d(nbar): the
    outer branches of the S-curve are stable, the middle one is not (a
    heuristic; no full stability analysis is implied).
    """

    mu: float
    delta: float
    e_c: float
    kappa: float
    roots: tuple[float, ...]
    stable: tuple[bool, ...]

    @property
    def count(self) -> int:
        return len(self.roots)


def solve_roots(mu: float, delta: float, e_c: float, kappa: float) -> MeanFieldRoots:
    """Roots of the self-consistency equation, sorted ascending.

    Solves the radical-cleared quartic

        x (x - 1) [(e_c x - mu)^2 + kappa^2/4] + delta^2 (1 - 2x)^2 = 0

    then Newton-polishes each real candidate in [0, 1/2] against the
    un-squared residual and keeps those with |residual| < 1e-12.
    """
    if e_c == 0.0:
        a = mu**2 + 0.25 * kappa**2
        root = 0.5 * (1.0 - np.sqrt(a) / np.sqrt(a + 4.0 * delta**2))
        return MeanFieldRoots(mu, delta, e_c, kappa, (float(root),), (True,))
    b = mu**2 + 0.25 * kappa**2
    coeffs = [
        e_c**2,
        -(2.0 * e_c * mu + e_c**2),
        b + 2.0 * e_c * mu + 4.0 * delta**2,
        -(b + 4.0 * delta**2),
        delta**2,
    ]
    candidates = np.roots(coeffs)
    roots: list[float] = []
    for z in candidates:
        if abs(z.imag) > 1e-7:
            continue
        x = float(z.real)
        if not -1e-6 <= x <= 0.5 + 1e-6:
            continue
        x = _polish(x, mu, delta, e_c, kappa)
        if x is None:
            continue
        if abs(self_consistency_residual(x, mu, delta, e_c, kappa)) > RESIDUAL_TOL:
            continue
        if all(abs(x - r) > 1e-9 for r in roots):
            roots.append(x)
    roots.sort()
    stable = tuple(
        bool(_residual_derivative(r, mu, delta, e_c, kappa) > 0) for r in roots
    )
    return MeanFieldRoots(mu, delta, e_c, kappa, tuple(roots), stable)


def _polish(x, mu, delta, e_c, kappa, iters=40):
    for _ in range(iters):
        f = self_consistency_residual(x, mu, delta, e_c, kappa)
        if abs(f) < 1e-15:
            break
        df = _residual_derivative(x, mu, delta, e_c, kappa)
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) < 1e-16:
            break
    if not np.isfinite(x) or not -1e-12 <= x <= 0.5 + 1e-12:
        return None
    return float(min(max(x, 0.0), 0.5))


def bistable_region(mu_grid, delta_grid, e_c: float, kappa: float) -> np.ndarray:
    """Boolean grid marking three-root cells, shape (len(mu), len(delta))."""
    mu_grid = np.asarray(mu_grid, dtype=float)
    delta_grid = np.asarray(delta_grid, dtype=float)
    if mu_grid.min() < -0.1 or mu_grid.max() > 0.7:
        raise ValueError("mu grid outside [-0.1, 0.7]")
    if delta_grid.min() <= 0.0 or delta_grid.max() > 0.5:
        raise ValueError("delta grid outside (0, 0.5]")
    out = np.zeros((mu_grid.size, delta_grid.size), dtype=bool)
    for i, mu in enumerate(mu_grid):
        for j, delta in enumerate(delta_grid):
            out[i, j] = solve_roots(mu, delta, e_c, kappa).count == 3
    return out


def _mu_of_nbar(nbar, delta, e_c, kappa):
    """Closed-form inverse on the S-curve branch, mu = e_c n + sqrt(g)."""
    g = delta**2 * (1.0 - 2.0 * nbar) ** 2 / (nbar * (1.0 - nbar)) - 0.25 * kappa**2
    return e_c * nbar + np.sqrt(np.maximum(g, 0.0))


def _fold_window(delta, e_c, kappa, mu_lo=-0.05, mu_hi=0.65, samples=600):
    mus = np.linspace(mu_lo, mu_hi, samples)
    counts = np.array(
        [solve_roots(m, delta, e_c, kappa).count for m in mus]
    )
    idx = np.nonzero(counts == 3)[0]
    if idx.size == 0:
        raise NoBistableWindowError(
            f"no three-root window for delta={delta}, kappa={kappa}"
        )
    lo = _bisect_count_edge(mus[idx[0] - 1], mus[idx[0]], delta, e_c, kappa)
    hi = _bisect_count_edge(mus[idx[-1] + 1], mus[idx[-1]], delta, e_c, kappa)
    return lo, hi


def _bisect_count_edge(mu_out, mu_in, delta, e_c, kappa, iters=60):
    for _ in range(iters):
        mid = 0.5 * (mu_out + mu_in)
        if solve_roots(mid, delta, e_c, kappa).count == 3:
            mu_in = mid
        else:
            mu_out = mid
    return mu_in


def maxwell_transition(delta: float, e_c: float, kappa: float,
                       tol: float = 1e-8) -> float:
    """Equal-area transition point mu* of the mean-field S-curve.

    Bisects on the signed area integral(mu(n) - mu*) dn between the outer
    roots at mu*, following the multivalued branch through the fold region.

    Raises
    ------
    NoBistableWindowError
        If no three-root window exists for any mu.
    """
    mu_lo, mu_hi = _fold_window(delta, e_c, kappa)

    def area(mu_star):
        r = solve_roots(mu_star, delta, e_c, kappa)
        if r.count < 3:
            raise NoBistableWindowError(
                f"root count collapsed at mu={mu_star}"
            )
        n1, n3 = r.roots[0], r.roots[2]
        val, _ = quad(
            lambda n: _mu_of_nbar(n, delta, e_c, kappa) - mu_star,
            n1, n3, limit=200,
        )
        return val

    # interior endpoints: exactly at a fold the outer roots merge
    eps = 1e-9 * max(1.0, abs(mu_hi - mu_lo))
    a, b = mu_lo + eps, mu_hi - eps
    fa, fb = area(a), area(b)
    if fa * fb > 0:
        raise NoBistableWindowError("equal-area condition has no sign change")
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = area(mid)
        if fa * fm <= 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def nk_steady(k, nbar: float, mu: float, delta: float, e_c: float,
              kappa: float):
    """Per-mode steady occupation under the mean-field Hamiltonian.

    n_k = 2 delta^2 sin^2 k / [(mu - e_c nbar)^2 + kappa^2/4
                               + 4 delta^2 sin^2 k].
    """
    s2 = np.sin(k) ** 2
    num = 2.0 * delta**2 * s2
    den = (mu - e_c * nbar) ** 2 + 0.25 * kappa**2 + 4.0 * delta**2 * s2
    return num / den


def free_finite_L_density(L: int, mu: float, delta: float,
                          kappa: float) -> float:
    """Exact noninteracting density of an L-site ring (momentum sum).

    The pre-limit form of the self-consistency right-hand side with
    e_c = 0: an average of the per-mode occupations over k = 2 pi j / L.
    Serves as the independent oracle for the closed-form density.
    """
    k = 2.0 * np.pi * np.arange(L) / L
    return float(np.mean(nk_steady(k, 0.0, mu, delta, 0.0, kappa)))
