import numpy as np
import pytest
from scipy.integrate import quad

from cqa_fermi import fock, meanfield as mf, steadystate as ss, thermo
from cqa_fermi.core import PBC, ModelParams, nearest_neighbor_pairing
from cqa_fermi.errors import NoBistableWindowError


class TestResidual:
    def test_vacuum_self_consistent_without_pairing(self):
        assert mf.self_consistency_residual(0.0, 0.3, 0.0, 1.0, 0.01) == 0.0

    def test_free_limit_closed_form(self):
        mu, delta, kappa = 0.2, 0.1, 0.05
        a = mu**2 + kappa**2 / 4
        root = 0.5 * (1 - np.sqrt(a) / np.sqrt(a + 4 * delta**2))
        assert mf.self_consistency_residual(root, mu, delta, 0.0, kappa) == (
            pytest.approx(0.0, abs=1e-15))

    def test_half_filling_never_self_consistent(self):
        assert mf.self_consistency_residual(0.5, 0.2, 0.1, 1.0, 0.01) > 0


class TestSolveRoots:
    def test_three_roots_near_transition(self):
        r = mf.solve_roots(0.2, 0.0212, 1.0, 0.01)
        assert r.count == 3
        assert r.stable == (True, False, True)
        assert all(0 <= x <= 0.5 for x in r.roots)
        assert list(r.roots) == sorted(r.roots)

    def test_single_root_at_negative_mu(self):
        assert mf.solve_roots(-0.3, 0.1, 1.0, 0.01).count == 1

    def test_free_limit_single_root(self):
        for mu, delta, kappa in ((0.2, 0.1, 0.01), (-0.4, 0.3, 0.2)):
            r = mf.solve_roots(mu, delta, 0.0, kappa)
            assert r.count == 1
            assert r.stable == (True,)

    def test_roots_satisfy_unsquared_equation(self):
        for mu in (0.1, 0.2, 0.3, 0.45):
            r = mf.solve_roots(mu, 0.05, 1.0, 0.01)
            for x in r.roots:
                assert abs(mf.self_consistency_residual(
                    x, mu, 0.05, 1.0, 0.01)) < 1e-12

    def test_spurious_quartic_roots_rejected(self):
        # the radical-cleared quartic admits sign-branch solutions that
        # violate the original equation by a finite amount
        mu, delta, e_c, kappa = 0.2, 0.05, 1.0, 0.01
        b = mu**2 + kappa**2 / 4
        coeffs = [e_c**2, -(2 * e_c * mu + e_c**2),
                  b + 2 * e_c * mu + 4 * delta**2,
                  -(b + 4 * delta**2), delta**2]
        quartic = [z.real for z in np.roots(coeffs)
                   if abs(z.imag) < 1e-9 and -1e-9 <= z.real <= 0.5 + 1e-9]
        kept = mf.solve_roots(mu, delta, e_c, kappa).roots
        rejected = [x for x in quartic
                    if all(abs(x - r) > 1e-6 for r in kept)]
        for x in rejected:
            assert abs(mf.self_consistency_residual(
                x, mu, delta, e_c, kappa)) > 1e-6


class TestBistableRegion:
    def test_region_confined_to_critical_mu_range(self):
        mus = np.linspace(-0.1, 0.7, 33)
        deltas = np.linspace(0.005, 0.3, 24)
        grid = mf.bistable_region(mus, deltas, 1.0, 0.01)
        outside = (mus < 0) | (mus > 0.5)
        assert not grid[outside].any()
        assert grid.any()

    def test_window_contains_transition_at_mu_02(self):
        deltas = np.linspace(0.005, 0.1, 40)
        grid = mf.bistable_region(np.array([0.2]), deltas, 1.0, 0.01)
        window = deltas[grid[0]]
        assert window.size > 0
        assert window.min() < 0.0212 < window.max()

    def test_strong_dissipation_destroys_bistability(self):
        mus = np.linspace(0.0, 0.5, 21)
        deltas = np.linspace(0.01, 0.3, 16)
        assert not mf.bistable_region(mus, deltas, 1.0, 1.0).any()

    def test_grid_bounds_enforced(self):
        with pytest.raises(ValueError):
            mf.bistable_region(np.array([0.9]), np.array([0.1]), 1.0, 0.01)


class TestMaxwell:
    def test_inside_fold_window(self):
        mu_star = mf.maxwell_transition(0.1, 1.0, 0.01)
        lo, hi = mf._fold_window(0.1, 1.0, 0.01)
        assert lo < mu_star < hi

    @pytest.mark.parametrize("delta", [0.02, 0.05, 0.1])
    def test_does_not_predict_exact_transition(self, delta):
        mu_star = mf.maxwell_transition(delta, 1.0, 0.01)
        mu_exact = _exact_transition_mu(delta, kappa=0.01)
        assert abs(mu_star - mu_exact) > 1e-3

    def test_window_closes_at_strong_dissipation(self):
        with pytest.raises(NoBistableWindowError):
            mf.maxwell_transition(0.05, 1.0, 1.0)


def _exact_transition_mu(delta, kappa, lo=0.05, hi=0.49):
    """Invert the critical line: mu where delta_crit(mu) = delta."""
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if thermo.critical_delta(mid, kappa=kappa, mode="full") < delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestModeOccupation:
    def test_undriven_mode_empty(self):
        assert mf.nk_steady(0.0, 0.1, 0.2, 0.3, 1.0, 0.01) == 0.0

    def test_saturates_at_half(self):
        assert mf.nk_steady(np.pi / 2, 0.0, 0.2, 1e8, 0.0, 0.01) == (
            pytest.approx(0.5, abs=1e-12))

    def test_integral_reproduces_self_consistency_rhs(self):
        nbar, mu, delta, kappa = 0.13, 0.2, 0.05, 0.01
        val, _ = quad(lambda k: mf.nk_steady(k, nbar, mu, delta, 1.0, kappa),
                      -np.pi, np.pi)
        val /= 2 * np.pi
        a = (nbar - mu) ** 2 + kappa**2 / 4
        rhs = 0.5 * (1 - np.sqrt(a) / np.sqrt(a + 4 * delta**2))
        assert val == pytest.approx(rhs, abs=1e-12)


class TestFreeFiniteDensity:
    def test_no_pairing_empty(self):
        assert mf.free_finite_L_density(8, 0.2, 0.0, 0.1) == 0.0

    def test_matches_exact_diagonalization(self):
        L, mu, delta, kappa = 6, 0.2, 0.3, 0.01
        ops = fock.build_operators(L)
        H = fock.build_hamiltonian(nearest_neighbor_pairing(L, delta, PBC),
                                   mu, 0.0, ops)
        rho = fock.steady_state(fock.build_liouvillian(H, ops, kappa))
        n_tot = fock.total_number(L).matrix
        ed = float(np.sum((n_tot @ rho).diagonal()).real) / L
        assert mf.free_finite_L_density(L, mu, delta, kappa) == (
            pytest.approx(ed, abs=1e-10))

    def test_converges_to_thermodynamic_closed_form(self):
        dens = mf.free_finite_L_density(10_000, 0.2, 0.05, 0.01)
        closed = mf.solve_roots(0.2, 0.05, 0.0, 0.01).roots[0]
        assert dens == pytest.approx(closed, abs=1e-6)


def test_stable_branches_track_exact_density():
    """Away from the transition the outer mean-field branches stay within
    0.02 of the exact finite-chain density."""
    for mu in (0.05, 0.45):
        for delta in (0.05, 0.15):
            p = ModelParams(L=2000, bc=PBC, mu=mu, delta=delta, e_c=1.0,
                            kappa=0.01)
            exact = ss.mean_density(ss.build_coefficients(p))
            r = mf.solve_roots(mu, delta, 1.0, 0.01)
            stable = [x for x, s in zip(r.roots, r.stable) if s]
            assert min(abs(exact - x) for x in stable) < 0.02


def test_fold_edges_match_discriminant_zeros():
    """Root-count changes happen where the quartic's discriminant vanishes."""
    sympy = pytest.importorskip("sympy")
    delta, e_c, kappa = 0.05, 1.0, 0.01
    lo, hi = mf._fold_window(delta, e_c, kappa)
    x, m = sympy.symbols("x m", real=True)
    d_r, k_r = sympy.Rational(1, 20), sympy.Rational(1, 100)  # exact 0.05, 0.01
    poly = sympy.Poly(
        x * (x - 1) * ((x - m) ** 2 + k_r**2 / 4) + d_r**2 * (1 - 2 * x) ** 2,
        x,
    )
    disc = sympy.lambdify(m, poly.discriminant(), "numpy")
    for edge in (lo, hi):
        # bracket the sign change of the discriminant around the fold edge
        a, c = edge - 1e-4, edge + 1e-4
        fa, fc = disc(a), disc(c)
        assert fa * fc < 0
        for _ in range(60):
            mid = 0.5 * (a + c)
            if disc(mid) * fa <= 0:
                c = mid
            else:
                a, fa = mid, disc(mid)
        assert abs(0.5 * (a + c) - edge) < 1e-8
