import numpy as np
import pytest

from cqa_fermi import steadystate as ss, thermo
from cqa_fermi.core import PBC, ModelParams
from cqa_fermi.errors import DomainError, NoBistableWindowError


class TestFreeEnergy:
    def test_vanishes_at_low_density_weak_mode(self):
        assert thermo.free_energy(1e-12, 0.2, 0.0, 0.02, "weak") == (
            pytest.approx(0.0, abs=1e-9))

    def test_vanishes_at_low_density_full_mode(self):
        assert thermo.free_energy(1e-12, 0.2, 0.05, 0.02, "full") == (
            pytest.approx(0.0, abs=1e-9))

    def test_domain_guard(self):
        for bad in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(DomainError):
                thermo.free_energy(bad, 0.2, 0.0, 0.02)

    def test_full_reduces_to_weak(self):
        rho = np.linspace(0.005, 0.995, 800)
        full = thermo.free_energy(rho, 0.2, 1e-8, 0.021, "full")
        weak = thermo.free_energy(rho, 0.2, 0.0, 0.021, "weak")
        assert np.abs(full - weak).max() < 1e-6

    def test_degenerate_wells_at_transition(self):
        # near-degenerate at the 5-digit quoted point, degenerate at the
        # self-located crossing
        prof = thermo.profile(0.2, 0.0, 0.02122, "weak")
        assert prof.two_wells
        assert abs(prof.delta_q_min) < 5e-4
        dc = thermo.critical_delta(0.2, mode="weak", tol=1e-9)
        assert abs(thermo.profile(0.2, 0.0, dc, "weak").delta_q_min) < 1e-7

    def test_finite_at_interior_extremes(self):
        for rho in (1e-9, 1.0 - 1e-9):
            val = thermo.free_energy(rho, 0.2, 0.01, 0.02, "full")
            assert np.isfinite(val)

    def test_smooth_at_rho_two_mu_weak_mode(self):
        # the continuous extension (mu - rho/2) ln|mu - rho/2| -> 0 applies
        # analytically at rho = 2 mu
        q = thermo.free_energy(np.array([0.4 - 1e-9, 0.4, 0.4 + 1e-9]),
                               0.2, 0.0, 0.02, "weak")
        assert np.all(np.isfinite(q))
        assert abs(q[2] - q[0]) < 1e-7


class TestProfile:
    def test_low_phase(self):
        prof = thermo.profile(0.2, 0.0, 0.02, "weak")
        assert prof.rho_min < 0.4
        assert prof.rho_min == prof.rho_low

    def test_high_phase(self):
        prof = thermo.profile(0.2, 0.0, 0.0224, "weak")
        assert prof.rho_min > 0.4
        assert prof.rho_min == prof.rho_high

    def test_single_well_outside_critical_range(self):
        for delta in (0.02, 0.1, 0.3):
            prof = thermo.profile(-0.3, 0.0, delta, "weak")
            assert not prof.two_wells

    def test_wells_straddle_twice_mu(self):
        for delta in (0.02, 0.021, 0.0224):
            prof = thermo.profile(0.2, 1e-3, delta, "full")
            if prof.two_wells:
                assert prof.rho_low <= 0.4 <= prof.rho_high

    def test_grid_size_guard(self):
        with pytest.raises(ValueError):
            thermo.profile(0.2, 0.0, 0.02, "weak", grid_size=100)

    def test_zero_pairing_gives_empty_chain(self):
        prof = thermo.profile(0.2, 0.0, 0.0, "weak")
        assert thermo.density_thermo(prof) == 0.0


class TestCriticalDelta:
    def test_weak_dissipation_value(self):
        assert thermo.critical_delta(0.2, mode="weak") == pytest.approx(
            0.02122, abs=2e-4)

    def test_finite_dissipation_value(self):
        assert thermo.critical_delta(0.2, kappa=1e-3, mode="full") == (
            pytest.approx(0.02138, abs=2e-4))

    def test_dissipation_shifts_boundary_up(self):
        weak = thermo.critical_delta(0.2, mode="weak")
        full = thermo.critical_delta(0.2, kappa=1e-3, mode="full")
        assert full > weak

    def test_no_window_beyond_terminal_point(self):
        with pytest.raises(NoBistableWindowError):
            thermo.critical_delta(0.45, kappa=0.2, mode="full")

    def test_domain_guard(self):
        with pytest.raises(DomainError):
            thermo.critical_delta(0.7)


class TestDensityThermo:
    @pytest.mark.parametrize("delta", [0.020, 0.0224])
    def test_matches_exact_large_chain(self, delta):
        prof = thermo.profile(0.2, 1e-8, delta, "full")
        p = ModelParams(L=100_000, bc=PBC, mu=0.2, delta=delta, e_c=1.0,
                        kappa=1e-8)
        exact = ss.mean_density(ss.build_coefficients(p))
        assert thermo.density_thermo(prof) == pytest.approx(exact, abs=1e-3)

    def test_density_jump_across_transition(self):
        dc = thermo.critical_delta(0.2, mode="weak", tol=1e-7)
        lo = thermo.density_thermo(thermo.profile(0.2, 0.0, dc - 1e-4, "weak"))
        hi = thermo.density_thermo(thermo.profile(0.2, 0.0, dc + 1e-4, "weak"))
        assert hi - lo > 0.1


class TestWellDepthMonotonicity:
    # delta_q_min = Q(rho_high) - Q(rho_low) must fall with delta (the high
    # well deepens until it wins) and rise with mu (a larger mu raises the
    # boundary, pushing the system back toward the low phase); this is the
    # monotonicity that makes the bisection for the critical line valid.

    def test_monotone_in_delta(self):
        deltas = np.linspace(0.0205, 0.0220, 6)
        dq = [thermo.profile(0.2, 0.0, d, "weak").delta_q_min for d in deltas]
        assert all(q is not None for q in dq)
        assert np.all(np.diff(dq) < 0)

    def test_monotone_in_mu(self):
        mus = np.linspace(0.18, 0.22, 5)
        dq = [thermo.profile(m, 0.0, 0.021, "weak").delta_q_min for m in mus]
        assert all(q is not None for q in dq)
        assert np.all(np.diff(dq) > 0)

    def test_sign_convention_consistent_with_phases(self):
        # positive difference <=> low well global <=> low-density phase
        dc = thermo.critical_delta(0.2, mode="weak")
        below = thermo.profile(0.2, 0.0, dc - 5e-4, "weak")
        above = thermo.profile(0.2, 0.0, dc + 5e-4, "weak")
        assert below.delta_q_min > 0 and below.rho_min == below.rho_low
        assert above.delta_q_min < 0 and above.rho_min == above.rho_high


class TestAgainstExactDistribution:
    def test_log_probabilities_converge_to_free_energy(self):
        # -(1/L) ln p_n at L = 1e5 equals Q(rho) up to one additive constant
        L = 100_000
        p = ModelParams(L=L, bc=PBC, mu=0.2, delta=0.021, e_c=1.0, kappa=1e-8)
        tbl = ss.build_coefficients(p)
        n = np.arange(tbl.n_max + 1)
        rho = 2.0 * n / L
        sel = (rho >= 0.02) & (rho <= 0.95)
        # ln p_n from the log-domain weights: p itself underflows far from
        # the wells at this system size
        log_p = 2.0 * tbl.alpha_log_mag + tbl.log_counts - tbl.log_norm
        f = -log_p[sel] / L
        q = thermo.free_energy(rho[sel], 0.2, 1e-8, 0.021, "full")
        resid = f - q
        shift = 0.5 * (resid.max() + resid.min())
        assert np.abs(resid - shift).max() < 5e-3


class TestBetaAsymptotic:
    def test_matches_exact_coefficients(self):
        L, mu, kappa, delta = 10_000, 0.2, 1e-4, 0.02
        p = ModelParams(L=L, bc=PBC, mu=mu, delta=delta, e_c=1.0, kappa=kappa)
        tbl = ss.build_coefficients(p)
        for rho in (0.1, 0.3, 0.6):
            n = int(round(rho * L / 2))
            exact = 0.5 * (2.0 * tbl.alpha_log_mag[n] + tbl.log_counts[n]
                           - tbl.log_norm)
            approx = thermo.beta_asymptotic(rho, mu, kappa, delta, L)
            assert approx == pytest.approx(exact, rel=1e-2)

    def test_log_magnitude_finite_near_edges(self):
        for rho in (1e-6, 1.0 - 1e-6):
            assert np.isfinite(
                thermo.beta_asymptotic(rho, 0.2, 1e-4, 0.02, 2000))

    def test_reproduces_free_energy_scaling(self):
        # -(2/L) ln|beta(rho)| -> Q(rho) + const up to O(log L / L)
        L, mu, kappa, delta = 50_000, 0.2, 1e-4, 0.021
        rho = np.array([0.1, 0.25, 0.5, 0.8])
        lb = np.array([thermo.beta_asymptotic(r, mu, kappa, delta, L)
                       for r in rho])
        q = thermo.free_energy(rho, mu, kappa, delta, "full")
        resid = -2.0 * lb / L - q
        assert resid.max() - resid.min() < np.log(L) / L * 20

    def test_domain_guards(self):
        with pytest.raises(DomainError):
            thermo.beta_asymptotic(1.2, 0.2, 1e-4, 0.02, 5000)
        with pytest.raises(DomainError):
            thermo.beta_asymptotic(0.5, 0.2, 1e-4, 0.02, 50)
