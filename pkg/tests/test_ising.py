import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest

from rectcft.ising import (brute_force_reference, conformal_label, correlation_matrix,
                           enumerate_low_states, ising_fit_summary, ising_overlap_table,
                           many_body_spectrum, neg_log_overlap, overlap_sq, solve_chain)


class TestSolveChain:
    def test_n1(self):
        sol = solve_chain(1)
        assert sol.energies[0] == pytest.approx(2 * math.sin(math.pi / 6), abs=1e-15)
        assert sol.energies[0] == pytest.approx(1.0, abs=1e-15)

    def test_orthogonality_large(self):
        assert solve_chain(500).orthogonality_residual() < 1e-12

    def test_spectrum_against_brute_force(self):
        for n in (2, 3, 4):
            sol = solve_chain(n)
            free = [e for e, _ in many_body_spectrum(sol)]
            dense, _ = brute_force_reference(n)
            assert np.abs(np.array(free) - dense).max() < 1e-12


class TestCorrelationMatrix:
    def test_ground_state_definition(self):
        sol = solve_chain(3)
        g = correlation_matrix(sol)
        expect = -sol.phi_minus.T @ sol.phi_plus
        assert np.abs(g - expect).max() == 0

    def test_full_excitation_flips_sign(self):
        sol = solve_chain(4)
        g0 = correlation_matrix(sol)
        gall = correlation_matrix(sol, (1, 2, 3, 4))
        assert np.abs(gall + g0).max() == 0

    def test_n2_single_excitation_by_hand(self):
        sol = solve_chain(2)
        g = correlation_matrix(sol, (1,))
        expect = np.empty((2, 2))
        for i in range(2):
            for j in range(2):
                expect[i, j] = (sol.phi_minus[0, i] * sol.phi_plus[0, j]
                                - sol.phi_minus[1, i] * sol.phi_plus[1, j])
        assert np.abs(g - expect).max() < 1e-15


class TestOverlaps:
    def test_against_brute_force(self):
        for n in (2, 3, 4):
            sol = solve_chain(n)
            spectrum = many_body_spectrum(sol)
            dense_e, dense_ov = brute_force_reference(n)
            for idx, (e, exc) in enumerate(spectrum):
                assert abs(overlap_sq(sol, exc) - dense_ov[idx]) < 1e-10, (n, exc)

    def test_completeness(self):
        for n in (2, 3, 4):
            sol = solve_chain(n)
            tot = sum(overlap_sq(sol, exc)
                      for r in range(n + 1)
                      for exc in itertools.combinations(range(1, n + 1), r))
            assert tot == pytest.approx(1.0, abs=1e-10)

    def test_reflection_symmetry(self):
        # relabeling sites i -> N+1-i leaves det((1+G)/2) unchanged
        sol = solve_chain(6)
        g = correlation_matrix(sol, (1, 2))
        d1 = np.linalg.det((np.eye(6) + g) / 2)
        gr = g[::-1, ::-1]
        d2 = np.linalg.det((np.eye(6) + gr) / 2)
        assert d1 == pytest.approx(d2, rel=1e-12)

    def test_odd_parity_determinants_vanish(self):
        for n in (2, 5, 20, 101):
            sol = solve_chain(n)
            for exc in ((1,), (2,), (1, 2, 3)):
                if exc[-1] <= n:
                    assert overlap_sq(sol, exc) < 1e-12

    def test_neg_log_matches_det(self):
        sol = solve_chain(40)
        nlo = neg_log_overlap(sol)
        assert math.exp(-2 * nlo) == pytest.approx(overlap_sq(sol), rel=1e-10)


class TestEnumeration:
    def test_lowest_states(self):
        sol = solve_chain(100)
        states = [exc for _, exc in enumerate_low_states(sol, 10)]
        assert states[0] == ()
        assert states[1] == (1,)
        assert states[3] == (1, 2)
        assert states[7] == (1, 4)
        assert states[8] == (2, 3)

    def test_energies_ascending(self):
        sol = solve_chain(60)
        energies = [e for e, _ in enumerate_low_states(sol, 15)]
        assert energies == sorted(energies)

    def test_matches_exhaustive(self):
        sol = solve_chain(8)
        low = enumerate_low_states(sol, 12)
        full = many_body_spectrum(sol)
        base = -0.5 * sol.energies.sum()
        for (e1, s1), (e2, s2) in zip(low, full):
            assert e1 == pytest.approx(e2 - base, abs=1e-12)

    def test_h_labels(self):
        assert conformal_label(()) == 0
        assert conformal_label((1,)) == F(1, 2)
        assert conformal_label((1, 2)) == 2
        assert conformal_label((1, 4)) == 4
        assert conformal_label((2, 3)) == 4


@pytest.fixture(scope="module")
def summary():
    records = ising_overlap_table(range(2, 201, 2), 8)
    return ising_fit_summary(records)


class TestTableReproduction:

    def test_a1(self, summary):
        assert summary["a1"] == pytest.approx(-0.0625, abs=2e-4)

    def test_alpha(self, summary):
        assert summary["alpha"] == pytest.approx(1.01937, abs=2e-3)

    def test_even_tower_overlaps(self, summary):
        assert summary["overlaps"][3]["value"] == pytest.approx(0.5, abs=2e-3)
        assert summary["overlaps"][7]["value"] == pytest.approx(0.125, abs=2e-3)
        assert summary["overlaps"][8]["value"] == pytest.approx(0.625, abs=2e-3)

    def test_parity_forbidden_rows(self, summary):
        for k in (1, 2, 4, 6):
            assert summary["overlaps"][k]["parity_forbidden"]
            assert summary["overlaps"][k]["value"] == 0.0
            assert summary["overlaps"][k]["max_det"] < 1e-12
