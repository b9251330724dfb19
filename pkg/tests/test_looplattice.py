import math

import numpy as np
import pytest

from rectcft.looplattice import (adjacent_state, apply_tl,
                                 boundary_link_state, enumerate_links, gram,
                                 gram_row, hamiltonian, loop_fit_summary,
                                 loops_between, overlap_table, parse_p, spectrum,
                                 spectrum_dense, spectrum_sparse,
                                 tl_generator_matrix)

BETA3 = 2 * math.cos(math.pi / 4)  # p = 3


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


class TestLinkStates:
    def test_counts(self):
        assert len(enumerate_links(2)) == 1
        assert len(enumerate_links(4)) == 2
        assert len(enumerate_links(12)) == 132
        for n in (2, 4, 6, 8, 10):
            assert len(enumerate_links(n)) == catalan(n // 2)

    def test_n4_states(self):
        states = set(enumerate_links(4))
        assert states == {(1, 0, 3, 2), (3, 2, 1, 0)}  # (12)(34) and (14)(23)

    def test_planarity(self):
        for s in enumerate_links(8):
            for i in range(8):
                for j in range(8):
                    a, b = sorted((i, s[i]))
                    c, d = sorted((j, s[j]))
                    crossing = a < c < b < d
                    assert not crossing


class TestTLAction:
    def test_idempotent_up_to_loop(self):
        s = (1, 0, 3, 2)
        t, closed = apply_tl(0, s)
        assert t == s and closed

    def test_e2_moves_pairing(self):
        t, closed = apply_tl(1, (1, 0, 3, 2))
        assert t == (3, 2, 1, 0) and not closed

    def test_tl_relations_as_matrices(self):
        for n, beta in ((4, BETA3), (6, 1.3), (8, 2.0), (12, BETA3)):
            es = [tl_generator_matrix(i, n, beta) for i in range(n - 1)]
            for i in range(n - 1):
                assert np.abs(es[i] @ es[i] - beta * es[i]).max() < 1e-12
            for i in range(n - 2):
                assert np.abs(es[i] @ es[i + 1] @ es[i] - es[i]).max() < 1e-12
                assert np.abs(es[i + 1] @ es[i] @ es[i + 1] - es[i + 1]).max() < 1e-12
            for i in range(n - 1):
                for j in range(i + 2, n - 1):
                    assert np.abs(es[i] @ es[j] - es[j] @ es[i]).max() < 1e-12


class TestGram:
    def test_two_loop_gluing_example(self):
        # gluing <(12)(36)(45)| against |(16)(23)(45)> forms exactly two
        # closed loops, value beta^2
        s1 = (1, 0, 5, 4, 3, 2)   # arcs (12)(36)(45)
        s2 = (5, 2, 1, 4, 3, 0)   # arcs (16)(23)(45)
        assert loops_between(s1, s2) == 2
        assert BETA3 ** loops_between(s1, s2) == pytest.approx(BETA3 ** 2)

    def test_diagonal(self):
        for n in (2, 4, 6):
            g = gram(n, BETA3)
            assert np.allclose(np.diag(g), BETA3 ** (n / 2))

    def test_n4_gram(self):
        g = gram(4, 1.5)
        b = 1.5
        states = enumerate_links(4)
        adj = states.index((1, 0, 3, 2))
        other = 1 - adj
        assert g[adj, adj] == pytest.approx(b ** 2)
        assert g[adj, other] == pytest.approx(b)

    def test_h_self_adjoint_wrt_gram(self):
        for n in (4, 6, 8, 10, 12):
            h = hamiltonian(n, BETA3)
            g = gram(n, BETA3)
            assert np.abs(g @ h - h.T @ g).max() < 1e-9


class TestHamiltonian:
    def test_n2(self):
        assert hamiltonian(2, 1.7) == pytest.approx(np.array([[-1.7]]))

    def test_n4_by_hand(self):
        beta = 1.5
        states = enumerate_links(4)
        idx = {s: k for k, s in enumerate(states)}
        a, b = idx[(1, 0, 3, 2)], idx[(3, 2, 1, 0)]
        h = hamiltonian(4, beta)
        # e1+e3 act diagonally on (12)(34); e2 maps it to (14)(23), and v.v.
        expect = np.zeros((2, 2))
        expect[a, a] = -2 * beta
        expect[b, a] = -1
        expect[a, b] = -2
        expect[b, b] = -beta
        assert np.abs(h - expect).max() < 1e-14

    def test_ground_energy_n2(self):
        entries = spectrum(2, BETA3, 0)
        assert entries[0].energy == pytest.approx(-BETA3)

    def test_ground_energy_n4_closed_form(self):
        # 2x2 characteristic polynomial of [[-2b, -2], [-1, -b]]:
        # E^2 + 3b E + 2b^2 - 2 = 0, ground root (-3b - sqrt(b^2 + 8))/2
        beta = BETA3
        expect = (-3 * beta - math.sqrt(beta ** 2 + 8)) / 2
        entries = spectrum(4, beta, 0)
        assert entries[0].energy == pytest.approx(expect, rel=1e-12)


class TestBoundaryState:
    def test_coefficient(self):
        v = boundary_link_state(4, BETA3)
        states = enumerate_links(4)
        adj = states.index(adjacent_state(4))
        assert v[adj] == pytest.approx(BETA3 ** -2)
        assert np.count_nonzero(v) == 1

    def test_loop_norm(self):
        for n in (2, 4, 6):
            v = boundary_link_state(n, BETA3)
            g = gram(n, BETA3)
            assert v @ g @ v == pytest.approx(BETA3 ** (-n / 2))


class TestSpectrum:
    def test_eigenvalues_real_and_sorted(self):
        for p in (3, 4, 5, math.inf):
            beta = parse_p(p).beta
            entries = spectrum(8, beta, 3)
            energies = [e.energy for e in entries]
            assert energies == sorted(energies)

    def test_loop_normalization(self):
        g = gram(10, BETA3)
        for e in spectrum(10, BETA3, 3):
            assert e.vector @ g @ e.vector == pytest.approx(1.0, abs=1e-8)

    def test_eigen_residual(self):
        h = hamiltonian(12, BETA3)
        for e in spectrum(12, BETA3, 3):
            assert np.abs(h @ e.vector - e.energy * e.vector).max() < 1e-8

    def test_dense_vs_sparse(self):
        for n in (12, 14):
            d = spectrum_dense(n, BETA3, 3)
            s = spectrum_sparse(n, BETA3, 3)
            for a, b in zip(d, s):
                assert a.energy == pytest.approx(b.energy, abs=1e-9)
                assert a.boundary_overlap == pytest.approx(b.boundary_overlap, abs=1e-8)

    def test_gap_ratios_approach_field_content(self):
        # scaled gaps carry a nonuniversal velocity; their ratios approach
        # h/h' for the j=0 tower h = 2, 3, 4
        prev = None
        for n in (8, 12, 16):
            entries = spectrum(n, BETA3, 3)
            g1 = entries[1].energy - entries[0].energy
            g2 = entries[2].energy - entries[0].energy
            ratio = g2 / g1
            dev = abs(ratio - 1.5)
            if prev is not None:
                assert dev < prev
            prev = dev
        assert dev < 0.05

    def test_h3_state_decouples(self):
        for n in (10, 12, 14):
            entries = spectrum(n, BETA3, 2)
            assert abs(entries[2].boundary_overlap) < 1e-10


@pytest.fixture(scope="module")
def table_p3():
    return overlap_table(3, range(8, 19, 2), kmax=2)


class TestOverlapTableAndFits:
    def test_summary_values(self, table_p3):
        # small-window smoke check; the full N=8..24 run is in acceptance
        s = loop_fit_summary(table_p3, drop_first_excited=1)
        assert s["a1"] == pytest.approx(-0.0625, abs=5e-3)
        assert s["overlaps"][1]["value"] == pytest.approx(0.5, abs=2e-2)
        assert s["overlaps"][2]["max_abs_for_n_ge_10"] < 1e-10

    def test_parse_p(self):
        assert parse_p("inf").beta == 2.0
        assert parse_p(3).beta == pytest.approx(math.sqrt(2))
        assert parse_p("4").central_charge == pytest.approx(0.7)
