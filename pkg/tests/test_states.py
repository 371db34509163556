import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st_h

from coherase import numkernel as nk
from coherase import states as st
from coherase.coherence import relative_entropy_coherence
from coherase.errors import DimensionMismatch, InvalidState, MalformedDocument, NotHermitian, ParamOutOfRange

from helpers import entropy_bits, rand_density, rand_unitary

seeds = st_h.integers(min_value=0, max_value=2**32 - 1)
H_075 = entropy_bits([0.75, 0.25])  # 0.811278...


def test_reference_entropy_constant():
    assert H_075 == pytest.approx(0.811278, abs=1e-6)


class TestFamilies:
    def test_d1(self):
        np.testing.assert_allclose(st.maximally_coherent(1), [1.0])

    def test_d2_amplitudes(self):
        np.testing.assert_allclose(st.maximally_coherent(2), [2**-0.5, 2**-0.5], atol=1e-15)

    def test_d4_two_bits(self):
        rho = st.projector(st.maximally_coherent(4))
        assert relative_entropy_coherence(rho) == pytest.approx(2.0, abs=1e-12)

    def test_mixed_endpoints(self):
        np.testing.assert_allclose(st.max_coherent_mixed(3, 0.0), np.eye(3) / 3, atol=1e-15)
        np.testing.assert_allclose(st.max_coherent_mixed(3, 1.0), np.full((3, 3), 1 / 3), atol=1e-15)

    def test_mixed_spectrum(self):
        rho = st.max_coherent_mixed(2, 0.5)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rho))[::-1], [0.75, 0.25], atol=1e-14)
        assert st.von_neumann_entropy(rho) == pytest.approx(H_075, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 5])
    @pytest.mark.parametrize("p", [0.0, 0.3, 0.9])
    def test_mixed_closed_form_spectrum(self, d, p):
        # eigenvalues (1-p)/d + p once and (1-p)/d with multiplicity d-1
        expect = np.array([(1 - p) / d + p] + [(1 - p) / d] * (d - 1))
        assert st.von_neumann_entropy(st.max_coherent_mixed(d, p)) == pytest.approx(entropy_bits(expect), abs=1e-12)

    def test_mixed_rejects_p(self):
        with pytest.raises(ParamOutOfRange):
            st.max_coherent_mixed(2, 1.5)


class TestEntropy:
    def test_pure_zero(self):
        v = st.random_pure_state(4, seed=1)
        assert st.von_neumann_entropy(st.projector(v)) == pytest.approx(0.0, abs=1e-12)

    def test_mixed_qubit(self):
        assert st.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-15)

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_unitary_invariance_and_range(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 6))
        rho = rand_density(rng, d)
        u = rand_unitary(rng, d)
        h = st.von_neumann_entropy(rho)
        assert -1e-12 <= h <= np.log2(d) + 1e-12
        assert st.von_neumann_entropy(u @ rho @ u.conj().T) == pytest.approx(h, abs=1e-9)

    def test_coherence_complement(self):
        # H(rho) + C_r(rho) = log2 d on the rho_p family
        for d in (2, 3, 4):
            for p in np.linspace(0, 1, 11):
                rho = st.max_coherent_mixed(d, p)
                total = st.von_neumann_entropy(rho) + relative_entropy_coherence(rho)
                assert total == pytest.approx(np.log2(d), abs=1e-9)


class TestBipartite:
    def test_product_zero(self):
        rng = np.random.default_rng(0)
        rho = np.kron(rand_density(rng, 2), rand_density(rng, 3))
        assert st.mutual_information(rho, (2, 3)) == pytest.approx(0.0, abs=1e-10)

    def test_bell_two_bits(self):
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert st.mutual_information(np.outer(phi, phi), (2, 2)) == pytest.approx(2.0, abs=1e-12)

    def test_purification_twice_entropy(self):
        v = nk.purify(np.diag([0.75, 0.25]))
        assert st.mutual_information(np.outer(v, v.conj()), (2, 2)) == pytest.approx(2 * H_075, abs=1e-9)
        assert 2 * H_075 == pytest.approx(1.622556, abs=1e-6)

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_information_bounds(self, seed):
        rng = np.random.default_rng(seed)
        da, db = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        rho = rand_density(rng, da * db)
        i_ab = st.mutual_information(rho, (da, db))
        assert -1e-9 <= i_ab <= 2 * np.log2(min(da, db)) + 1e-9

    def test_araki_lieb_pure(self):
        v = nk.purify(rand_density(np.random.default_rng(3), 3))
        lhs, rhs, holds = st.araki_lieb_check(np.outer(v, v.conj()), (3, 3))
        assert lhs == pytest.approx(0, abs=1e-9) and rhs == pytest.approx(0, abs=1e-9) and holds

    def test_araki_lieb_additive(self):
        rho = np.kron(np.eye(2) / 2, np.diag([1.0, 0.0]))
        lhs, rhs, holds = st.araki_lieb_check(rho, (2, 2))
        assert lhs == pytest.approx(1.0) and rhs == pytest.approx(1.0) and holds

    def test_araki_lieb_random(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            assert st.araki_lieb_check(rand_density(rng, 4), (2, 2))[2]

    def test_split_mismatch(self):
        with pytest.raises(DimensionMismatch):
            st.mutual_information(np.eye(4) / 4, (3, 2))


class TestRandomState:
    def test_rank_one_pure(self):
        assert st.von_neumann_entropy(st.random_state(3, rank=1, seed=5)) == pytest.approx(0.0, abs=1e-9)

    def test_determinism(self):
        np.testing.assert_array_equal(st.random_state(4, seed=11), st.random_state(4, seed=11))
        np.testing.assert_array_equal(st.random_pure_state(4, seed=11), st.random_pure_state(4, seed=11))

    def test_monte_carlo_mean(self):
        mean = sum(st.random_state(2, 2, seed=s) for s in range(1000)) / 1000
        assert nk.trace_norm(mean - np.eye(2) / 2) < 0.05

    @pytest.mark.parametrize("rank", [1, 2, 3])
    def test_rank(self, rank):
        rho = st.random_state(3, rank=rank, seed=rank)
        assert np.sum(np.linalg.eigvalsh(rho) > 1e-10) == rank

    def test_bad_rank(self):
        with pytest.raises(ParamOutOfRange):
            st.random_state(2, rank=3)


class TestValidation:
    def test_trace(self):
        with pytest.raises(InvalidState):
            st.validate_state(np.eye(2))

    def test_negative(self):
        with pytest.raises(InvalidState):
            st.validate_state(np.diag([1.2, -0.2]))

    def test_hermitian(self):
        with pytest.raises(NotHermitian):
            st.validate_state([[0.5, 0.5], [0.0, 0.5]])

    def test_tiny_negative_is_clamped(self):
        rho = np.diag([1.0 + 5e-11, -5e-11])
        assert st.von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-9)

    def test_pure_norm(self):
        with pytest.raises(InvalidState):
            st.pure_state([1.0, 1.0])


class TestDocuments:
    def test_round_trip(self):
        rho = st.random_state(3, seed=2)
        doc = json.loads(json.dumps(st.state_to_doc(rho)))
        np.testing.assert_array_equal(st.state_from_doc(doc), rho)

    def test_dim_disagreement(self):
        doc = st.state_to_doc(np.eye(2) / 2)
        doc["dim"] = 3
        with pytest.raises(MalformedDocument):
            st.state_from_doc(doc)

    def test_rejects_invalid_state(self):
        with pytest.raises(InvalidState):
            st.state_from_doc(nk.matrix_to_doc(np.eye(2)))
