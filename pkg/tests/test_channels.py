import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st_h

from coherase import channels as ch
from coherase import states as st
from coherase.coherence import dephase, relative_entropy_coherence
from coherase.errors import DimensionMismatch, MalformedDocument, ValidationError

from helpers import entropy_bits, incoherent_matrix, rand_density, rand_probs, rand_pure, rand_unitary, vn_entropy

seeds = st_h.integers(min_value=0, max_value=2**32 - 1)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def pauli_pair():
    return ch.UnitaryEnsemble(np.array([0.5, 0.5]), np.array([np.eye(2), Z]))


def random_ensemble(rng, d, n):
    return ch.UnitaryEnsemble(rand_probs(rng, n), np.array([rand_unitary(rng, d) for _ in range(n)]))


class TestEnsemble:
    def test_validation(self):
        with pytest.raises(ValidationError):
            ch.UnitaryEnsemble(np.array([0.5, 0.4]), np.array([np.eye(2), Z]))
        with pytest.raises(ValidationError):
            ch.UnitaryEnsemble(np.array([1.0]), np.array([[[1, 1], [0, 1]]]))
        with pytest.raises(DimensionMismatch):
            ch.UnitaryEnsemble(np.array([1.0]), np.array([np.eye(2), Z]))

    def test_incoherent_flag(self):
        assert pauli_pair().incoherent
        hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        assert not ch.UnitaryEnsemble.uniform([np.eye(2), hadamard]).incoherent


class TestApply:
    def test_identity(self):
        rho = rand_density(np.random.default_rng(0), 3)
        out = ch.apply_ensemble(ch.UnitaryEnsemble(np.array([1.0]), np.eye(3)[None]), rho)
        np.testing.assert_allclose(out, rho, atol=1e-15)

    def test_pauli_pair_on_psi2(self, psi2):
        np.testing.assert_allclose(ch.apply_ensemble(pauli_pair(), psi2), np.eye(2) / 2, atol=1e-15)

    def test_weyl_qutrit(self):
        rho = rand_density(np.random.default_rng(1), 3)
        out = ch.apply_ensemble(ch.weyl_ensemble(3), rho)
        assert np.max(np.abs(out - np.eye(3) / 3)) < 1e-10

    def test_matches_explicit_sum(self):
        rng = np.random.default_rng(2)
        e = random_ensemble(rng, 3, 4)
        rho = rand_density(rng, 3)
        expect = sum(p * u @ rho @ u.conj().T for p, u in zip(e.probs, e.unitaries))
        np.testing.assert_allclose(ch.apply_ensemble(e, rho), expect, atol=1e-14)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ch.apply_ensemble(pauli_pair(), np.eye(3) / 3)


class TestWeyl:
    def test_paulis(self):
        e = ch.weyl_ensemble(2)
        np.testing.assert_allclose(e.probs, [0.25] * 4)
        expect = [np.eye(2), Z, X, X @ Z]
        for u, v in zip(e.unitaries, expect):
            np.testing.assert_allclose(u, v, atol=1e-15)

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_shift_clock_relation(self, d):
        w = np.exp(2j * np.pi / d)
        xs = np.roll(np.eye(d), 1, axis=0)
        zs = np.diag(w ** np.arange(d))
        for k in range(d):
            for j in range(d):
                expect = np.linalg.matrix_power(xs, k) @ np.linalg.matrix_power(zs, j)
                np.testing.assert_allclose(ch.weyl_operator(d, k, j), expect, atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_randomizes(self, d):
        rng = np.random.default_rng(d)
        for _ in range(5):
            out = ch.apply_ensemble(ch.weyl_ensemble(d), rand_density(rng, d))
            assert np.max(np.abs(out - np.eye(d) / d)) < 1e-10

    def test_exchange_on_mixed_qubit(self):
        e = ch.weyl_ensemble(2)
        np.testing.assert_allclose(ch.exchange_matrix(e, np.eye(2) / 2), np.eye(4) / 4, atol=1e-15)
        assert ch.entropy_exchange(e, np.eye(2) / 2) == pytest.approx(2.0, abs=1e-12)
        assert ch.entropy_exchange_via_purification(e, np.eye(2) / 2) == pytest.approx(2.0, abs=1e-12)


class TestZDephasing:
    def test_psi2(self, psi2):
        np.testing.assert_allclose(ch.apply_ensemble(ch.z_dephasing_ensemble(2), psi2), np.eye(2) / 2, atol=1e-15)

    def test_diagonal_fixed(self):
        rho = np.diag([0.2, 0.5, 0.3]).astype(complex)
        np.testing.assert_allclose(ch.apply_ensemble(ch.z_dephasing_ensemble(3), rho), rho, atol=1e-15)

    def test_pure_qutrit_matches_dephase(self):
        v = rand_pure(np.random.default_rng(3), 3)
        rho = np.outer(v, v.conj())
        assert np.max(np.abs(ch.apply_ensemble(ch.z_dephasing_ensemble(3), rho) - dephase(rho))) < 1e-10


class TestIncoherentUnitary:
    def test_identity(self):
        u = ch.IncoherentUnitary((0, 1, 2), (0.0, 0.0, 0.0))
        np.testing.assert_array_equal(ch.incoherent_to_matrix(u), np.eye(3))

    def test_swap_with_phases(self):
        # entry exp(i phi_{Pi(j)}) at (Pi(j), j): column 0 -> row 1 with phase pi
        m = ch.incoherent_to_matrix(ch.IncoherentUnitary((1, 0), (0.0, np.pi)))
        np.testing.assert_allclose(m, [[0, 1], [-1, 0]], atol=1e-15)

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_matches_phase_times_permutation(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 6))
        perm, phases = rng.permutation(d), rng.uniform(0, 2 * np.pi, d)
        u = ch.IncoherentUnitary(tuple(perm), tuple(phases))
        pi = np.zeros((d, d))
        pi[perm, np.arange(d)] = 1
        np.testing.assert_allclose(u.to_matrix(), np.diag(np.exp(1j * phases)) @ pi, atol=1e-12)
        np.testing.assert_allclose(u.to_matrix(), incoherent_matrix(perm, phases), atol=1e-12)

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_compose_and_inverse(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 6))
        a, b = ch.random_incoherent(d, rng), ch.random_incoherent(d, rng)
        np.testing.assert_allclose(a.compose(b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-12)
        np.testing.assert_allclose(a.compose(a.inverse()).to_matrix(), np.eye(d), atol=1e-12)
        np.testing.assert_allclose(a.inverse().to_matrix(), a.to_matrix().conj().T, atol=1e-12)

    def test_factor_round_trip(self):
        u = ch.random_incoherent(4, seed=9)
        f = ch.factor_incoherent(u.to_matrix())
        np.testing.assert_allclose(f.to_matrix(), u.to_matrix(), atol=1e-12)
        assert ch.factor_incoherent(rand_unitary(np.random.default_rng(0), 3)) is None

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_preserves_diagonal_entropy(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(2, 6))
        rho = rand_density(rng, d)
        u = ch.random_incoherent(d, rng).to_matrix()
        out = u @ rho @ u.conj().T
        assert entropy_bits(np.diag(out).real) == pytest.approx(entropy_bits(np.diag(rho).real), abs=1e-10)

    def test_rejects_bad_permutation(self):
        with pytest.raises(ValidationError):
            ch.IncoherentUnitary((0, 0), (0.0, 0.0))


class TestEntropyExchange:
    def test_single_unitary(self):
        rng = np.random.default_rng(4)
        e = ch.UnitaryEnsemble(np.array([1.0]), rand_unitary(rng, 3)[None])
        rho = rand_density(rng, 3)
        assert ch.entropy_exchange(e, rho) == pytest.approx(0.0, abs=1e-12)
        assert ch.entropy_exchange_via_purification(e, rho) == pytest.approx(0.0, abs=1e-9)

    def test_pauli_pair_one_bit(self, psi2):
        assert ch.entropy_exchange(pauli_pair(), psi2) == pytest.approx(1.0, abs=1e-12)
        assert ch.entropy_exchange_via_purification(pauli_pair(), psi2) == pytest.approx(1.0, abs=1e-12)

    def test_dephasing_on_pure_is_coherence(self):
        rng = np.random.default_rng(5)
        for d in (2, 3, 4):
            v = rand_pure(rng, d)
            rho = np.outer(v, v.conj())
            h_e = ch.entropy_exchange(ch.z_dephasing_ensemble(d), rho)
            assert h_e == pytest.approx(entropy_bits(np.abs(v) ** 2), abs=1e-9)
            assert h_e == pytest.approx(relative_entropy_coherence(rho), abs=1e-9)

    def test_dual_paths(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            d, n = int(rng.integers(2, 7)), int(rng.integers(1, 9))
            e, rho = random_ensemble(rng, d, n), rand_density(rng, d)
            assert ch.entropy_exchange(e, rho) == pytest.approx(ch.entropy_exchange_via_purification(e, rho), abs=1e-9)

    def test_exchange_matrix_is_state(self):
        rng = np.random.default_rng(7)
        w = ch.exchange_matrix(random_ensemble(rng, 3, 5), rand_density(rng, 3))
        assert np.trace(w).real == pytest.approx(1.0)
        assert np.linalg.eigvalsh(w).min() > -1e-12

    def test_independent_environment_oracle(self):
        # environment state from a Stinespring isometry built by hand
        rng = np.random.default_rng(8)
        e, rho = random_ensemble(rng, 2, 3), rand_density(rng, 2)
        iso = np.concatenate([np.sqrt(p) * u for p, u in zip(e.probs, e.unitaries)], axis=0)
        big = iso @ rho @ iso.conj().T  # environment index major
        env = np.einsum("iaja->ij", big.reshape(3, 2, 3, 2))
        assert ch.entropy_exchange(e, rho) == pytest.approx(vn_entropy(env), abs=1e-10)

    def test_product_additivity(self, psi2):
        e = pauli_pair()
        for n in (2, 3):
            big_e = e
            big_rho = psi2
            for _ in range(n - 1):
                big_e = ch.tensor_ensemble(big_e, e)
                big_rho = np.kron(big_rho, psi2)
            assert ch.entropy_exchange(big_e, big_rho) == pytest.approx(n, abs=1e-9)
            assert ch.entropy_exchange_via_purification(big_e, big_rho) == pytest.approx(n, abs=1e-9)


class TestBounds:
    def test_pauli_pair_all_equal(self, psi2):
        np.testing.assert_allclose(ch.ensemble_entropy_bounds(pauli_pair(), psi2), (1, 1, 1), atol=1e-12)

    def test_single_unitary(self):
        e = ch.UnitaryEnsemble(np.array([1.0]), np.eye(2)[None])
        np.testing.assert_allclose(ch.ensemble_entropy_bounds(e, np.eye(2) / 2), (0, 0, 0), atol=1e-12)

    @given(seeds)
    @settings(max_examples=50, deadline=None)
    def test_chain(self, seed):
        rng = np.random.default_rng(seed)
        d, n = int(rng.integers(2, 6)), int(rng.integers(1, 9))
        h_e, h_p, log_n = ch.ensemble_entropy_bounds(random_ensemble(rng, d, n), rand_density(rng, d))
        assert h_e <= h_p + 1e-9 and h_p <= log_n + 1e-9


class TestDocuments:
    def test_round_trip(self):
        e = random_ensemble(np.random.default_rng(9), 3, 3)
        back = ch.ensemble_from_doc(json.loads(json.dumps(ch.ensemble_to_doc(e))))
        np.testing.assert_array_equal(back.probs, e.probs)
        np.testing.assert_array_equal(back.unitaries, e.unitaries)

    def test_wrong_member_dim(self):
        doc = ch.ensemble_to_doc(pauli_pair())
        doc["dim"] = 3
        with pytest.raises(MalformedDocument):
            ch.ensemble_from_doc(doc)

    def test_missing_field(self):
        with pytest.raises(MalformedDocument):
            ch.ensemble_from_doc({"dim": 2})
