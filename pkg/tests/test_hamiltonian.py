import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import sector_spectrum

from su3sectors.errors import BudgetExceededError, InvalidInputError
from su3sectors.hamiltonian import (
    CartanVector,
    HamiltonianParams,
    build_fock_sector_hamiltonian,
    build_su3_sector_hamiltonian,
    effective_rep,
    read_matrix,
    su2_embedding_commutator,
    write_matrix,
)
from su3sectors.sectors import (
    antisymmetric_sector_basis,
    fock_sector_basis,
    symmetric_sector_basis,
)
from su3sectors.su3_repr import bases_spectrally_equal, brute_force_basis, build_basis
from su3sectors.young import Su3Label, enumerate_partitions, local_dimension

GENERIC = HamiltonianParams(1.0, 1.7, 1.0)


def eig(sm):
    return np.linalg.eigvalsh(sm.matrix)


def random_cartan(rng, n, max_len, max_count):
    k = int(rng.integers(1, min(max_len, local_dimension(n)) + 1))
    h = rng.integers(0, max_count + 1, size=k)
    if h.sum() == 0:
        h[-1] = 1
    return CartanVector(tuple(int(x) for x in h))


class TestParams:
    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            HamiltonianParams(np.inf, 1.0, 1.0)

    def test_integrable_flag(self):
        assert HamiltonianParams(1.0, 1.0, 1.0).integrable
        assert not GENERIC.integrable


class TestIrrepPathway:
    def test_fundamental_blocks(self):
        assert eig(build_su3_sector_hamiltonian(1, 0, M=0, params=GENERIC)) == pytest.approx([-2.89])
        assert eig(build_su3_sector_hamiltonian(1, 0, M=1, params=GENERIC)) == pytest.approx([1.0])
        assert eig(build_su3_sector_hamiltonian(1, 0, M=-1, params=GENERIC)) == pytest.approx([-2.0])

    def test_magnetization_out_of_range(self):
        with pytest.raises(InvalidInputError):
            build_su3_sector_hamiltonian(2, 0, M=3)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            build_su3_sector_hamiltonian(20, 20, params=GENERIC, max_dim=100)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 2))
    def test_symmetric_and_block_diagonal(self, p, q, r):
        sm = build_su3_sector_hamiltonian(p, q, r, params=GENERIC)
        H = sm.matrix
        assert np.max(np.abs(H - H.T), initial=0.0) == 0.0
        mags = np.sort(build_basis(p, q, r).magnetization)[::-1]
        off_block = mags[:, None] != mags[None, :]
        assert np.all(H[off_block] == 0.0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 4), st.integers(0, 4))
    def test_blocks_assemble_whole_irrep(self, p, q):
        whole = np.sort(eig(build_su3_sector_hamiltonian(p, q, params=GENERIC)))
        L = p + 2 * q
        parts = [eig(build_su3_sector_hamiltonian(p, q, M=M, params=GENERIC))
                 for M in range(-L, L + 1) if len(build_basis(p, q).block_indices(M))]
        assert np.allclose(whole, np.sort(np.concatenate(parts)), atol=1e-10)

    @pytest.mark.parametrize("lam", [(3,), (2, 1), (1, 1, 1), (3, 1), (2, 2), (2, 1, 1)])
    def test_brute_force_agreement(self, lam):
        label = Su3Label.from_diagram(lam)
        assert bases_spectrally_equal(build_basis(label.p, label.q, label.r), brute_force_basis(lam), GENERIC)


class TestFockPathway:
    def test_single_site(self):
        sm = build_fock_sector_hamiltonian(fock_sector_basis((1,), 0), GENERIC)
        assert eig(sm) == pytest.approx([-2.89])

    def test_field_term_vanishes_at_zero_magnetization(self):
        basis = fock_sector_basis((1, 2, 1), 0)
        H_field = build_fock_sector_hamiltonian(basis, HamiltonianParams(3.0, 0.0, 0.0)).matrix
        assert np.all(H_field == 0.0)

    def test_two_site_sector(self):
        basis = fock_sector_basis((2, 1), 0)
        sm = build_fock_sector_hamiltonian(basis, GENERIC)
        assert sm.dim == 4
        assert np.allclose(sm.matrix, sm.matrix.T)
        assert np.allclose(eig(sm), sector_spectrum((2, 1), 0, 1.0, 1.7, 1.0), atol=1e-10)

    def test_rejects_non_basis(self):
        with pytest.raises(InvalidInputError):
            build_fock_sector_hamiltonian(np.eye(2), GENERIC)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(1, 2), min_size=1, max_size=4), st.integers(-2, 2),
           st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
    def test_fock_matches_product_space(self, occ, M, h, g1, g2):
        if abs(M) > sum(occ):
            return
        sm = build_fock_sector_hamiltonian(fock_sector_basis(occ, M), HamiltonianParams(h, g1, g2))
        assert np.allclose(eig(sm), sector_spectrum(occ, M, h, g1, g2), atol=1e-9)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 2), st.integers(-2, 2))
    def test_symmetric_matches_product_space(self, L, n, M):
        if abs(M) > n * L or local_dimension(n) ** L > 300:
            return
        sm = build_fock_sector_hamiltonian(symmetric_sector_basis(L, n, M), GENERIC)
        assert np.allclose(eig(sm), sector_spectrum([n] * L, M, 1.0, 1.7, 1.0, "symmetric"), atol=1e-9)

    @pytest.mark.parametrize("occ,M", [((1, 1), 0), ((1, 1, 1), 0), ((2, 2), 1), ((2, 2, 1), 0), ((1, 2, 2), 2),
                                       ((2, 2, 2), 1)])
    def test_antisymmetric_matches_product_space(self, occ, M):
        sm = build_fock_sector_hamiltonian(antisymmetric_sector_basis(occ, M), GENERIC)
        assert np.allclose(eig(sm), sector_spectrum(occ, M, 1.0, 1.7, 1.0, "antisymmetric"), atol=1e-9)

    @pytest.mark.parametrize("L", range(1, 7))
    def test_symmetric_n1_equals_irrep(self, L):
        for M in range(-L, L + 1):
            a = eig(build_fock_sector_hamiltonian(symmetric_sector_basis(L, 1, M), GENERIC))
            b = eig(build_su3_sector_hamiltonian(L, 0, M=M, params=GENERIC))
            assert np.allclose(a, b, atol=1e-10)

    def test_antisymmetric_n1_equals_irrep(self):
        for M in (-1, 0, 1):
            a = eig(build_fock_sector_hamiltonian(antisymmetric_sector_basis((1, 1), M), GENERIC))
            b = eig(build_su3_sector_hamiltonian(0, 1, M=M, params=GENERIC))
            assert np.allclose(a, b, atol=1e-12)

    def test_export_round_trip(self, tmp_path):
        sm = build_su3_sector_hamiltonian(3, 1, M=1, params=GENERIC)
        write_matrix(sm, tmp_path / "h.txt")
        header, mat = read_matrix(tmp_path / "h.txt")
        assert header["dim"] == sm.dim and header["g1"] == 1.7
        assert np.array_equal(mat, sm.matrix)


class TestEffectiveRep:
    def test_identity_at_one_boson(self):
        assert effective_rep(CartanVector((2, 1, 0)), 1, 4) == (2, 1, 0)
        for lam in enumerate_partitions(9, 3):
            cartan = CartanVector.from_diagram(lam)
            label = Su3Label.from_diagram(lam)
            assert effective_rep(cartan, 1) == (label.p, label.q, label.r)

    @pytest.mark.parametrize("L", [1, 5, 12])
    def test_single_row(self, L):
        assert effective_rep(CartanVector((L,)), 2, L) == (2 * L, 0, 0)

    @pytest.mark.parametrize("n", [10, 100])
    def test_four_thirds_family(self, n):
        # columns of length 0.6 n + 1 give p*/q* = 4/3 and p*/L = 0.4 n
        alpha = (6 * n) // 10 + 1
        h = [0] * alpha
        h[-1] = 1
        p, q, r = effective_rep(CartanVector(tuple(h)), n)
        assert 3 * p == 4 * q and r == 0
        assert p == pytest.approx(0.4 * n * alpha)

    def test_four_thirds_one_boson(self):
        assert effective_rep(CartanVector((4, 3)), 1) == (4, 3, 0)

    def test_wrong_site_count(self):
        with pytest.raises(InvalidInputError):
            effective_rep(CartanVector((2, 1)), 1, 5)

    def test_column_too_long(self):
        with pytest.raises(InvalidInputError):
            effective_rep(CartanVector((0, 0, 0, 1)), 1)

    def test_negative_entries(self):
        with pytest.raises(InvalidInputError):
            CartanVector((1, -1))

    @settings(max_examples=200, deadline=None)
    @given(st.sampled_from([1, 2, 3, 5]), st.integers(0, 2**32 - 1))
    def test_constraint_property(self, n, seed):
        cartan = random_cartan(np.random.default_rng(seed), n, 25, 6)
        p, q, r = effective_rep(cartan, n)
        assert min(p, q, r) >= 0
        assert p + 2 * q + 3 * r == n * cartan.n_sites

    def test_t0_closed_form(self):
        n = 6
        h = (3, 1, 4, 1, 5)
        p, q, r = effective_rep(CartanVector(h), n)
        assert p == sum(a * (n - a + 1) * x for a, x in enumerate(h, 1))
        assert q == sum(a * (a - 1) // 2 * x for a, x in enumerate(h, 1))


class TestSu2Point:
    def test_integrable(self):
        assert su2_embedding_commutator(4, 2, params=HamiltonianParams(1.0, 1.0, 1.0)) < 1e-10

    def test_generic(self):
        assert su2_embedding_commutator(4, 2, params=GENERIC) > 0.01

    def test_trivial(self):
        assert su2_embedding_commutator(0, 0) == 0.0
