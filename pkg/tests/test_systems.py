import numpy as np
import pytest

from cesarolab import catalog
from cesarolab import systems as sy
from cesarolab.numerics import kron, spectrum

T31 = catalog.named_system("T31")
H31 = catalog.named_system("H31")
SWAP = catalog.swap()
P33 = catalog.named_system("P33")


def same_span(basis, spanning):
    """Row spaces of two arrays coincide."""
    basis, spanning = np.atleast_2d(basis), np.atleast_2d(spanning)
    r = np.linalg.matrix_rank
    return r(basis) == r(spanning) == r(np.vstack([basis, spanning]))


def random_systems(count, dims=(2, 6), seed=0):
    rng = np.random.default_rng(seed)
    for i in range(count):
        d = int(rng.integers(dims[0], dims[1] + 1))
        yield catalog.random_system(d, int(rng.integers(2 ** 31)), catalog.PROFILES[i % 3])


def naive_cesaro(T, n):
    P, acc = np.eye(T.shape[0]), np.zeros(T.shape)
    for _ in range(n):
        P = P @ T
        acc += P
    return acc / n


class TestValidateUcp:
    def test_accepts_examples(self):
        assert np.array_equal(sy.validate_ucp([[0.5, 0.5], [0, 1]]).matrix, T31.matrix)
        assert np.array_equal(sy.validate_ucp(np.eye(3)).matrix, np.eye(3))

    def test_rejects_row_sum(self):
        with pytest.raises(ValueError, match="unital"):
            sy.validate_ucp([[1.0, 1.0], [0.0, 1.0]])

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="positive"):
            sy.validate_ucp([[1.5, -0.5], [0.0, 1.0]])

    def test_rejects_non_square_and_complex(self):
        with pytest.raises(ValueError):
            sy.validate_ucp(np.ones((2, 3)) / 3)
        with pytest.raises(ValueError):
            sy.validate_ucp([[1j, 1 - 1j], [0, 1]])

    def test_clamps_within_tolerance(self):
        M = sy.validate_ucp([[1 + 5e-13, -5e-13], [0.0, 1.0]]).matrix
        assert np.all(M >= 0) and np.allclose(M.sum(axis=1), 1, atol=1e-15)
        assert not M.flags.writeable


class TestFixedPoints:
    def test_t31(self):
        assert same_span(sy.fixed_point_space(T31), [1, 1])

    def test_h31(self):
        assert same_span(sy.fixed_point_space(H31), [[1, 0, 0], [0, 1, 1]])

    def test_p_squared(self):
        u = v = 0.5
        P2 = catalog.DynSystem.from_matrix(P33.matrix @ P33.matrix)
        # P^2 (x, y, z) = (x, y, u x + u v y + v^2 z)
        assert np.array_equal(P2.matrix, [[1, 0, 0], [0, 1, 0], [u, u * v, v * v]])
        basis = sy.fixed_point_space(P2)
        assert basis.shape[0] == 2
        x, y, z = basis.T
        assert np.allclose(z, (x + v * y) / (1 + v), atol=1e-10)

    def test_unit_always_fixed(self):
        for s in random_systems(20):
            B = sy.fixed_point_space(s)
            assert B.shape[0] >= 1
            assert same_span(np.vstack([B, np.ones(s.algebra_dim)]), B)


class TestProjection:
    def test_examples(self):
        assert np.allclose(sy.cesaro_projection(T31).matrix, [[0, 1], [0, 1]], atol=1e-10)
        assert np.allclose(sy.cesaro_projection(H31).matrix,
                           [[1, 0, 0], [0, 1, 0], [0, 1, 0]], atol=1e-10)
        ident = catalog.identity_system(3)
        assert np.allclose(sy.cesaro_projection(ident, "both").matrix, np.eye(3))

    def test_iterative_matches_naive_means(self):
        A, n, _ = sy.cesaro_means(SWAP.matrix, 1e-10)
        assert np.allclose(A, naive_cesaro(SWAP.matrix, n))
        for A, _, n in sy._doublings(P33.matrix):
            assert np.allclose(A, naive_cesaro(P33.matrix, n), atol=1e-14)
            if n == 64:
                break

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            sy.cesaro_projection(T31, "magic")

    def test_invariants_catalog_and_random(self):
        systems = [T31, H31, SWAP, P33, catalog.identity_system(2)] + list(random_systems(100))
        for s in systems:
            spec = sy.cesaro_projection(s, "spectral", 1e-10)
            it = sy.cesaro_projection(s, "iterative", 1e-10)
            assert np.max(np.abs(spec.matrix - it.matrix)) <= 1e-9, s.label
            defects = sy.projection_defects(spec.matrix, s.matrix)
            assert max(defects.values()) <= 1e-10, (s.label, defects)
            assert same_span(spec.matrix.T, spec.range_basis)
            assert same_span(spec.range_basis, sy.fixed_point_space(s))


class TestDeviation:
    def test_fixed_point_zero(self):
        assert np.all(sy.deviation_profile(H31, [2.0, 1.0, 1.0], [1, 0, 0], [1, 10, 100]) == 0)

    def test_swap_constant_half(self):
        prof = sy.deviation_profile(SWAP, [1.0, 0.0], [1.0, 0.0], [1, 2, 3, 10, 10000])
        assert np.all(np.abs(prof - 0.5) <= 1e-15)

    def test_t31_decay(self):
        # |phi(T^k x) - phi(E x)| = 2^-k, so the Cesaro mean is below 1/n
        grid = np.array([1, 10, 100, 1000])
        prof = sy.deviation_profile(T31, [1.0, 0.0], [1.0, 0.0], grid)
        assert np.allclose(prof, (1 - 0.5 ** grid) / grid)
        assert prof[-1] < 1e-2

    def test_matrices_against_loop(self):
        for s in [SWAP, P33] + list(random_systems(5, seed=3)):
            E = sy.cesaro_projection(s).matrix
            grid = [1, 63, 64, 65, 200]
            D = sy.deviation_matrices(s.matrix, E, grid)
            P, acc = np.eye(s.algebra_dim), np.zeros_like(E)
            for k in range(1, 201):
                P = P @ s.matrix
                acc += np.abs(P - E)
                if k in grid:
                    assert np.allclose(D[grid.index(k)], acc / k, atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            sy.deviation_profile(SWAP, [1, 0, 0], [1, 0], [10])


class TestClassify:
    def test_swap(self):
        m = sy.classify_system(SWAP)
        assert m.unique_E_ergodic and not m.unique_E_weak_mixing
        assert np.allclose(sorted(m.peripheral_eigenvalues.real), [-1, 1])

    def test_t31_and_h31(self):
        for s in (T31, H31):
            m = sy.classify_system(s)
            assert m.unique_E_ergodic and m.unique_E_weak_mixing and m.method_agreement

    def test_identity(self):
        m = sy.classify_system(catalog.identity_system(3))
        assert m.unique_E_ergodic and m.unique_E_weak_mixing and m.direct_rate == 0

    def test_agreement_random_dims_2_to_6(self):
        for s in random_systems(120, seed=11):
            m = sy.classify_system(s)
            assert m.method_agreement
            assert m.unique_E_weak_mixing == spectrum(s.matrix).peripheral_is_one

    def test_disagreement_raised_on_short_grid(self):
        # after two steps T31 still deviates by 1/4, far above tol / d^2
        with pytest.raises(sy.MethodDisagreement) as err:
            sy.classify_system(T31, grid=(1, 2))
        assert err.value.pair == (0, 0)
        assert not sy.classify_system(T31, grid=(1, 2), strict=False).method_agreement

    def test_states_agree_with_coordinate_functionals(self):
        rng = np.random.default_rng(4)
        for s in list(random_systems(30, dims=(2, 4), seed=5)) + [SWAP, P33]:
            m = sy.classify_system(s)
            worst = 0.0
            for _ in range(20):
                phi = rng.dirichlet(np.ones(s.algebra_dim))
                x = rng.uniform(-1, 1, s.algebra_dim)
                prof = sy.deviation_profile(s, x, phi, [1000, 10000])
                worst = max(worst, (prof[1] * 10000 - prof[0] * 1000) / 9000)
            assert (worst <= 1e-2) == m.unique_E_weak_mixing, s.label


class TestTensor:
    def test_trivial_factor(self):
        t = sy.tensor_system(T31, catalog.identity_system(1))
        assert np.array_equal(t.matrix, T31.matrix)

    def test_example_block_form(self):
        H = H31.matrix
        expected = 0.5 * np.block([[H, H], [np.zeros((3, 3)), 2 * H]])
        assert np.array_equal(sy.tensor_system(T31, H31).matrix, expected)

    def test_powers_and_eigenvalues(self):
        gen = random_systems(10, dims=(2, 3), seed=6)
        for a, b in zip(gen, gen):
            t = sy.tensor_system(a, b).matrix
            for k in range(1, 11):
                lhs = np.linalg.matrix_power(t, k)
                rhs = kron(np.linalg.matrix_power(a.matrix, k), np.linalg.matrix_power(b.matrix, k))
                assert np.allclose(lhs, rhs, atol=1e-13)
            prods = np.outer(np.linalg.eigvals(a.matrix), np.linalg.eigvals(b.matrix)).ravel()
            ev = np.linalg.eigvals(t)
            # multiset match by greedy nearest pairing
            remaining = list(ev)
            for p in prods:
                j = int(np.argmin(np.abs(np.array(remaining) - p)))
                assert abs(remaining.pop(j) - p) <= 1e-6
            assert not remaining

    def test_factorization_t31_h31(self):
        r = sy.e_factorization_check(T31, H31)
        assert r.factorizes and r.error <= 1e-10
        assert r.fixed_dim_tensor == 2
        # {(x1, x2, x2, x1, x2, x2)}
        assert same_span(r.lhs.range_basis, [[1, 0, 0, 1, 0, 0], [0, 1, 1, 0, 1, 1]])

    def test_factorization_fails_p33_swap(self):
        r = sy.e_factorization_check(P33, SWAP)
        assert not r.factorizes
        assert (r.fixed_dim_tensor, r.fixed_dim_product) == (2, 1)
        # every fixed vector has the form (x, P x) with x fixed by P^2
        P = P33.matrix
        for w in r.lhs.range_basis:
            W = w.reshape(3, 2)  # coordinate (i, j) of A (x) B
            assert np.allclose(W[:, 1], P @ W[:, 0], atol=1e-10)

    def test_factorization_identity(self):
        ident = catalog.identity_system(2)
        assert sy.e_factorization_check(ident, ident).factorizes

    def test_mix_a_examples(self):
        r = sy.theorem_mix_a_check(T31, H31)
        assert r.holds and r.weak_mixing_tensor
        r = sy.theorem_mix_a_check(SWAP, SWAP)
        assert r.holds and not r.weak_mixing_tensor
        assert np.any(np.isclose(r.peripheral_tensor, -1))
        assert same_span(sy.fixed_point_space(sy.tensor_system(SWAP, SWAP)),
                         [[1, 0, 0, 1], [0, 1, 1, 0]])
        r = sy.theorem_mix_a_check(T31, catalog.identity_system(1))
        assert r.holds and r.weak_mixing_tensor == r.weak_mixing_a

    def test_mix_c(self):
        r = sy.theorem_mix_c_check(T31, SWAP)
        assert not r.skipped and r.holds and r.residual <= 1e-8
        assert sy.theorem_mix_c_check(T31, P33).skipped is False
        assert sy.theorem_mix_c_check(SWAP, SWAP).skipped
        assert sy.theorem_mix_c_check(P33, SWAP).skipped

    def test_swap_square_ergodic_not_mixing(self):
        t = sy.tensor_system(SWAP, SWAP)
        ok, res, n = sy.cesaro_convergence(t, sy.cesaro_projection(t).matrix, 1e-8, 2 ** 16)
        assert ok and res <= 1e-8 and n <= 2 ** 16
        assert not sy.classify_system(t).unique_E_weak_mixing


class TestStates:
    def test_h31(self):
        st = sy.state_set_probe(H31)
        assert np.allclose(st.extreme_states, [[1, 0, 0], [0, 1, 0]])
        assert not st.faithful
        # each extreme state is invariant
        assert np.allclose(st.extreme_states @ H31.matrix, st.extreme_states)

    def test_identity(self):
        st = sy.state_set_probe(catalog.identity_system(3))
        assert np.allclose(st.extreme_states, np.eye(3)) and st.faithful

    def test_irreducible_power_iteration_oracle(self):
        s = catalog.random_system(5, 12, "generic")
        st = sy.state_set_probe(s)
        assert st.extreme_states.shape[0] == 1 and st.faithful
        p = np.ones(5) / 5
        for _ in range(500):
            p = p @ s.matrix
        assert np.allclose(st.extreme_states[0], p, atol=1e-12)

    def test_random_states_are_invariant(self):
        for s in random_systems(30, seed=8):
            st = sy.state_set_probe(s)
            S = st.extreme_states
            assert np.allclose(S @ s.matrix, S, atol=1e-10)
            assert np.allclose(S.sum(axis=1), 1) and np.all(S >= -1e-15)
            # the extreme states span the invariant functionals
            assert np.linalg.matrix_rank(S) == sy.invariant_functionals(s).shape[0]
