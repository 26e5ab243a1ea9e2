import numpy as np
import pytest

from cesarolab import catalog
from cesarolab import sequences as sq
from cesarolab import systems as sy


class TestBlock:
    def test_boundaries(self):
        # n_1 = 1, n_2 = 2, n_{j+1} = 2 n_j - 1 by hand
        assert catalog.block_boundaries(5) == [1, 2, 3, 5, 9, 17]

    def test_ratio(self):
        nb = catalog.block_boundaries(12)
        for a, b in zip(nb[1:], nb[2:]):
            assert (a - 1) / (b - 1) == 0.5

    def test_terms(self):
        seq = catalog.block_counterexample(4)
        xs = seq.terms(seq.horizon)
        assert seq.horizon == 8
        assert np.argmax(xs, axis=1).tolist() == [0, 1, 2, 2, 3, 3, 3, 3]
        assert np.all(np.linalg.norm(xs, axis=1) == 1)

    def test_errors(self):
        with pytest.raises(ValueError):
            catalog.block_counterexample(1)

    def test_euclidean_variant(self):
        seq = catalog.block_counterexample(5, "euclidean")
        v = sq.classify(seq, catalog.block_grid(5))
        assert v.uniform_weak_mixing == sq.Verdict.NO


class TestOrbits:
    def test_fixed_point_centered_is_zero(self):
        s = catalog.orbit_sequence(catalog.named_system("H31"), [1.0, 2.0, 2.0], horizon=50)
        assert np.all(s.terms(50) == 0)

    def test_swap_alternates(self):
        s = catalog.orbit_sequence(catalog.swap(), [1.0, 0.0], horizon=6)
        # T(1,0) = (0,1), E(1,0) = (1/2,1/2)
        expected = np.array([[-0.5, 0.5], [0.5, -0.5]] * 3)
        assert np.allclose(s.terms(6), expected)
        assert s.bound == 1.5

    def test_t31_geometric(self):
        s = catalog.orbit_sequence(catalog.named_system("T31"), [1.0, 0.0], horizon=30)
        k = np.arange(1, 31)
        assert np.allclose(s.terms(30)[:, 0], 0.5 ** k)
        assert np.all(s.terms(30)[:, 1] == 0)

    def test_uncentered(self):
        s = catalog.orbit_sequence(catalog.swap(), [1.0, 0.0], centered=False, horizon=4)
        assert np.allclose(s.terms(4), [[0, 1], [1, 0], [0, 1], [1, 0]])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            catalog.orbit_sequence(catalog.swap(), [1.0, 0.0, 0.0])

    def test_power_bound(self):
        U = np.array([[1.0, 1.0], [0.0, -1.0]])
        assert catalog.power_bound(U, 10) == pytest.approx(np.linalg.norm(U, 2))


class TestSystems:
    def test_t31(self):
        assert np.array_equal(catalog.named_system("T31").matrix, [[0.5, 0.5], [0, 1]])

    def test_p_squared(self):
        for u in (0.5, 0.25, 0.9):
            v = 1 - u
            P = catalog.named_system("P33", u, v).matrix
            expected = np.array([[1, 0, 0], [0, 1, 0], [u, u * v, v * v]])
            assert np.allclose(P @ P, expected, atol=1e-15)
        P = catalog.named_system("P33").matrix
        assert np.array_equal(P @ P, [[1, 0, 0], [0, 1, 0], [0.5, 0.25, 0.25]])

    def test_swap_squared(self):
        S = catalog.swap().matrix
        assert np.array_equal(S @ S, np.eye(2))

    def test_errors(self):
        with pytest.raises(KeyError):
            catalog.named_system("T99")
        with pytest.raises(ValueError):
            catalog.named_system("P33", 0.5, 0.6)
        with pytest.raises(ValueError):
            catalog.named_system("P33", 0.0, 1.0)

    @pytest.mark.parametrize("profile", catalog.PROFILES)
    def test_random_reproducible_and_stochastic(self, profile):
        for d in range(1, 7):
            a = catalog.random_system(d, 5, profile).matrix
            b = catalog.random_system(d, 5, profile).matrix
            assert np.array_equal(a, b)
            assert np.all(a >= 0) and np.allclose(a.sum(axis=1), 1, atol=1e-12)

    def test_generic_weak_mixing(self):
        for seed in range(20):
            s = catalog.random_system(3, seed, "generic")
            assert np.all(s.matrix > 0)
            assert sy.classify_system(s).unique_E_weak_mixing

    def test_periodic_not_weak_mixing(self):
        for seed in range(20):
            s = catalog.random_system(4, seed, "periodic")
            assert not sy.classify_system(s).unique_E_weak_mixing

    def test_d_cycle(self):
        d = 5
        cycle = np.roll(np.eye(d), 1, axis=1)
        m = sy.classify_system(sy.DynSystem.from_matrix(cycle))
        assert not m.unique_E_weak_mixing
        assert len(m.peripheral_eigenvalues) == d

    def test_reducible_block_triangular(self):
        for seed in range(10):
            M = catalog.random_system(5, seed, "reducible").matrix
            closed = sy.state_set_probe(sy.DynSystem.from_matrix(M)).closed_classes
            top = min(min(c) for c in closed)
            assert top >= 1 and np.all(M[top:, :top] == 0)


class TestRegistry:
    def test_every_entry_builds(self):
        for name, entry in catalog.CATALOG.items():
            obj = entry.build()
            assert entry.locator
            if entry.kind == "sequence":
                n = min(obj.horizon, 2000)
                assert np.all(obj.space.norm(obj.terms(n)) <= obj.bound * (1 + 1e-12))
            elif entry.kind == "system":
                M = obj.matrix
                assert np.array_equal(sy.validate_ucp(M).matrix, M)
            else:
                assert len(obj) == 2

    def test_overrides(self):
        assert catalog.get("block_counterexample").build(J=3).horizon == 4
        with pytest.raises(KeyError):
            catalog.get("swap").build(J=3)

    def test_unknown_name(self):
        with pytest.raises(KeyError, match="known"):
            catalog.get("nope")
