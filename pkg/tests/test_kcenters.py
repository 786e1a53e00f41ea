import itertools

import numpy as np
import pytest

from svp.kcenters import greedy_kcenters, kcenter_radius, kcenters_full_ranking, write_order_csv
from svp.rng import SplitMix64


def brute_force_steps(x, initial, budget):
    """Independent re-evaluation of argmax-min at every step, full pairwise."""
    chosen = list(initial)
    order = []
    for _ in range(budget):
        best_i, best_d = None, -1.0
        for i in range(x.shape[0]):
            if i in chosen or i in order:
                continue
            d = min(np.linalg.norm(x[i] - x[j]) for j in chosen + order)
            if d > best_d:
                best_i, best_d = i, d
        order.append(best_i)
    return order


class TestExamples:
    def test_line_points(self):
        x = np.array([[0.0], [1.0], [10.0]])
        res = greedy_kcenters(x, [0], 2)
        assert res.order.tolist() == [2, 1]
        assert res.picked_dists.tolist() == [10.0, 1.0]

    def test_zero_budget(self):
        x = np.array([[0.0], [1.0]])
        assert greedy_kcenters(x, [0], 0).order.tolist() == []

    def test_all_identical_ties_by_index(self):
        x = np.zeros((4, 3))
        assert greedy_kcenters(x, [0], 2).order.tolist() == [1, 2]

    def test_radius_examples(self):
        x = np.array([[0.0], [1.0], [10.0]])
        assert kcenter_radius(x, [0, 1, 2]) == 0.0
        assert kcenter_radius(x, [0]) == 10.0
        assert kcenter_radius(x, [0, 2]) == 1.0

    def test_full_ranking(self):
        x = np.array([[0.0], [1.0], [10.0]])
        assert kcenters_full_ranking(x, [0]).tolist() == [2, 1]
        assert kcenters_full_ranking(x, [0, 1, 2]).tolist() == []

    def test_full_ranking_is_permutation_of_rest(self):
        rng = SplitMix64(15)
        x = rng.normals((30, 4))
        order = kcenters_full_ranking(x, [3, 7])
        assert sorted(order.tolist()) == [i for i in range(30) if i not in (3, 7)]


class TestOracleEquivalence:
    def test_random_instances_match_brute_force(self):
        rng = SplitMix64(1001)
        for _ in range(50):
            n = 2 + rng.next_below(30)
            d = 1 + rng.next_below(6)
            x = rng.normals((n, d))
            initial = [rng.next_below(n)]
            budget = rng.next_below(min(10, n - 1) + 1)
            res = greedy_kcenters(x, initial, budget)
            assert res.order.tolist() == brute_force_steps(x, initial, budget)

    def test_final_min_dists_match_direct_evaluation(self):
        rng = SplitMix64(77)
        x = rng.normals((25, 3))
        res = greedy_kcenters(x, [0, 5], 6)
        centers = [0, 5] + res.order.tolist()
        expected = np.array([min(np.linalg.norm(x[i] - x[j]) for j in centers) for i in range(25)])
        np.testing.assert_allclose(res.min_dists, expected, rtol=1e-12, atol=1e-12)


class TestApproximationAndInvariances:
    def test_two_approximation_small(self):
        rng = SplitMix64(2002)
        for _ in range(25):
            n = 5 + rng.next_below(6)
            x = rng.normals((n, 2))
            budget = 1 + rng.next_below(3)
            start = int(np.argmin(x[:, 0]))
            res = greedy_kcenters(x, [start], budget)
            greedy_r = kcenter_radius(x, [start] + res.order.tolist())
            k = budget + 1
            opt = min(
                kcenter_radius(x, list(centers))
                for centers in itertools.combinations(range(n), k)
            )
            assert greedy_r <= 2.0 * opt + 1e-9

    def test_picked_dists_nonincreasing(self):
        rng = SplitMix64(31)
        x = rng.normals((40, 5))
        res = greedy_kcenters(x, [2], 20)
        assert (np.diff(res.picked_dists) <= 1e-12).all()

    def test_translation_invariance(self):
        rng = SplitMix64(8)
        x = rng.normals((30, 4))
        base = greedy_kcenters(x, [1], 10).order
        shifted = greedy_kcenters(x + 13.25, [1], 10).order
        assert np.array_equal(base, shifted)

    def test_rotation_invariance(self):
        rng = SplitMix64(9)
        x = rng.normals((30, 4))
        q, _ = np.linalg.qr(rng.normals((4, 4)))
        base = greedy_kcenters(x, [4], 10).order
        rotated = greedy_kcenters(x @ q, [4], 10).order
        assert np.array_equal(base, rotated)

    def test_positive_scaling_invariance(self):
        rng = SplitMix64(10)
        x = rng.normals((30, 4))
        base = greedy_kcenters(x, [0], 12)
        scaled = greedy_kcenters(2.5 * x, [0], 12)
        assert np.array_equal(base.order, scaled.order)
        np.testing.assert_allclose(scaled.picked_dists, 2.5 * base.picked_dists, rtol=1e-12)


class TestErrors:
    def test_rejections(self):
        x = np.zeros((4, 2))
        with pytest.raises(ValueError):
            greedy_kcenters(x, [], 1)
        with pytest.raises(ValueError):
            greedy_kcenters(x, [0, 0], 1)
        with pytest.raises(ValueError):
            greedy_kcenters(x, [4], 1)
        with pytest.raises(ValueError):
            greedy_kcenters(x, [0], 4)
        with pytest.raises(ValueError):
            greedy_kcenters(x, [0], -1)
        with pytest.raises(ValueError):
            kcenter_radius(x, [])
        with pytest.raises(ValueError):
            greedy_kcenters(np.zeros((0, 2)), [0], 0)
        with pytest.raises(ValueError):
            greedy_kcenters(np.array([[np.inf, 0.0]]), [0], 0)


class TestCsvExport:
    def test_golden_content(self, tmp_path):
        x = np.array([[0.0], [1.0], [10.0]])
        res = greedy_kcenters(x, [0], 2)
        path = str(tmp_path / "order.csv")
        write_order_csv(res, path)
        assert open(path).read() == "rank,example_id,min_dist\n1,2,10.0\n2,1,1.0\n"
