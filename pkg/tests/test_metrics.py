import numpy as np
import pytest
from oracles import oracle_average_precision, oracle_precision, oracle_recall

from icsecure.metrics import average_precision_at_k, precision_at_k, recall_at_k


class TestPrecision:
    def test_hit_at_one(self):
        assert precision_at_k(["a", "b", "c"], {"a"}, 1) == 1.0

    def test_two_of_three(self):
        assert precision_at_k(["b", "a", "c"], {"a", "c"}, 3) == pytest.approx(2 / 3)

    def test_empty_relevant_defined_zero(self):
        assert precision_at_k(["a", "b"], set(), 2) == 0.0

    def test_k_below_one_rejected(self):
        with pytest.raises(ValueError):
            precision_at_k(["a"], {"a"}, 0)

    def test_duplicate_ranking_rejected(self):
        with pytest.raises(ValueError):
            precision_at_k(["a", "a"], {"a"}, 1)


class TestRecall:
    def test_all_found_in_three(self):
        assert recall_at_k(["b", "a", "c"], {"a", "c"}, 3) == 1.0

    def test_full_list_recall_is_one(self):
        assert recall_at_k(["a", "b", "c"], {"b", "c"}, 3) == 1.0

    def test_miss(self):
        assert recall_at_k(["b", "c", "a"], {"a"}, 2) == 0.0

    def test_empty_relevant_is_one_with_warning(self):
        with pytest.warns(UserWarning):
            assert recall_at_k(["a"], set(), 1) == 1.0


class TestAveragePrecision:
    def test_ap1_equals_precision1(self):
        rng = np.random.default_rng(0)
        items = [f"i{j}" for j in range(8)]
        for _ in range(100):
            ranking = [items[i] for i in rng.permutation(8)]
            relevant = set(rng.choice(items, size=rng.integers(1, 4), replace=False))
            assert average_precision_at_k(ranking, relevant, 1) == precision_at_k(
                ranking, relevant, 1
            )

    def test_worked_example(self):
        # hits at positions 2 and 3: (1/2 + 2/3) / 2
        assert average_precision_at_k(["b", "a", "c"], {"a", "c"}, 3) == pytest.approx(7 / 12)

    def test_perfect_ranking(self):
        assert average_precision_at_k(["a", "c", "b"], {"a", "c"}, 3) == 1.0

    def test_empty_relevant_zero(self):
        assert average_precision_at_k(["a"], set(), 1) == 0.0


class TestAgainstOracle:
    def test_thousand_random_rankings(self):
        rng = np.random.default_rng(42)
        universe = [f"c{j}" for j in range(12)]
        for _ in range(1000):
            n = int(rng.integers(1, 13))
            ranking = [universe[i] for i in rng.permutation(12)[:n]]
            relevant = set(rng.choice(universe, size=rng.integers(1, 6), replace=False))
            k = int(rng.integers(1, 13))
            p = precision_at_k(ranking, relevant, k)
            r = recall_at_k(ranking, relevant, k)
            m = average_precision_at_k(ranking, relevant, k)
            assert p == oracle_precision(ranking, relevant, k)
            assert r == oracle_recall(ranking, relevant, k)
            assert m == pytest.approx(oracle_average_precision(ranking, relevant, k), abs=1e-15)
            # integer hit-count identity
            hits_p = p * k
            hits_r = r * len(relevant)
            assert hits_p == pytest.approx(round(hits_p), abs=1e-12)
            assert hits_p == pytest.approx(hits_r, abs=1e-12)

    def test_recall_nondecreasing_in_k(self):
        rng = np.random.default_rng(7)
        universe = [f"c{j}" for j in range(10)]
        for _ in range(200):
            ranking = [universe[i] for i in rng.permutation(10)]
            relevant = set(rng.choice(universe, size=rng.integers(1, 5), replace=False))
            values = [recall_at_k(ranking, relevant, k) for k in range(1, 11)]
            assert all(a <= b for a, b in zip(values, values[1:]))
            assert values[-1] == 1.0
