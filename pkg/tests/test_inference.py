from __future__ import annotations

import numpy as np
import pytest

from turningpoint.errors import ContractError
from turningpoint.models.inference import infer_scene_tps, infer_synopsis_tps, neighborhood
from turningpoint.supervision import TpStats, theory_stats, window_indices


def stats_of(mu, sigma) -> TpStats:
    return TpStats(mu=tuple(mu), sigma=tuple(sigma))


def random_sane_stats(rng) -> TpStats:
    """Quintile-separated means with moderate spread: windows are ordered."""
    mu = tuple((t + 0.5) / 5 + rng.uniform(-0.05, 0.05) for t in range(5))
    sigma = tuple(rng.uniform(0.0, 0.1) for _ in range(5))
    return stats_of(mu, sigma)


def greedy_oracle(probs: np.ndarray, stats: TpStats) -> list[int]:
    """Straight transcription of the selection rules: per TP in order, the
    in-window argmax (ties to the lowest index) skipping already-taken
    indices; the result sorted."""
    n = len(probs)
    taken: list[int] = []
    for tp in range(5):
        window = window_indices(n, stats, tp)
        free = [i for i in window if i not in taken]
        pool = free if free else [i for i in range(n) if i not in taken]
        best = max(pool, key=lambda i: (probs[i], -i))
        taken.append(best)
    return sorted(taken)


class TestInferSynopsisTps:
    def test_uniform_probs_take_first_in_window_index(self):
        stats = stats_of([0.1, 0.3, 0.5, 0.7, 0.9], [0.05] * 5)
        probs = np.full(20, 0.5)
        picked = infer_synopsis_tps(probs, stats)
        expected = [min(window_indices(20, stats, tp)) for tp in range(5)]
        assert picked == expected

    def test_single_spike_inside_tp3_window(self):
        stats = stats_of([0.1, 0.3, 0.5, 0.7, 0.9], [0.04] * 5)
        probs = np.zeros(30)
        probs[15] = 1.0  # 15/30 = 0.5, inside TP3's window only
        picked = infer_synopsis_tps(probs, stats)
        assert picked[2] == 15
        for tp in (0, 1, 3, 4):
            window = window_indices(30, stats, tp)
            assert picked[tp] in window

    def test_overlapping_windows_shared_max_stay_distinct(self):
        # TP2 and TP3 windows overlap on indices 8..10 and share the maximum
        # at index 9.
        stats = stats_of([0.1, 0.42, 0.52, 0.75, 0.92], [0.03, 0.08, 0.07, 0.02, 0.02])
        probs = np.zeros(20)
        probs[9] = 1.0
        probs[[2, 15, 18]] = 0.6
        w2 = window_indices(20, stats, 1)
        w3 = window_indices(20, stats, 2)
        assert 9 in w2 and 9 in w3  # shared maximum really is shared
        picked = infer_synopsis_tps(probs, stats)
        assert len(set(picked)) == 5
        assert picked == greedy_oracle(probs, stats)
        assert picked[1] == 9  # earlier TP wins the shared max
        assert picked[2] in w3 and picked[2] != 9

    def test_matches_greedy_oracle_when_windows_are_rich(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            n = int(rng.integers(10, 60))
            stats = random_sane_stats(rng)
            probs = rng.random(n)
            got = infer_synopsis_tps(probs, stats)
            assert got == greedy_oracle(probs, stats)

    def test_exhausted_window_relocates_earlier_tp(self):
        # TP1's window swallows TP2's single-index window; the shared index
        # must go to TP2 and TP1 must step to its next-best in-window index.
        stats = stats_of([0.30, 0.40, 0.60, 0.80, 0.95], [0.12, 0.0, 0.02, 0.02, 0.02])
        probs = np.zeros(10)
        probs[4] = 1.0  # both TP1's argmax and TP2's only candidate
        w1 = window_indices(10, stats, 0)
        assert window_indices(10, stats, 1) == [4]
        assert 4 in w1 and len(w1) > 1
        picked = infer_synopsis_tps(probs, stats)
        assert picked[1] == 4
        assert picked[0] in w1 and picked[0] != 4

    def test_distinct_increasing_in_window_property(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            n = int(rng.integers(5, 80))
            stats = random_sane_stats(rng)
            probs = rng.random(n)
            picked = infer_synopsis_tps(probs, stats)
            assert len(picked) == 5
            assert len(set(picked)) == 5
            assert all(b > a for a, b in zip(picked, picked[1:]))
            assert all(0 <= i < n for i in picked)

    def test_too_short_synopsis_rejected(self):
        with pytest.raises(ContractError):
            infer_synopsis_tps(np.ones(4), theory_stats())


class TestInferSceneTps:
    def test_interior_peak(self):
        matrix = np.zeros((5, 100))
        for tp in range(5):
            matrix[tp, 7] = 1.0
        assert infer_scene_tps(matrix) == [frozenset({6, 7, 8})] * 5

    def test_boundary_peaks_shift_inward(self):
        matrix = np.zeros((5, 50))
        matrix[0, 0] = 1.0
        matrix[1, 49] = 1.0
        out = infer_scene_tps(matrix)
        assert out[0] == frozenset({0, 1, 2})
        assert out[1] == frozenset({47, 48, 49})

    def test_tiny_screenplay_returns_all(self):
        matrix = np.random.default_rng(0).uniform(size=(5, 2))
        assert infer_scene_tps(matrix) == [frozenset({0, 1})] * 5

    def test_tie_breaks_to_lowest_index(self):
        matrix = np.full((5, 10), 0.3)
        assert infer_scene_tps(matrix) == [frozenset({0, 1, 2})] * 5

    def test_contains_argmax_property(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            m = int(rng.integers(3, 40))
            matrix = rng.random((5, m))
            out = infer_scene_tps(matrix)
            for tp in range(5):
                assert len(out[tp]) == 3
                assert int(np.argmax(matrix[tp])) in out[tp]
                assert all(0 <= i < m for i in out[tp])

    def test_neighborhood_rules(self):
        assert neighborhood(7, 100) == frozenset({6, 7, 8})
        assert neighborhood(0, 100) == frozenset({0, 1, 2})
        assert neighborhood(99, 100) == frozenset({97, 98, 99})
        assert neighborhood(1, 2) == frozenset({0, 1})
