import math

import numpy as np
import pytest

from memspike.device import DeviceParams, dc_conduction_profile
from memspike.learnnet import (
    NoteGraph,
    Profile,
    generate,
    kl_divergence,
    seed_from_sequence,
    transition_distribution,
)


def device_profile(n=32):
    params = DeviceParams(r_on=100.0, r_off=1000.0)
    table = dc_conduction_profile(params, 1.0, 4.0, n)
    return Profile(table=tuple(table.tolist()), source_params=params)


@pytest.fixture(scope="module")
def profile():
    return device_profile()


class TestSeeding:
    def test_transition_counting(self, profile):
        g = seed_from_sequence([0, 1, 0, 1], 2, profile)
        assert g.counts[0, 1] == 2
        assert g.counts[1, 0] == 1

    def test_self_transitions_dropped(self, profile):
        g = seed_from_sequence([0, 0, 1], 2, profile)
        assert g.counts[0, 1] == 1
        assert g.counts.sum() == 1

    def test_empty_seed_flagged_uniform(self, profile):
        with pytest.warns(UserWarning, match="empty seed"):
            g = seed_from_sequence([], 4, profile)
        assert g.empty_seed
        w = g.weight_matrix()
        off = ~np.eye(4, dtype=bool)
        assert np.all(w[off] == g.epsilon)
        assert np.all(np.diag(w) == 0.0)

    def test_out_of_range_note_rejected(self, profile):
        with pytest.raises(ValueError):
            seed_from_sequence([0, 5], 2, profile)


class TestWeightInvariant:
    def test_weights_track_counts_exactly(self, profile):
        g = seed_from_sequence([0, 1, 2, 0, 1], 3, profile)
        table = profile.table
        k_max = len(table) - 1
        for a in range(3):
            for b in range(3):
                if a == b:
                    continue
                k = int(g.counts[a, b])
                expected = g.epsilon if k == 0 else table[min(k, k_max)]
                assert g.weight(a, b) == expected

    def test_invariant_survives_generation(self, profile):
        g = seed_from_sequence([0, 1, 2, 3, 0], 4, profile, rng_seed=5)
        generate(g, 500, 0)
        table = profile.table
        k_max = len(table) - 1
        for a in range(4):
            for b in range(4):
                if a == b:
                    continue
                k = int(g.counts[a, b])
                expected = g.epsilon if k == 0 else table[min(k, k_max)]
                assert g.weight(a, b) == expected

    def test_saturation_freezes_weight(self, profile):
        g = seed_from_sequence([0, 1], 2, profile)
        k_max = len(profile.table) - 1
        g.counts[0, 1] = k_max
        w_sat = g.weight(0, 1)
        g.counts[0, 1] = k_max + 500
        assert g.weight(0, 1) == w_sat

    def test_inverted_mode_floors_at_epsilon(self, profile):
        g = seed_from_sequence([0, 1], 2, profile, invert=True)
        # count 1 sits near the profile peak, so 1 - w is near zero
        assert g.weight(0, 1) == max(1.0 - profile.table[1], g.epsilon)
        g.counts[0, 1] = len(profile.table)
        tail = profile.table[-1]
        assert g.weight(0, 1) == max(1.0 - tail, g.epsilon)

    def test_outgoing_weight_always_positive(self, profile):
        g = seed_from_sequence([0, 1], 5, profile)
        w = g.weight_matrix()
        assert np.all(w.sum(axis=1) > 0.0)


class TestGenerate:
    def test_length_one_returns_start(self, profile):
        g = seed_from_sequence([0, 1], 2, profile)
        assert generate(g, 1, 1) == [1]

    def test_single_strong_edge_is_deterministic(self, profile):
        # with a tiny floor, the single seeded edge dominates every draw
        g = seed_from_sequence([0, 1], 2, profile, epsilon=1e-12)
        seq = generate(g, 9, 0)
        assert seq == [0, 1, 0, 1, 0, 1, 0, 1, 0]

    def test_fixed_seed_reproducible(self, profile):
        a = generate(seed_from_sequence([0, 1, 2], 3, profile, rng_seed=11), 200, 0)
        b = generate(seed_from_sequence([0, 1, 2], 3, profile, rng_seed=11), 200, 0)
        assert a == b

    def test_usage_counts_grow_with_walk(self, profile):
        g = seed_from_sequence([0, 1], 3, profile, rng_seed=2)
        before = g.counts.sum()
        generate(g, 100, 0)
        assert g.counts.sum() == before + 99

    def test_generated_resembles_seed(self, profile):
        # the walk should stay far closer to the seed's transition
        # statistics than a uniform walk would
        seed = [0, 2, 4, 5, 7, 5, 4, 2, 0, 2, 4, 7, 4, 2, 0, 4]
        n = 8
        seed_dist = transition_distribution(seed, n)
        uniform = np.full(n * (n - 1), 1.0 / (n * (n - 1)))
        wins = 0
        for trial_seed in range(20):
            g = seed_from_sequence(seed, n, profile, rng_seed=trial_seed)
            gen = generate(g, 1000, seed[0])
            gen_dist = transition_distribution(gen, n)
            if kl_divergence(gen_dist, seed_dist) < kl_divergence(uniform, seed_dist):
                wins += 1
        assert wins >= 18

    def test_bad_args_rejected(self, profile):
        g = seed_from_sequence([0, 1], 2, profile)
        with pytest.raises(ValueError):
            generate(g, 0, 0)
        with pytest.raises(ValueError):
            generate(g, 5, 2)


class TestKlDivergence:
    def test_identical_distributions(self):
        p = np.array([0.25, 0.75])
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-7)

    def test_analytic_value(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(
            math.log(2.0), abs=1e-7)

    def test_smoothing_keeps_it_finite(self):
        v = kl_divergence([0.5, 0.5], [1.0, 0.0])
        assert math.isfinite(v)
        assert v > 5.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            kl_divergence([0.5, 0.5], [1.0, 0.0, 0.0])


class TestProfileType:
    def test_requires_normalization(self):
        params = DeviceParams(r_on=100.0, r_off=1000.0)
        with pytest.raises(ValueError):
            Profile(table=(0.5, 0.4), source_params=params)
        with pytest.raises(ValueError):
            Profile(table=(1.0,), source_params=params)

    def test_round_trip(self, profile):
        assert Profile.from_dict(profile.to_dict()) == profile

    def test_graph_round_trip(self, profile):
        g = seed_from_sequence([0, 1, 2, 1], 3, profile, rng_seed=3)
        g2 = NoteGraph.from_dict(g.to_dict())
        assert np.array_equal(g2.counts, g.counts)
        assert g2.epsilon == g.epsilon
        assert g2.profile == g.profile
