import math
import warnings

import numpy as np
import pytest

from graphmark import (
    ConstantResample,
    Graph,
    KeygenInfeasibleError,
    MarkKey,
    MatchingFailure,
    ModelResample,
    ValidationError,
    WatermarkId,
    approximate_isomorphism,
    build_graph,
    derive_constants,
    er_thresholds,
    flip_edge,
    hamming,
    identify,
    identity_distances,
    keygen,
    label,
    mark,
    plg_thresholds,
    sample_power_law,
)
from graphmark.models import ErdosRenyiParams


def quiet_params(n, m, w, gamma):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return derive_constants(n, m, w, gamma)


class TestKeygen:
    def test_forced_single_pair(self):
        key = keygen(1, 2, 2, 1, seed=0)
        assert key.pairs == ((1, 2),)

    def test_infeasible_matching(self):
        with pytest.raises(KeygenInfeasibleError, match="capacity"):
            keygen(2, 3, 3, 1, seed=0)

    def test_perfect_matching_at_reference_scale(self):
        # x = 64 + 374 rankable vertices, key half that size, t = 1.
        key = keygen(219, 10000, 438, 1, seed=5)
        endpoints = [e for pair in key.pairs for e in pair]
        assert len(endpoints) == 438
        assert len(set(endpoints)) == 438

    def test_cap_respected_for_t2(self):
        key = keygen(9, 100, 9, 2, seed=3)
        usage = {}
        for u, v in key.pairs:
            for e in (u, v):
                usage[e] = usage.get(e, 0) + 1
        assert max(usage.values()) <= 2
        assert len(set(key.pairs)) == 9

    def test_deterministic(self):
        assert keygen(10, 50, 30, 1, seed=4) == keygen(10, 50, 30, 1, seed=4)
        assert keygen(10, 50, 30, 1, seed=4) != keygen(10, 50, 30, 1, seed=5)

    def test_too_many_distinct_pairs(self):
        with pytest.raises(KeygenInfeasibleError, match="distinct pairs"):
            keygen(7, 10, 4, 10, seed=0)


class TestMarkKeyType:
    def test_text_round_trip(self):
        key = keygen(6, 40, 20, 1, seed=9)
        assert MarkKey.from_text(key.to_text()) == key

    def test_validation(self):
        with pytest.raises(ValidationError, match="repeats"):
            MarkKey(ell=2, n=5, t=2, pairs=((1, 2), (1, 2)))
        with pytest.raises(ValidationError, match="more than t"):
            MarkKey(ell=2, n=5, t=1, pairs=((1, 2), (1, 3)))
        with pytest.raises(ValidationError, match="canonical"):
            MarkKey(ell=1, n=5, t=1, pairs=((3, 2),))


class TestHamming:
    def test_examples(self):
        assert hamming("0101", "0110") == 2
        assert hamming("1111", "0000") == 4
        assert hamming("1010", "1010") == 0

    def test_length_mismatch(self):
        with pytest.raises(ValidationError, match="mismatch"):
            hamming("01", "011")

    def test_id_validation(self):
        with pytest.raises(ValidationError):
            WatermarkId("01x")


def toy_graph_and_thresholds():
    # Degrees: 0 -> 4, 1 -> 3, then 3, 4, 5 at degree 2 with distinct high
    # adjacency vectors (11, 10, 01); vertex 2 stays unranked.
    g = build_graph(6, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 3), (1, 5), (4, 5)])
    th = er_thresholds(6, 0.5, h=2, medium=3)
    return g, th


class TestMark:
    def test_fixed_point_resampling(self):
        g, th = toy_graph_and_thresholds()
        labels = label(g, th, mode="strict")
        order = labels.mark_order()

        class Indicator:
            def bit_probability(self, u, v):
                return 1.0 if g.has_edge(order[u - 1], order[v - 1]) else 0.0

        key = keygen(2, 6, th.x, 1, seed=1)
        copy = mark(key, g, labels, seed=3, resample=Indicator())
        assert copy.graph == g
        assert copy.flips == 0

    def test_forced_bit_sets_edge(self):
        g, th = toy_graph_and_thresholds()
        labels = label(g, th, mode="strict")
        key = MarkKey(ell=1, n=6, t=1, pairs=((1, 2),))
        copy = mark(key, g, labels, seed=0, resample=ConstantResample(1.0))
        order = labels.mark_order()
        assert copy.id.bits == "1"
        assert copy.graph.has_edge(order[0], order[1])

    def test_changes_confined_to_key_positions(self):
        g, th = toy_graph_and_thresholds()
        labels = label(g, th, mode="strict")
        key = keygen(2, 6, th.x, 1, seed=7)
        order = labels.mark_order()
        allowed = {
            tuple(sorted((order[u - 1], order[v - 1]))) for u, v in key.pairs
        }
        for seed in range(20):
            copy = mark(key, g, labels, seed=seed)
            diff = np.setxor1d(g.edge_keys, copy.graph.edge_keys)
            changed = {(int(k) // g.n, int(k) % g.n) for k in diff}
            assert changed <= allowed
            _, vertex = identity_distances(g, copy.graph)
            assert vertex <= key.t

    def test_flip_count_concentrates_at_half(self):
        p = quiet_params(2000, 300.0, 12.0, 2.75)
        g = sample_power_law(p, 3)
        th = plg_thresholds(p, h=16, medium=64)
        labels = label(g, th, mode="relaxed")
        key = keygen(40, 2000, th.x, 1, seed=2)
        sigma = math.sqrt(40 * 0.25)
        for seed in range(5):
            flips = mark(key, g, labels, seed=seed).flips
            assert abs(flips - 20) <= 3 * sigma

    def test_deterministic(self):
        g, th = toy_graph_and_thresholds()
        labels = label(g, th, mode="strict")
        key = keygen(2, 6, th.x, 1, seed=1)
        a = mark(key, g, labels, seed=11)
        b = mark(key, g, labels, seed=11)
        assert a.id == b.id and a.graph == b.graph

    def test_rank_out_of_range(self):
        g, th = toy_graph_and_thresholds()
        labels = label(g, th, mode="strict")
        key = MarkKey(ell=1, n=6, t=1, pairs=((1, 9),))
        with pytest.raises(ValidationError, match="rank"):
            mark(key, g, labels, seed=0)


class TestResampleSources:
    def test_er_source_is_flat(self):
        source = ModelResample(ErdosRenyiParams(100, 0.37))
        assert source.bit_probability(1, 2) == 0.37
        assert source.bit_probability(5, 90) == 0.37

    def test_plg_source_decreases_with_rank(self):
        p = quiet_params(10000, 1000.0, 20.0, 2.75)
        source = ModelResample(p)
        assert source.bit_probability(1, 2) >= source.bit_probability(1, 30)
        assert source.bit_probability(2, 10) == source.bit_probability(10, 2)


class TestApproximateIsomorphism:
    def test_identity_both_modes(self):
        g, th = toy_graph_and_thresholds()
        for mode in ("strict", "relaxed"):
            mapping = approximate_isomorphism(g, g, th, mode=mode)
            assert mapping == {v: v for v in mapping}
            assert len(mapping) == th.x

    def test_single_bit_perturbation_recovered(self):
        g, th = toy_graph_and_thresholds()
        # Flip a non-key pair touching medium vertex 4 and a non-labeled slot:
        # vectors stay within Hamming 1 of the originals, which are >= 2 apart
        # for the pair involved.
        h = flip_edge(g, (3, 5))
        mapping = approximate_isomorphism(g, h, th, mode="relaxed")
        assert {a: b for a, b in mapping.items() if a in (0, 1)} == {0: 0, 1: 1}

    def test_strict_duplicate_match_fails(self):
        # g mediums carry vectors 01 and 10; the suspect's mediums (00 and 11)
        # both sit at distance 1 from each, so both g mediums greedily pick
        # the suspect's first medium and strict matching must fail.
        g = build_graph(8, [(0, 3), (0, 4), (0, 5), (0, 6), (1, 2), (1, 4), (1, 7),
                            (2, 6), (3, 7)])
        th = er_thresholds(8, 0.5, h=2, medium=2)
        labels_g = label(g, th, mode="strict")
        assert sorted(m.bits for m in labels_g.medium) == [0b01, 0b10]
        h = build_graph(8, [(0, 3), (0, 4), (0, 5), (0, 6), (1, 3), (1, 4), (1, 7),
                            (2, 6), (2, 7)])
        labels_h = label(h, th, mode="strict")
        assert sorted(m.bits for m in labels_h.medium) == [0b00, 0b11]
        with pytest.raises(MatchingFailure, match="matched more than once"):
            approximate_isomorphism(g, h, th, mode="strict",
                                    labels_g=labels_g, labels_h=labels_h)


class TestIdentify:
    def test_round_trip_zero_noise(self):
        # Relaxed labeling of the marked copy can shuffle the medium boundary
        # (degrees there shift by up to t), so the extracted string may be a
        # few bits off; the matched id must still be the right one.
        p = quiet_params(1200, 200.0, 10.0, 2.75)
        th = plg_thresholds(p, h=8, medium=24)
        for seed in range(15):
            g = sample_power_law(p, seed)
            labels = label(g, th, mode="relaxed")
            key = keygen(16, p.n, th.x, 1, seed=seed)
            copies = [mark(key, g, labels, seed=100 * seed + i) for i in range(4)]
            result = identify(
                key, g, [c.id for c in copies], copies[2].graph, th,
                mode="relaxed", labels_g=labels,
            )
            assert result.matched_index == 2
            assert result.distance <= key.ell // 4

    def test_strict_round_trip_when_labeling_survives(self):
        # Whenever the marked copy still labels strictly with the same rank
        # order (marking can shuffle the medium boundary, which shows up as a
        # labeling failure or a changed order), extraction is bit exact.
        from graphmark.errors import LabelingFailure

        p = quiet_params(1200, 200.0, 10.0, 2.75)
        th = plg_thresholds(p, h=6, medium=6)
        exact = attempted = 0
        for seed in range(60):
            g = sample_power_law(p, seed)
            try:
                labels = label(g, th, mode="strict")
            except LabelingFailure:
                continue
            key = keygen(6, p.n, th.x, 1, seed=seed)
            copy = mark(key, g, labels, seed=seed + 1000)
            attempted += 1
            result = identify(key, g, [copy.id], copy.graph, th,
                              mode="strict", labels_g=labels)
            if result.bottom:
                continue
            assert result.matched_index == 0
            try:
                labels_h = label(copy.graph, th, mode="strict")
            except LabelingFailure:
                continue
            if labels_h.mark_order() == labels.mark_order():
                assert result.distance == 0
                exact += 1
        assert attempted >= 10
        assert exact >= 5

    def test_single_candidate_always_closest(self):
        g, th = toy_graph_and_thresholds()
        labels = label(g, th, mode="strict")
        key = keygen(2, 6, th.x, 1, seed=1)
        copy = mark(key, g, labels, seed=0)
        flipped = copy.graph.toggle_pairs(
            [(labels.mark_order()[u - 1], labels.mark_order()[v - 1]) for u, v in key.pairs]
        )
        result = identify(key, g, [copy.id], flipped, th, mode="relaxed", labels_g=labels)
        # The sole candidate is returned however corrupted the extraction is.
        assert result.matched_index == 0
        assert result.distance >= 1

    def test_corrupted_bits_still_identified(self):
        p = quiet_params(2000, 300.0, 12.0, 2.75)
        th = plg_thresholds(p, h=16, medium=64)
        g = sample_power_law(p, 1)
        labels = label(g, th, mode="relaxed")
        key = keygen(40, p.n, th.x, 1, seed=1)
        copies = [mark(key, g, labels, seed=i) for i in range(10)]
        order = labels.mark_order()
        # Corrupt 4 of the 40 key positions of copy 6.
        corrupt = [
            (order[u - 1], order[v - 1]) for u, v in key.pairs[:4]
        ]
        suspect = copies[6].graph.toggle_pairs(corrupt)
        result = identify(key, g, [c.id for c in copies], suspect, th,
                          mode="relaxed", labels_g=labels)
        assert result.matched_index == 6
        assert result.distance <= 4

    def test_tie_break_prefers_lowest_index(self):
        g, th = toy_graph_and_thresholds()
        labels = label(g, th, mode="strict")
        # Force bits onto already-present edges so the copy equals g and the
        # extraction is exactly "11"; both candidates are at distance 1.
        key = MarkKey(ell=2, n=6, t=1, pairs=((1, 2), (3, 4)))
        copy = mark(key, g, labels, seed=4, resample=ConstantResample(1.0))
        assert copy.graph == g and copy.id.bits == "11"
        result = identify(key, g, [WatermarkId("10"), WatermarkId("01")],
                          copy.graph, th, mode="strict", labels_g=labels)
        assert result.matched_index == 0
        assert result.distance == 1

    def test_size_mismatch_is_bottom(self):
        g, th = toy_graph_and_thresholds()
        key = keygen(2, 6, th.x, 1, seed=1)
        result = identify(key, g, [WatermarkId("00")], Graph.empty(7), th)
        assert result.bottom and result.failure == "size-mismatch"

    def test_strict_label_failure_is_bottom(self):
        th = er_thresholds(5, 0.5, h=1, medium=4)
        star = build_graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        key = keygen(2, 5, 5, 1, seed=0)
        result = identify(key, star, [WatermarkId("00")], star, th, mode="strict")
        assert result.bottom and "collision" in result.failure

    def test_max_distance_cutoff(self):
        g, th = toy_graph_and_thresholds()
        labels = label(g, th, mode="strict")
        key = MarkKey(ell=2, n=6, t=1, pairs=((1, 2), (3, 4)))
        copy = mark(key, g, labels, seed=0, resample=ConstantResample(1.0))
        result = identify(key, g, [WatermarkId("00")], copy.graph, th,
                          mode="strict", labels_g=labels, max_distance=1)
        assert result.bottom and result.failure == "beyond-max-distance"
        assert result.distance == 2

    def test_input_validation(self):
        g, th = toy_graph_and_thresholds()
        key = keygen(2, 6, th.x, 1, seed=1)
        with pytest.raises(ValidationError, match="at least one"):
            identify(key, g, [], g, th)
        with pytest.raises(ValidationError, match="key length"):
            identify(key, g, [WatermarkId("0")], g, th)
