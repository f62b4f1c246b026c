import math

import pytest
from hypothesis import given, strategies as st

from cobalt.build import (
    build_layer_graph,
    build_network,
    extend_mln,
    inter_layer_weight,
    intra_layer_weight,
    normalize_layer,
)
from cobalt.model import (
    DegenerateLayerError,
    InsufficientDataError,
    NodeRef,
    ScoreTable,
)

finite_scores = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def table_of(columns: dict[str, list[float | None]]) -> ScoreTable:
    n = max(len(v) for v in columns.values())
    entities = tuple(f"e{i}" for i in range(n))
    scores = {}
    for layer, values in columns.items():
        for i, v in enumerate(values):
            if v is not None:
                scores[(entities[i], layer)] = float(v)
    return ScoreTable(entities, tuple(columns), scores)


class TestNormalizeLayer:
    def test_one_two_three(self):
        # population sigma of [1,2,3] is sqrt(2/3)
        norm = normalize_layer(table_of({"A": [1.0, 2.0, 3.0]}), "A")
        expected = math.sqrt(3.0 / 2.0)
        assert norm.values["e0"] == pytest.approx(-expected, abs=1e-12)
        assert norm.values["e1"] == pytest.approx(0.0, abs=1e-12)
        assert norm.values["e2"] == pytest.approx(expected, abs=1e-12)

    def test_constant_column_degenerate(self):
        with pytest.raises(DegenerateLayerError):
            normalize_layer(table_of({"A": [5.0, 5.0, 5.0]}), "A")

    def test_single_present_score_insufficient(self):
        with pytest.raises(InsufficientDataError):
            normalize_layer(table_of({"A": [1.0, None, None]}), "A")

    def test_symmetric_pair(self):
        norm = normalize_layer(table_of({"A": [-4.0, 4.0]}), "A")
        assert norm.values["e0"] == pytest.approx(-1.0)
        assert norm.values["e1"] == pytest.approx(1.0)

    def test_moments_of_output(self):
        norm = normalize_layer(table_of({"A": [3.0, 9.5, -2.0, 7.25, 0.5]}), "A")
        values = list(norm.values.values())
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        assert mean == pytest.approx(0.0, abs=1e-9)
        assert math.sqrt(var) == pytest.approx(1.0, abs=1e-9)

    def test_skips_missing_cells(self):
        norm = normalize_layer(table_of({"A": [1.0, None, 3.0]}), "A")
        assert set(norm.values) == {"e0", "e2"}


class TestEdgeWeights:
    def test_half_difference(self):
        assert intra_layer_weight(0.25, 0.75) == pytest.approx(2.0)

    def test_unit_difference(self):
        assert intra_layer_weight(1.0, 2.0) == pytest.approx(1.0)

    def test_zero_difference_clamped(self):
        assert intra_layer_weight(0.3, 0.3) == pytest.approx(1e9)

    def test_inter_matches_intra_formula(self):
        assert inter_layer_weight(0.2, 0.7) == pytest.approx(2.0)
        assert inter_layer_weight(1.0, 1.0) == pytest.approx(1e9)
        assert inter_layer_weight(0.0, 4.0) == pytest.approx(0.25)

    @given(finite_scores, finite_scores)
    def test_swap_invariance(self, a, b):
        assert intra_layer_weight(a, b) == intra_layer_weight(b, a)

    @given(finite_scores, st.floats(0, 1e6), st.floats(0, 1e6))
    def test_monotone_in_distance(self, s, d1, d2):
        lo, hi = sorted((d1, d2))
        assert intra_layer_weight(s, s + hi) <= intra_layer_weight(s, s + lo)

    @given(finite_scores, finite_scores)
    def test_weight_positive(self, a, b):
        assert intra_layer_weight(a, b) > 0


class TestBuildLayerGraph:
    def test_complete_edge_count(self):
        graph = build_layer_graph(table_of({"A": [1.0, 2.0, 4.0, 8.0, 9.0]}), "A")
        assert len(graph.intra_edges) == math.comb(5, 2)

    def test_two_entities_single_edge(self):
        graph = build_layer_graph(table_of({"A": [1.0, 2.0]}), "A")
        assert len(graph.intra_edges) == 1

    def test_weights_positive(self):
        graph = build_layer_graph(table_of({"A": [1.0, 2.0, 4.0]}), "A")
        assert all(w > 0 for w in graph.intra_edges.values())

    def test_missing_entities_excluded(self):
        graph = build_layer_graph(table_of({"A": [1.0, None, 3.0, 5.0]}), "A")
        assert NodeRef("e1", "A") not in graph.nodes
        assert len(graph.intra_edges) == math.comb(3, 2)

    def test_weight_values_match_normalized_reciprocal(self):
        table = table_of({"A": [1.0, 2.0, 3.0]})
        norm = normalize_layer(table, "A")
        graph = build_layer_graph(table, "A")
        a, b = NodeRef("e0", "A"), NodeRef("e1", "A")
        expected = 1.0 / abs(norm.values["e0"] - norm.values["e1"])
        assert graph.intra_edges[(a, b)] == pytest.approx(expected)


class TestExtendMln:
    def test_base_case_single_layer(self):
        table = table_of({"A": [1.0, 2.0, 3.0], "B": [2.0, 1.0, 5.0]})
        base = build_layer_graph(table, "A")
        assert not base.inter_edges

    def test_shared_entities_one_coupling_each(self):
        table = table_of({"A": [1.0, 2.0, 3.0, None], "B": [2.0, 1.0, None, 4.0]})
        net = extend_mln(build_layer_graph(table, "A"), table, "B")
        # shared entities are e0, e1
        assert len(net.inter_edges) == 2
        for (a, b) in net.inter_edges:
            assert a.entity == b.entity

    def test_three_layers_all_pairs_for_full_entity(self):
        table = table_of(
            {"A": [1.0, 2.0, 3.0], "B": [2.0, 1.0, 5.0], "C": [0.0, 7.0, 1.0]}
        )
        net = build_layer_graph(table, "A")
        net = extend_mln(net, table, "B")
        net = extend_mln(net, table, "C")
        per_entity = {}
        for (a, b) in net.inter_edges:
            per_entity[a.entity] = per_entity.get(a.entity, 0) + 1
        # every entity present in all 3 layers: C(3,2) couplings each
        assert per_entity == {"e0": 3, "e1": 3, "e2": 3}

    def test_inter_edge_count_is_sum_of_shared(self):
        table = table_of(
            {
                "A": [1.0, 2.0, 3.0, 4.0, None],
                "B": [2.0, 1.0, None, None, 5.0],
                "C": [0.0, None, 1.0, 2.0, 3.0],
            }
        )
        net = build_layer_graph(table, "A")
        net = extend_mln(net, table, "B")
        before = len(net.inter_edges)
        net = extend_mln(net, table, "C")
        shared_with_a = {"e0", "e2", "e3"}
        shared_with_b = {"e0", "e4"}
        assert len(net.inter_edges) - before == len(shared_with_a) + len(shared_with_b)

    def test_duplicate_layer_rejected(self):
        table = table_of({"A": [1.0, 2.0], "B": [3.0, 1.0]})
        net = build_layer_graph(table, "A")
        with pytest.raises(ValueError, match="already in network"):
            extend_mln(net, table, "A")

    def test_build_network_equals_chained_extend(self):
        table = table_of(
            {"A": [1.0, 2.0, 3.0], "B": [2.0, 1.0, 5.0], "C": [0.0, 7.0, None]}
        )
        chained = build_layer_graph(table, "A")
        chained = extend_mln(chained, table, "B")
        chained = extend_mln(chained, table, "C")
        direct = build_network(table)
        assert direct.nodes == chained.nodes
        assert direct.intra_edges == chained.intra_edges
        assert direct.inter_edges == chained.inter_edges
