from __future__ import annotations

import json
import math
import random

import pytest

from patrolsim.roadmap import (
    ChainRoadmap,
    MetricViolation,
    Roadmap,
    RoadmapError,
    RoadmapPoint,
    TreeRoadmap,
    dump_roadmap,
    load_roadmap,
)

from conftest import brute_shortest_path, random_metric_roadmap


def unit_triangle() -> Roadmap:
    return Roadmap(
        ["a", "b", "c"],
        [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)],
    )


class TestLoading:
    def test_chain_document(self):
        g = load_roadmap({"kind": "chain", "coordinates": [0, 1, 3, 6]})
        assert isinstance(g, ChainRoadmap)
        assert g.n == 4
        assert g.coordinates == (0.0, 1.0, 3.0, 6.0)

    def test_triangle_document(self):
        doc = unit_triangle().to_document()
        g = load_roadmap(doc)
        assert isinstance(g, Roadmap) and not isinstance(g, TreeRoadmap)
        assert g.n == 3

    def test_star_is_tree(self):
        doc = {
            "kind": "tree",
            "vertices": [{"id": v} for v in ["c", "a", "b", "d"]],
            "edges": [
                {"u": "c", "v": "a", "length": 1.0},
                {"u": "c", "v": "b", "length": 1.0},
                {"u": "c", "v": "d", "length": 1.0},
            ],
        }
        g = load_roadmap(doc)
        assert isinstance(g, TreeRoadmap)
        assert len(g.edges) == g.n - 1 == 3

    def test_round_trip_bit_exact(self, tmp_path, rng):
        g = random_metric_roadmap(rng)
        path = tmp_path / "g.json"
        dump_roadmap(g, path)
        g2 = load_roadmap(path)
        assert g2.ids == g.ids
        assert g2.edges == g.edges  # lengths compare bit-exactly
        path2 = tmp_path / "g2.json"
        dump_roadmap(g2, path2)
        assert path.read_text() == path2.read_text()

    def test_parse_errors(self):
        with pytest.raises(RoadmapError):
            load_roadmap({"kind": "chain", "coordinates": [0.0]})
        with pytest.raises(RoadmapError):
            load_roadmap({"kind": "blob", "vertices": [], "edges": []})
        with pytest.raises(RoadmapError):
            load_roadmap({"kind": "chain", "coordinates": [0, 1], "edges": [{}]})

    def test_disconnected_rejected(self):
        with pytest.raises(RoadmapError, match="disconnected"):
            Roadmap(["a", "b", "c"], [("a", "b", 1.0)])

    def test_nonpositive_length_rejected(self):
        with pytest.raises(RoadmapError, match="non-positive"):
            Roadmap(["a", "b"], [("a", "b", 0.0)])

    def test_triangle_violation_reported_with_triple(self):
        with pytest.raises(MetricViolation) as err:
            Roadmap(
                ["a", "b", "c"],
                [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 5.0)],
            )
        assert err.value.triple == ("a", "c", 5.0)

    def test_triangle_violation_demotable_to_warning(self):
        with pytest.warns(UserWarning):
            g = Roadmap(
                ["a", "b", "c"],
                [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 5.0)],
                strict_metric=False,
            )
        assert g.n == 3


class TestDistances:
    def test_direct_edge(self):
        assert unit_triangle().distance("a", "b") == 1.0

    def test_chain_end_to_end(self):
        g = ChainRoadmap([0, 1, 3, 6])
        assert g.distance("v1", "v4") == 6.0

    def test_square_diagonal(self):
        g = Roadmap(
            ["a", "b", "c", "d"],
            [("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("d", "a", 1.0)],
        )
        # derived independently by brute-force path enumeration
        assert brute_shortest_path(g, "a", "c") == 2.0
        assert g.distance("a", "c") == 2.0

    def test_unknown_vertex(self):
        with pytest.raises(RoadmapError):
            unit_triangle().distance("a", "zz")

    def test_metric_axioms_exhaustive(self, rng):
        for _ in range(5):
            g = random_metric_roadmap(rng, n_lo=5, n_hi=12)
            assert g.n <= 20
            for u in g.ids:
                assert g.distance(u, u) == 0.0
                for v in g.ids:
                    assert g.distance(u, v) == g.distance(v, u)
                    if u != v:
                        assert g.distance(u, v) > 0.0
                    for w in g.ids:
                        assert g.distance(u, v) <= g.distance(u, w) + g.distance(w, v) + 1e-12

    def test_chain_agrees_with_general_representation(self, rng):
        coords = [0.0]
        for _ in range(9):
            coords.append(coords[-1] + rng.uniform(0.1, 5.0))
        chain = ChainRoadmap(coords)
        g = chain.as_roadmap()
        for u in chain.ids:
            for v in chain.ids:
                assert math.isclose(
                    chain.distance(u, v), g.distance(u, v), rel_tol=0, abs_tol=1e-9
                )


class TestEdgeRatio:
    def test_unit_triangle(self):
        assert unit_triangle().edge_length_ratio() == 1.0

    def test_two_edges(self):
        g = Roadmap(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 4.0)])
        assert g.edge_length_ratio() == 4.0

    def test_chain(self):
        assert ChainRoadmap([0, 1, 3, 6]).edge_length_ratio() == 3.0


class TestChainInvariants:
    def test_first_coordinate_pinned(self):
        with pytest.raises(RoadmapError):
            ChainRoadmap([1.0, 2.0])

    def test_strictly_increasing(self):
        with pytest.raises(RoadmapError):
            ChainRoadmap([0.0, 2.0, 2.0])


class TestRoadmapPoint:
    def test_endpoint_equals_vertex(self):
        p1 = RoadmapPoint("a", "b", 0.0, 1.0)
        p2 = RoadmapPoint("a", "c", 0.0, 2.0)
        assert p1 == p2  # both are the vertex a

    def test_orientation_canonical(self):
        p1 = RoadmapPoint("a", "b", 0.25, 1.0)
        p2 = RoadmapPoint("b", "a", 0.75, 1.0)
        assert p1 == p2

    def test_offset_bounds(self):
        with pytest.raises(RoadmapError):
            RoadmapPoint("a", "b", 1.5, 1.0)
