"""Builders, region tagging, validation, and the edge-list format."""

import math

import numpy as np
import pytest

from bottlewalk import graphs
from bottlewalk.errors import SizeBudgetError
from bottlewalk.graphs import (
    Marks,
    ParadigmParams,
    Region,
    build_paradigm1,
    build_paradigm2,
    build_paradigm3,
    graph_from_edges,
    schedule_value,
    validate_regions,
)


def adjacency(g):
    adj = {v: set() for v in range(g.n)}
    for u, v in g.edge_array():
        adj[int(u)].add(int(v))
        adj[int(v)].add(int(u))
    return adj


def reachable(adj, start, forbidden):
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen and w not in forbidden:
                seen.add(w)
                stack.append(w)
    return seen


def sizes_for(p: ParadigmParams) -> dict[int, int]:
    return {j: max(1, round(p.mass / p.n_j(j))) for j in p.tree_levels}


# ---------------------------------------------------------------------------
# small graphs
# ---------------------------------------------------------------------------


def test_path_shape():
    g = graphs.path_graph(5)
    assert g.n == 6
    deg = g.degrees
    assert deg[0] == deg[5] == 1
    assert all(deg[i] == 2 for i in range(1, 5))


def test_complete_and_cycle_shapes():
    k5 = graphs.complete_graph(5)
    assert k5.n == 5 and all(d == 4 for d in k5.degrees)
    c6 = graphs.cycle_graph(6)
    assert c6.n == 6 and all(d == 2 for d in c6.degrees)


def test_dumbbell_tagging():
    g = graphs.dumbbell_graph()
    assert g.n == 6
    assert validate_regions(g) == []
    assert g.marks.origin == 0 and g.marks.gateway == 2
    assert sorted(g.region_vertices(Region.FAR)) == [3, 4, 5]


# ---------------------------------------------------------------------------
# vertex-count formulas (independent closed forms)
# ---------------------------------------------------------------------------

P1_CASES = [
    ParadigmParams(k=2, growth="scaled", tree_mass=64),
    ParadigmParams(k=3, growth="scaled", tree_mass=63),
    ParadigmParams(k=2, growth=(3, 7), tree_mass=20),
    ParadigmParams(k=4, growth="scaled", tree_mass=16),
]

P2_CASES = [
    ParadigmParams(k=2, growth="scaled", copies=1),
    ParadigmParams(k=3, growth=(2, 3, 6), tree_mass=2, core_lines=8, copies=24, p_exp=0.135),
    ParadigmParams(k=2, growth="scaled", tree_mass=4, core_lines=3, copies=2, core_depth=7),
    ParadigmParams(k=4, growth="scaled", tree_mass=16, core_lines=1, copies=1, core_depth=80),
]

P3_CASES = [
    ParadigmParams(k=2, growth="scaled", copies=1, core_size=63),
    ParadigmParams(k=2, growth="scaled", copies=3, core_size=15),
    ParadigmParams(k=3, growth=(2, 4, 8), copies=2, core_size=31),
]


@pytest.mark.parametrize("p", P1_CASES)
def test_paradigm1_vertex_count(p):
    g = build_paradigm1(p)
    expected = p.mass + p.n_k + sum(sizes_for(p).values())
    assert g.n == expected
    assert validate_regions(g) == []


@pytest.mark.parametrize("p", P2_CASES)
def test_paradigm2_vertex_count(p):
    g = build_paradigm2(p)
    m = p.core_depth if p.core_depth is not None else max(1, round(math.sqrt(6.0 * p.mass * p.k)))
    expected = 2 + p.core_lines * (m - 1) + p.copies * (p.n_k + sum(sizes_for(p).values())) + 1
    assert g.n == expected
    assert validate_regions(g) == []


@pytest.mark.parametrize("p", P3_CASES)
def test_paradigm3_vertex_count(p):
    g = build_paradigm3(p)
    expected = p.core_size + p.copies * (p.n_k + sum(sizes_for(p).values())) + 1
    assert g.n == expected
    assert validate_regions(g) == []


def test_default_depth_rule_recorded():
    p = ParadigmParams(k=3, growth=(2, 3, 6), tree_mass=2, core_lines=8, copies=24)
    g = build_paradigm2(p)
    # 6*N*k = 36, so the rule depth is exactly 6
    assert g.meta["rules"]["depth_real"] == pytest.approx(6.0)
    assert g.meta["params"]["core_depth"] == 6


# ---------------------------------------------------------------------------
# separation structure
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def scaled_builds():
    return {
        1: build_paradigm1(ParadigmParams(k=3, growth="scaled", tree_mass=63)),
        2: build_paradigm2(ParadigmParams(k=2, growth="scaled", copies=1)),
        3: build_paradigm3(ParadigmParams(k=2, growth="scaled", copies=1, core_size=63)),
    }


@pytest.mark.parametrize("which", [1, 2, 3])
def test_neck_separates_core_from_far(scaled_builds, which):
    g = scaled_builds[which]
    adj = adjacency(g)
    neck = {int(v) for v in g.region_vertices(Region.NECK)}
    seen = reachable(adj, g.marks.origin, neck)
    far = {int(v) for v in g.region_vertices(Region.FAR)}
    assert not (seen & far)


@pytest.mark.parametrize("which", [2, 3])
def test_origin_cuts_off_far_side(scaled_builds, which):
    g = scaled_builds[which]
    adj = adjacency(g)
    core = [int(v) for v in g.region_vertices(Region.CORE) if v != g.marks.origin]
    seen = reachable(adj, core[0], {g.marks.origin})
    far = {int(v) for v in g.region_vertices(Region.FAR)}
    assert not (seen & far)


@pytest.mark.parametrize("which", [1, 2])
def test_gateway_sits_at_first_tree_distance(scaled_builds, which):
    g = scaled_builds[which]
    dist = graphs.distances_from(g, g.marks.origin)
    k = g.meta["params"]["k"]
    z = schedule_value("scaled", math.ceil(k / 2))
    assert int(dist[g.marks.gateway]) == z


# ---------------------------------------------------------------------------
# schedules and guards
# ---------------------------------------------------------------------------


def test_schedule_values():
    assert [schedule_value("scaled", j) for j in (1, 2, 3)] == [2, 4, 8]
    assert [schedule_value("doubling", j) for j in (1, 2, 3)] == [4, 16, 256]
    assert schedule_value((5, 9, 11), 2) == 9
    with pytest.raises(ValueError):
        schedule_value("cubed", 1)
    with pytest.raises(ValueError):
        ParadigmParams(k=3, growth=(4, 4, 8))


def test_doubling_budget_guard():
    # n_3 = 256 so the default mass 256^3 dwarfs any sane budget
    with pytest.raises(SizeBudgetError):
        build_paradigm1(ParadigmParams(k=3, growth="doubling"))


def test_parallel_edge_guard():
    with pytest.raises(ValueError):
        build_paradigm2(
            ParadigmParams(k=2, growth="scaled", tree_mass=4, core_lines=2,
                           copies=1, core_depth=1)
        )


# ---------------------------------------------------------------------------
# validation reports
# ---------------------------------------------------------------------------


def _tagged_triangle_chain():
    """0-1-2-3 path tagged CORE, NECK, FAR, FAR."""
    edges = [(0, 1), (1, 2), (2, 3)]
    region = [int(Region.CORE), int(Region.NECK), int(Region.FAR), int(Region.FAR)]
    marks = Marks(origin=0, gateway=1, far_start=2, boundary=frozenset([0]))
    return graph_from_edges(4, edges, region=region, marks=marks)


def test_valid_chain_passes():
    assert validate_regions(_tagged_triangle_chain()) == []


def test_gateway_without_far_neighbor():
    edges = [(0, 1), (1, 2), (2, 3)]
    region = [int(Region.CORE), int(Region.NECK), int(Region.NECK), int(Region.FAR)]
    marks = Marks(origin=0, gateway=1, far_start=3, boundary=frozenset([0]))
    g = graph_from_edges(4, edges, region=region, marks=marks)
    problems = validate_regions(g)
    assert any("gateway" in p and "far" in p for p in problems)


def test_empty_far_region_reported():
    edges = [(0, 1), (1, 2), (2, 3)]
    region = [int(Region.CORE), int(Region.NECK), int(Region.NECK), int(Region.CORE)]
    marks = Marks(origin=0, gateway=1, far_start=2, boundary=frozenset([0]))
    g = graph_from_edges(4, edges, region=region, marks=marks)
    problems = validate_regions(g)
    assert any("S is empty" in p for p in problems)


def test_boundary_outside_core_reported():
    edges = [(0, 1), (1, 2), (2, 3)]
    region = [int(Region.CORE), int(Region.NECK), int(Region.FAR), int(Region.FAR)]
    marks = Marks(origin=0, gateway=1, far_start=2, boundary=frozenset([3]))
    g = graph_from_edges(4, edges, region=region, marks=marks)
    problems = validate_regions(g)
    assert any("boundary" in p for p in problems)


def test_non_separating_neck_reported():
    # extra core-far edge bypasses the neck
    edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
    region = [int(Region.CORE), int(Region.NECK), int(Region.FAR), int(Region.FAR)]
    marks = Marks(origin=0, gateway=1, far_start=2, boundary=frozenset([0]))
    g = graph_from_edges(4, edges, region=region, marks=marks)
    problems = validate_regions(g)
    assert any("separat" in p for p in problems)


def test_disconnected_reported():
    g = graph_from_edges(4, [(0, 1), (2, 3)])
    assert any("connected" in p for p in validate_regions(g))


# ---------------------------------------------------------------------------
# export / import round trip
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("which", ["dumbbell", "p2"])
def test_sidecar_roundtrip(tmp_path, scaled_builds, which):
    g = graphs.dumbbell_graph() if which == "dumbbell" else scaled_builds[2]
    edge_path = tmp_path / "edges.txt"
    sidecar = tmp_path / "regions.txt"
    graphs.write_edge_list(g, edge_path)
    graphs.write_region_sidecar(g, sidecar)
    back = graphs.read_graph(edge_path, sidecar)
    assert back.n == g.n
    assert sorted(map(tuple, back.edge_array().tolist())) == sorted(
        map(tuple, g.edge_array().tolist())
    )
    assert np.array_equal(back.region, g.region)
    assert np.array_equal(back.subtree, g.subtree)
    assert back.marks == g.marks


def test_edge_list_only_roundtrip(tmp_path):
    g = graphs.path_graph(4)
    edge_path = tmp_path / "edges.txt"
    graphs.write_edge_list(g, edge_path)
    back = graphs.read_graph(edge_path)
    assert back.n == g.n and back.marks is None
