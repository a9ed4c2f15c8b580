"""Region-tagged graphs and the three bottlenecked family builders.

A graph here is a plain undirected simple graph in CSR adjacency form,
optionally carrying a region tag per vertex:

* ``CORE`` -- the large part the walk equilibrates into,
* ``NECK`` -- the narrow passage between the core and the far part,
* ``FAR``  -- the slow part beyond the neck.

Tagged graphs also carry marked vertices: ``origin`` (the core vertex where
the bottleneck attaches), ``gateway`` (the bottleneck vertex where the far
part attaches), ``far_start`` (the canonical worst start inside the far
part), and ``boundary`` (the core vertices furthest from the origin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import (
    BottleneckNotSeparatingError,
    DisconnectedGraphError,
    MissingMarkError,
    SizeBudgetError,
)

DEFAULT_VERTEX_BUDGET = 50_000


class Region(IntEnum):
    CORE = 0
    NECK = 1
    FAR = 2


REGION_TOKENS = {Region.CORE: "CORE", Region.NECK: "NECK", Region.FAR: "FAR"}
TOKEN_REGIONS = {v: k for k, v in REGION_TOKENS.items()}


@dataclass(frozen=True)
class Marks:
    """Marked vertices of a tagged graph."""

    origin: int
    gateway: int
    far_start: int
    boundary: frozenset[int]


@dataclass
class RegionTaggedGraph:
    """Undirected simple graph with optional region structure.

    ``indptr``/``indices`` give CSR adjacency with sorted neighbor lists.
    ``region`` holds one Region code per vertex (all CORE for plain graphs).
    ``subtree`` maps each vertex to a hanging-tree id, or -1; details of each
    subtree (attach vertex, root, leaves) live in ``meta["subtrees"]``.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    region: np.ndarray
    subtree: np.ndarray
    marks: Marks | None = None
    case_kind: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        return int(self.indices.size) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def region_vertices(self, r: Region) -> np.ndarray:
        return np.flatnonzero(self.region == int(r))

    def adjacency(self) -> csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def edge_array(self) -> np.ndarray:
        """(m, 2) array of undirected edges with u < v, lexicographically sorted."""
        u = np.repeat(np.arange(self.n), self.degrees)
        v = self.indices
        keep = u < v
        return np.stack([u[keep], v[keep]], axis=1)


def graph_from_edges(
    n: int,
    edges: Iterable[tuple[int, int]],
    region: Sequence[int] | None = None,
    subtree: Sequence[int] | None = None,
    marks: Marks | None = None,
    case_kind: str | None = None,
    meta: dict | None = None,
) -> RegionTaggedGraph:
    """Build the CSR representation from an undirected edge list."""
    e = np.asarray(list(edges), dtype=np.int64)
    if e.size == 0:
        e = e.reshape(0, 2)
    if e.size and (e.min() < 0 or e.max() >= n):
        raise ValueError("edge endpoint out of range")
    if np.any(e[:, 0] == e[:, 1]):
        raise ValueError("self loops are not allowed")
    key = n * np.minimum(e[:, 0], e[:, 1]) + np.maximum(e[:, 0], e[:, 1])
    if np.unique(key).size != key.size:
        raise ValueError("duplicate edges are not allowed")

    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    order = np.lexsort((dst, src))
    indices = dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    reg = (
        np.zeros(n, dtype=np.int8)
        if region is None
        else np.asarray(region, dtype=np.int8)
    )
    sub = (
        np.full(n, -1, dtype=np.int32)
        if subtree is None
        else np.asarray(subtree, dtype=np.int32)
    )
    if reg.shape != (n,) or sub.shape != (n,):
        raise ValueError("region/subtree arrays must have one entry per vertex")
    return RegionTaggedGraph(
        n=n,
        indptr=indptr,
        indices=indices.astype(np.int64),
        region=reg,
        subtree=sub,
        marks=marks,
        case_kind=case_kind,
        meta=meta or {},
    )


def distances_from(g: RegionTaggedGraph, source: int) -> np.ndarray:
    """BFS distance from ``source`` to every vertex (-1 if unreachable)."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in g.neighbors(u):
                if dist[v] < 0:
                    dist[v] = d
                    nxt.append(int(v))
        frontier = nxt
    return dist


def is_connected(g: RegionTaggedGraph) -> bool:
    if g.n <= 1:
        return True
    ncomp, _ = connected_components(g.adjacency(), directed=False)
    return int(ncomp) == 1


def gateway_level(g: RegionTaggedGraph) -> np.ndarray:
    """All bottleneck vertices adjacent to the far region.

    With several glued copies the gateway mark names one representative;
    this derived set is the full interface the far part attaches through.
    """
    out = []
    for v in g.region_vertices(Region.NECK):
        if np.any(g.region[g.neighbors(v)] == int(Region.FAR)):
            out.append(int(v))
    if g.marks is not None and not out:
        out = [g.marks.gateway]
    return np.asarray(sorted(out), dtype=np.int64)


def validate_regions(g: RegionTaggedGraph) -> list[str]:
    """Return a list of invariant violations (empty means valid).

    Plain graphs (no marks) are only checked for connectivity.  Tagged
    graphs must have all three regions nonempty, marks in the right
    regions and on the right interfaces, and a bottleneck whose removal
    separates the core from the far region.
    """
    problems = []
    if not is_connected(g):
        problems.append("graph is not connected")
    if g.marks is None:
        return problems

    m = g.marks
    n_t0 = int(np.sum(g.region == int(Region.CORE)))
    n_b = int(np.sum(g.region == int(Region.NECK)))
    n_s = int(np.sum(g.region == int(Region.FAR)))
    if n_t0 == 0:
        problems.append("core region is empty")
    if n_b == 0:
        problems.append("bottleneck region is empty")
    if n_s == 0:
        problems.append("far region S is empty")

    def reg(v):
        return Region(int(g.region[v]))

    if reg(m.origin) != Region.CORE:
        problems.append("origin is not tagged CORE")
    elif not np.any(g.region[g.neighbors(m.origin)] == int(Region.NECK)):
        problems.append("origin has no bottleneck neighbor")
    if reg(m.gateway) != Region.NECK:
        problems.append("gateway is not tagged NECK")
    elif not np.any(g.region[g.neighbors(m.gateway)] == int(Region.FAR)):
        problems.append("gateway has no far-region neighbor")
    if reg(m.far_start) != Region.FAR:
        problems.append("far_start is not tagged FAR")
    if not m.boundary:
        problems.append("boundary set is empty")
    elif any(reg(v) != Region.CORE for v in m.boundary):
        problems.append("boundary contains vertices outside the core")

    if n_t0 and n_b and n_s and not problems:
        # the bottleneck must be a separator: no core vertex may reach the
        # far region once bottleneck vertices are removed
        keep = g.region != int(Region.NECK)
        sub_idx = np.flatnonzero(keep)
        relabel = -np.ones(g.n, dtype=np.int64)
        relabel[sub_idx] = np.arange(sub_idx.size)
        e = g.edge_array()
        ok = keep[e[:, 0]] & keep[e[:, 1]]
        adj = csr_matrix(
            (
                np.ones(2 * int(ok.sum())),
                (
                    np.concatenate([relabel[e[ok, 0]], relabel[e[ok, 1]]]),
                    np.concatenate([relabel[e[ok, 1]], relabel[e[ok, 0]]]),
                ),
            ),
            shape=(sub_idx.size, sub_idx.size),
        )
        src = relabel[m.origin]
        reach = breadth_first_order(adj, int(src), directed=False, return_predecessors=False)
        reached_regions = g.region[sub_idx[reach]]
        if np.any(reached_regions == int(Region.FAR)):
            problems.append("removing the neck does not separate the core from the far region")
    return problems


def check_valid(g: RegionTaggedGraph) -> RegionTaggedGraph:
    """Validate and raise a typed error on the first violation."""
    problems = validate_regions(g)
    if not problems:
        return g
    first = problems[0]
    if "not connected" in first:
        raise DisconnectedGraphError(first)
    if "separate" in first:
        raise BottleneckNotSeparatingError(first)
    raise MissingMarkError("; ".join(problems))


# ---------------------------------------------------------------------------
# growth schedules and parameter rules
# ---------------------------------------------------------------------------


def schedule_value(growth, j: int) -> int:
    """n_j for the given growth schedule.

    ``"scaled"`` uses n_j = 2**j (desk scale), ``"doubling"`` the doubly
    exponential n_j = 2**(2**j); a sequence gives n_1..n_k explicitly.
    """
    if isinstance(growth, str):
        if growth == "scaled":
            return 2**j
        if growth == "doubling":
            return 2 ** (2**j)
        raise ValueError(f"unknown growth schedule {growth!r}")
    seq = list(growth)
    if j < 1 or j > len(seq):
        raise ValueError(f"growth sequence has no entry for j={j}")
    return int(seq[j - 1])


@dataclass
class ParadigmParams:
    """Parameters shared by the three family builders.

    Any of ``core_depth`` (line length m), ``copies`` (r) and ``core_size``
    (M) may be left as None to be filled from the documented default rules;
    the raw rule values are recorded in the result's provenance metadata.
    """

    k: int
    growth: str | Sequence[int] = "doubling"
    tree_mass: int | None = None  # N, default n_k**3
    core_depth: int | None = None  # m
    core_lines: int = 1  # q
    copies: int | None = None  # r
    core_size: int | None = None  # paradigm 3 only
    s_exp: float = 1.0
    p_exp: float = 0.25
    t_exp: float = 1.0
    vertex_budget: int = DEFAULT_VERTEX_BUDGET

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0 < self.p_exp < 0.5):
            raise ValueError("p_exp must lie in (0, 1/2)")
        if not (0 < self.t_exp <= self.s_exp):
            raise ValueError("t_exp must lie in (0, s_exp]")
        vals = [self.n_j(j) for j in range(1, self.k + 1)]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("growth schedule must be strictly increasing")

    def n_j(self, j: int) -> int:
        return schedule_value(self.growth, j)

    @property
    def n_k(self) -> int:
        return self.n_j(self.k)

    @property
    def tree_levels(self) -> list[int]:
        """Indices j of the hanging trees: ceil(k/2), ..., k."""
        return list(range(math.ceil(self.k / 2), self.k + 1))

    @property
    def gateway_distance(self) -> int:
        return self.n_j(self.tree_levels[0])

    @property
    def mass(self) -> int:
        return self.tree_mass if self.tree_mass is not None else self.n_k**3

    def tree_size(self, j: int) -> int:
        return max(1, round(self.mass / self.n_j(j)))

    def sum_inv_nj(self) -> float:
        return sum(1.0 / self.n_j(j) for j in self.tree_levels)

    def gamma(self) -> float:
        return self.k**self.p_exp

    def delta(self) -> float:
        return self.k**self.t_exp


def depth_rule(params: ParadigmParams) -> float:
    """Default core line depth: m with m^2 = 6 N k."""
    return math.sqrt(6.0 * params.mass * params.k)


def copies_rule(params: ParadigmParams, lead: float = 12.0) -> float:
    """Default copy count: lead * k^(2s+1) / sum_j 1/n_j.

    The paradigm-2 construction uses lead 12, paradigm 3 lead 6.
    """
    return lead * params.k ** (2 * params.s_exp + 1) / params.sum_inv_nj()


def lines_threshold(params: ParadigmParams) -> float:
    """Lower threshold the line count q should dominate (recorded only)."""
    m_real = depth_rule(params)
    if m_real <= 2.0:
        return math.inf
    return 12.0 * params.k ** (2 * params.s_exp + 1) * params.mass / (m_real - 2.0)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _tree_edges(size: int, offset: int) -> list[tuple[int, int]]:
    """Complete binary tree in heap order; truncated left to right."""
    return [((i - 1) // 2 + offset, i + offset) for i in range(1, size)]


def _tree_deepest(size: int, offset: int) -> list[int]:
    depth_last = int(math.floor(math.log2(size))) if size > 1 else 0
    lo = 2**depth_last - 1
    return [offset + i for i in range(lo, size)]


def _check_budget(total: int, budget: int):
    if total > budget:
        raise SizeBudgetError(f"construction needs {total} vertices, budget is {budget}")


def _provenance(params: ParadigmParams, **rules) -> dict:
    return {
        "params": {
            "k": params.k,
            "growth": params.growth if isinstance(params.growth, str) else list(params.growth),
            "tree_mass": params.mass,
            "core_depth": params.core_depth,
            "core_lines": params.core_lines,
            "copies": params.copies,
            "core_size": params.core_size,
            "s_exp": params.s_exp,
            "p_exp": params.p_exp,
            "t_exp": params.t_exp,
        },
        "rules": rules,
    }


def build_paradigm1(params: ParadigmParams) -> RegionTaggedGraph:
    """Core binary tree at the origin of a line with hanging trees.

    Layout: core tree of ``mass`` vertices rooted at vertex 0, a line of
    n_k vertices leaving the root, and for each j in ceil(k/2)..k a hanging
    binary tree of ~mass/n_j vertices whose root attaches by an edge to the
    line vertex at distance n_j.  The bottleneck is the line up to the first
    attachment; everything past it (later line, all hanging trees) is S.
    """
    N = params.mass
    n_k = params.n_k
    js = params.tree_levels
    sizes = {j: params.tree_size(j) for j in js}
    total = N + n_k + sum(sizes.values())
    _check_budget(total, params.vertex_budget)

    edges = _tree_edges(N, 0)
    line = {}  # distance -> vertex id
    nxt = N
    prev = 0
    for d in range(1, n_k + 1):
        line[d] = nxt
        edges.append((prev, nxt))
        prev = nxt
        nxt += 1

    subtree = np.full(total, -1, dtype=np.int32)
    subtree[:N] = 0
    subtrees = {0: {"attach": 0, "root": 0, "leaves": _tree_deepest(N, 0), "level_index": 0}}
    sid = 0
    far_root = None
    for j in js:
        sid += 1
        size = sizes[j]
        root = nxt
        edges.extend(_tree_edges(size, root))
        edges.append((line[params.n_j(j)], root))
        subtree[root : root + size] = sid
        subtrees[sid] = {
            "attach": line[params.n_j(j)],
            "root": root,
            "leaves": _tree_deepest(size, root),
            "level_index": j,
        }
        far_root = root
        nxt += size

    z_dist = params.gateway_distance
    region = np.full(total, int(Region.FAR), dtype=np.int8)
    region[:N] = int(Region.CORE)
    for d, v in line.items():
        region[v] = int(Region.NECK) if d <= z_dist else int(Region.FAR)

    marks = Marks(
        origin=0,
        gateway=line[z_dist],
        far_start=int(far_root),
        boundary=frozenset(_tree_deepest(N, 0)),
    )
    meta = _provenance(params, vertex_count=total, tree_sizes=sizes)
    meta["subtrees"] = subtrees
    g = graph_from_edges(
        total, edges, region=region, subtree=subtree, marks=marks, case_kind="B", meta=meta
    )
    return check_valid(g)


def _far_side(params: ParadigmParams, first_free: int, edges, region, subtree, subtrees):
    """Shared far side of paradigms 2 and 3: r glued copies plus far vertex.

    Returns (next_free_index, far_vertex, gateway_vertex).
    """
    r = params.copies
    n_k = params.n_k
    js = params.tree_levels
    sizes = {j: params.tree_size(j) for j in js}
    z_dist = params.gateway_distance
    nxt = first_free
    far = None  # allocated after all copies
    copies_line = []
    sid = max(subtrees) if subtrees else 0

    for t in range(r):
        line = {}
        prev = 0
        for d in range(1, n_k + 1):
            line[d] = nxt
            edges.append((prev, nxt))
            region[nxt] = int(Region.NECK) if d <= z_dist else int(Region.FAR)
            prev = nxt
            nxt += 1
        copies_line.append(line)
        for j in js:
            sid += 1
            size = sizes[j]
            root = nxt
            edges.extend(_tree_edges(size, root))
            edges.append((line[params.n_j(j)], root))
            region[root : root + size] = int(Region.FAR)
            subtree[root : root + size] = sid
            subtrees[sid] = {
                "attach": line[params.n_j(j)],
                "root": root,
                "leaves": _tree_deepest(size, root),
                "level_index": j,
                "copy": t,
            }
            nxt += size

    far = nxt
    region[far] = int(Region.FAR)
    nxt += 1
    for t in range(r):
        edges.append((copies_line[t][n_k], far))
    return nxt, far, copies_line[0][z_dist]


def build_paradigm2(params: ParadigmParams) -> RegionTaggedGraph:
    """Glued-lines core with glued far copies.

    The core is q lines of length m sharing both endpoints: the origin 0 and
    a single deep vertex.  The far side is r copies of the line-with-trees
    gadget glued at 0 and at a single shared far vertex.  Defaults: m from
    m^2 = 6 N k (rounded), r from the copy-count rule (rounded up).
    """
    p = params
    m_real = depth_rule(p)
    r_real = copies_rule(p, lead=12.0)
    if p.core_depth is None:
        p = _replace(p, core_depth=max(1, round(m_real)))
    if p.copies is None:
        p = _replace(p, copies=max(1, math.ceil(r_real)))
    m, q, r = p.core_depth, p.core_lines, p.copies
    if m < 1 or q < 1 or r < 1:
        raise ValueError("core_depth, core_lines and copies must be >= 1")
    if m == 1 and q > 1:
        raise ValueError("core_depth=1 with several lines would create parallel edges")

    sizes = {j: p.tree_size(j) for j in p.tree_levels}
    total = 1 + 1 + q * (m - 1) + r * (p.n_k + sum(sizes.values())) + 1
    _check_budget(total, p.vertex_budget)

    edges: list[tuple[int, int]] = []
    region = np.full(total, int(Region.CORE), dtype=np.int8)
    subtree = np.full(total, -1, dtype=np.int32)

    deep = 1
    nxt = 2
    for _ in range(q):
        prev = 0
        for _d in range(1, m):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, deep))

    subtrees: dict[int, dict] = {}
    nxt, far, gate = _far_side(p, nxt, edges, region, subtree, subtrees)
    assert nxt == total

    marks = Marks(origin=0, gateway=gate, far_start=far, boundary=frozenset([deep]))
    meta = _provenance(
        p,
        vertex_count=total,
        tree_sizes=sizes,
        depth_real=m_real,
        copies_real=r_real,
        lines_threshold=lines_threshold(p),
    )
    meta["subtrees"] = subtrees
    g = graph_from_edges(
        total, edges, region=region, subtree=subtree, marks=marks, case_kind="A", meta=meta
    )
    return check_valid(g)


def build_paradigm3(params: ParadigmParams) -> RegionTaggedGraph:
    """Binary-tree core with glued far copies.

    Same far side as paradigm 2, but the core is a complete binary tree of
    ``core_size`` vertices rooted at the origin.  Defaults: copies from the
    rule with lead 6; core_size from exp(core_depth) when a depth is given.
    """
    p = params
    r_real = copies_rule(p, lead=6.0)
    if p.copies is None:
        p = _replace(p, copies=max(1, math.ceil(r_real)))
    if p.core_size is None:
        if p.core_depth is None:
            raise ValueError("paradigm 3 needs core_size (or core_depth for the e^m rule)")
        p = _replace(p, core_size=max(3, round(math.exp(p.core_depth))))
    M, r = p.core_size, p.copies
    if M < 3:
        raise ValueError("core_size must be >= 3")

    sizes = {j: p.tree_size(j) for j in p.tree_levels}
    total = M + r * (p.n_k + sum(sizes.values())) + 1
    _check_budget(total, p.vertex_budget)

    edges = _tree_edges(M, 0)
    region = np.full(total, int(Region.CORE), dtype=np.int8)
    subtree = np.full(total, -1, dtype=np.int32)
    subtree[:M] = 0
    subtrees = {0: {"attach": 0, "root": 0, "leaves": _tree_deepest(M, 0), "level_index": 0}}

    nxt, far, gate = _far_side(p, M, edges, region, subtree, subtrees)
    assert nxt == total

    marks = Marks(
        origin=0,
        gateway=gate,
        far_start=far,
        boundary=frozenset(_tree_deepest(M, 0)),
    )
    meta = _provenance(p, vertex_count=total, tree_sizes=sizes, copies_real=r_real)
    meta["subtrees"] = subtrees
    g = graph_from_edges(
        total, edges, region=region, subtree=subtree, marks=marks, case_kind="A", meta=meta
    )
    return check_valid(g)


def _replace(params: ParadigmParams, **kw) -> ParadigmParams:
    import dataclasses

    return dataclasses.replace(params, **kw)


def build_case_graph(desc: dict) -> RegionTaggedGraph:
    """Build a tagged graph from an explicit description.

    Expected keys: ``n``, ``edges``, ``region`` (list of tokens or codes),
    ``marks`` (dict with origin/gateway/far_start/boundary) and optionally
    ``case`` and ``subtree``.  The result is validated; violations raise.
    """
    try:
        n = int(desc["n"])
        raw_region = desc["region"]
        marks_d = desc["marks"]
    except KeyError as exc:
        raise MissingMarkError(f"case description lacks {exc}") from exc
    region = [
        int(TOKEN_REGIONS[x]) if isinstance(x, str) else int(x) for x in raw_region
    ]
    try:
        marks = Marks(
            origin=int(marks_d["origin"]),
            gateway=int(marks_d["gateway"]),
            far_start=int(marks_d["far_start"]),
            boundary=frozenset(int(v) for v in marks_d["boundary"]),
        )
    except KeyError as exc:
        raise MissingMarkError(f"marks lack {exc}") from exc
    g = graph_from_edges(
        n,
        desc["edges"],
        region=region,
        subtree=desc.get("subtree"),
        marks=marks,
        case_kind=desc.get("case"),
        meta={"source": "case description"},
    )
    return check_valid(g)


# ---------------------------------------------------------------------------
# small named graphs used by fixtures and tests
# ---------------------------------------------------------------------------


def complete_graph(n: int) -> RegionTaggedGraph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return graph_from_edges(n, edges, meta={"name": f"complete-{n}"})


def cycle_graph(n: int) -> RegionTaggedGraph:
    edges = [(i, (i + 1) % n) for i in range(n)]
    return graph_from_edges(n, edges, meta={"name": f"cycle-{n}"})


def path_graph(m: int) -> RegionTaggedGraph:
    """Path with vertices 0..m; vertex i sits at distance i from the end 0."""
    edges = [(i, i + 1) for i in range(m)]
    return graph_from_edges(m + 1, edges, meta={"name": f"path-{m}"})


def dumbbell_graph() -> RegionTaggedGraph:
    """Two triangles joined by one edge, fully tagged."""
    edges = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)]
    region = [Region.CORE, Region.CORE, Region.NECK, Region.FAR, Region.FAR, Region.FAR]
    marks = Marks(origin=0, gateway=2, far_start=4, boundary=frozenset([1]))
    g = graph_from_edges(
        6,
        edges,
        region=[int(r) for r in region],
        marks=marks,
        case_kind="A",
        meta={"name": "dumbbell"},
    )
    return check_valid(g)


# ---------------------------------------------------------------------------
# export / import
# ---------------------------------------------------------------------------


def write_edge_list(g: RegionTaggedGraph, path) -> None:
    """One ``u v`` line per undirected edge."""
    e = g.edge_array()
    with open(path, "w") as fh:
        for u, v in e:
            fh.write(f"{u} {v}\n")


def write_region_sidecar(g: RegionTaggedGraph, path) -> None:
    """One ``index region subtree marks`` line per vertex."""
    mark_tokens = {v: [] for v in range(g.n)}
    if g.marks is not None:
        mark_tokens[g.marks.origin].append("origin")
        mark_tokens[g.marks.gateway].append("gateway")
        mark_tokens[g.marks.far_start].append("far")
        for v in sorted(g.marks.boundary):
            mark_tokens[v].append("boundary")
    with open(path, "w") as fh:
        for v in range(g.n):
            token = ",".join(mark_tokens[v]) if mark_tokens[v] else "-"
            fh.write(
                f"{v} {REGION_TOKENS[Region(int(g.region[v]))]} {int(g.subtree[v])} {token}\n"
            )


def read_graph(edge_path, sidecar_path=None) -> RegionTaggedGraph:
    """Load a graph written by the two writers above and validate it."""
    edges = []
    n = 0
    with open(edge_path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            u, v = (int(x) for x in line.split())
            edges.append((u, v))
            n = max(n, u + 1, v + 1)
    if sidecar_path is None:
        return graph_from_edges(n, edges, meta={"source": str(edge_path)})

    region = np.zeros(n, dtype=np.int8)
    subtree = np.full(n, -1, dtype=np.int32)
    found = {"origin": None, "gateway": None, "far": None}
    boundary = set()
    tagged = False
    with open(sidecar_path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            idx_s, reg_s, sub_s, marks_s = line.split()
            v = int(idx_s)
            n = max(n, v + 1)
            region[v] = int(TOKEN_REGIONS[reg_s])
            if reg_s != "CORE":
                tagged = True
            subtree[v] = int(sub_s)
            if marks_s != "-":
                for token in marks_s.split(","):
                    if token == "boundary":
                        boundary.add(v)
                    else:
                        found[token] = v
    marks = None
    if tagged or any(v is not None for v in found.values()) or boundary:
        if any(v is None for v in found.values()) or not boundary:
            raise MissingMarkError(f"incomplete marks in {sidecar_path}")
        marks = Marks(
            origin=found["origin"],
            gateway=found["gateway"],
            far_start=found["far"],
            boundary=frozenset(boundary),
        )
    g = graph_from_edges(
        n,
        edges,
        region=region,
        subtree=subtree,
        marks=marks,
        meta={"source": str(edge_path)},
    )
    return check_valid(g)
