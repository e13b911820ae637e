"""Exact finite-graph metric engine.

A connected undirected graph with unit edge lengths is the host metric
space for everything else in the toolkit: distances are exact BFS integers,
geodesic point sets are computed from the distance matrix alone, and paths
are explicit vertex sequences.

Conventions:
    - vertices are dense integers 0..n-1 (labels are kept only for reports);
    - the distance matrix is a full int32 numpy array (graphs are capped at
      MAX_VERTICES by default to bound memory);
    - all operations are pure functions of immutable inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from collections import deque

import numpy as np

from .errors import ParseError, PreconditionError

MAX_VERTICES = 20_000


@dataclass(frozen=True)
class Graph:
    """Finite undirected graph: no loops, no multi-edges."""

    n: int
    edges: frozenset[tuple[int, int]]  # each pair sorted (u < v)
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise PreconditionError(f"loop edge ({u},{u}) not allowed")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise PreconditionError(f"edge ({u},{v}) out of range for n={self.n}")
            if u > v:
                raise PreconditionError("edges must be stored as sorted pairs")
        if self.labels is not None and len(self.labels) != self.n:
            raise PreconditionError("label count must equal vertex count")

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for row in adj:
            row.sort()
        return adj

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        return len(_component(self.adjacency(), 0)) == self.n

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "edges": sorted([list(e) for e in self.edges])},
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "Graph":
        obj = json.loads(text)
        return make_graph(obj["n"], [tuple(e) for e in obj["edges"]])


def make_graph(n: int, edges, labels=None) -> Graph:
    canon = frozenset((min(u, v), max(u, v)) for u, v in edges)
    return Graph(n=n, edges=canon, labels=tuple(labels) if labels else None)


def _component(adj: list[list[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def load_graph(edge_list_text: str, largest_component: bool = False) -> Graph:
    """Parse whitespace-separated integer pairs, one edge per line.

    '#' starts a comment. Vertices are 0..max_id; duplicates are deduplicated.
    Disconnected input is an error unless largest_component is set, in which
    case the largest component is extracted and relabeled densely.
    """
    edges = set()
    max_id = -1
    for lineno, raw in enumerate(edge_list_text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two vertex ids, got {line!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer vertex id in {line!r}", line=lineno)
        if u < 0 or v < 0:
            raise ParseError(f"negative vertex id in {line!r}", line=lineno)
        if u == v:
            raise ParseError(f"loop edge ({u},{u}) not allowed", line=lineno)
        edges.add((min(u, v), max(u, v)))
        max_id = max(max_id, u, v)
    if max_id < 0:
        raise ParseError("no edges found")
    n = max_id + 1
    if n > MAX_VERTICES:
        raise PreconditionError(f"graph has {n} vertices, cap is {MAX_VERTICES}")
    g = make_graph(n, edges)
    if g.is_connected():
        return g
    if not largest_component:
        raise PreconditionError(
            "graph is disconnected (pass largest_component=True to extract one)"
        )
    adj = g.adjacency()
    seen: set[int] = set()
    best: set[int] = set()
    for start in range(n):
        if start in seen:
            continue
        comp = _component(adj, start)
        seen |= comp
        if len(comp) > len(best):
            best = comp
    relabel = {old: new for new, old in enumerate(sorted(best))}
    kept = [
        (relabel[u], relabel[v]) for u, v in edges if u in best and v in best
    ]
    return make_graph(len(best), kept)


@dataclass(frozen=True)
class DistanceMatrix:
    """Exact all-pairs graph distances (unit edge lengths)."""

    d: np.ndarray  # int32, shape (n, n)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __getitem__(self, idx):
        return int(self.d[idx])

    def validate(self) -> None:
        d = self.d
        n = self.n
        if d.shape != (n, n):
            raise PreconditionError("distance matrix must be square")
        if not np.array_equal(d, d.T):
            raise PreconditionError("distance matrix must be symmetric")
        if np.any(np.diag(d) != 0):
            raise PreconditionError("diagonal must be zero")
        if n > 1 and np.min(d + np.eye(n, dtype=d.dtype) * 10**6) < 1:
            raise PreconditionError("off-diagonal distances must be >= 1")
        # full triangle inequality: d(u,w) <= d(u,v) + d(v,w)
        for v in range(n):
            if np.any(d > d[:, v][:, None] + d[v, :][None, :]):
                raise PreconditionError(f"triangle inequality fails through {v}")


def distance_matrix(g: Graph) -> DistanceMatrix:
    """Exact BFS distances for all vertex pairs; errors on disconnected input."""
    if g.n == 0:
        raise PreconditionError("empty graph")
    adj = g.adjacency()
    d = np.full((g.n, g.n), -1, dtype=np.int32)
    for src in range(g.n):
        row = d[src]
        row[src] = 0
        queue = deque([src])
        while queue:
            x = queue.popleft()
            dx = row[x]
            for y in adj[x]:
                if row[y] < 0:
                    row[y] = dx + 1
                    queue.append(y)
    if np.any(d < 0):
        raise PreconditionError("graph is disconnected")
    return DistanceMatrix(d=d)


def geodesic_mask(dm: DistanceMatrix, u: int, v: int) -> np.ndarray:
    """Boolean mask of G(u,v) = {x : d(u,x) + d(x,v) = d(u,v)}."""
    d = dm.d
    return d[u] + d[v] == d[u, v]


def geodesic_points(dm: DistanceMatrix, u: int, v: int) -> set[int]:
    """The union of all discrete geodesics from u to v, as a vertex set."""
    n = dm.n
    if not (0 <= u < n and 0 <= v < n):
        raise PreconditionError("vertex out of range")
    return set(int(x) for x in np.nonzero(geodesic_mask(dm, u, v))[0])


@dataclass(frozen=True)
class Path:
    """Discrete path: consecutive vertices adjacent, length >= 1."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise PreconditionError("a path has length >= 1")

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def validate(self, dm: DistanceMatrix) -> None:
        for a, b in zip(self.vertices, self.vertices[1:]):
            if dm[a, b] != 1:
                raise PreconditionError(f"consecutive vertices {a},{b} not adjacent")


def extract_geodesic(dm: DistanceMatrix, u: int, v: int) -> list[int]:
    """One discrete geodesic from u to v (lexicographically smallest steps)."""
    d = dm.d
    out = [u]
    x = u
    while x != v:
        dist = int(d[x, v])
        nxt = np.nonzero((d[x] == 1) & (d[:, v] == dist - 1))[0]
        x = int(nxt[0])
        out.append(x)
    return out


def direct_image_path(host_d: DistanceMatrix, images: list[int]) -> Path:
    """Concatenate geodesics between consecutive image points.

    The result visits all images in order and has length equal to the sum of
    consecutive pairwise distances.
    """
    if not images:
        raise PreconditionError("images must be nonempty")
    verts: list[int] = [images[0]]
    for a, b in zip(images, images[1:]):
        verts.extend(extract_geodesic(host_d, a, b)[1:])
    if len(verts) == 1:
        # all images coincide; no discrete path of length 0 exists
        raise PreconditionError("images induce a path of length 0")
    return Path(vertices=tuple(verts))


# ---------------------------------------------------------------------------
# generators


def cycle_graph(n: int) -> Graph:
    """The n-cycle with d(i,j) = min(|i-j|, n-|i-j|); rejects n < 3.

    As a simple graph a 2-cycle would need a multi-edge, so it is rejected.
    """
    if n < 3:
        raise PreconditionError(f"cycle length must be >= 3, got {n}")
    return make_graph(n, [(i, (i + 1) % n) for i in range(n)])


def grid_graph(w: int, h: int) -> Graph:
    """The w x h grid graph, vertices numbered row-major."""
    if w < 1 or h < 1:
        raise PreconditionError("grid dimensions must be positive")
    edges = []
    for i in range(h):
        for j in range(w):
            v = i * w + j
            if j + 1 < w:
                edges.append((v, v + 1))
            if i + 1 < h:
                edges.append((v, v + w))
    return make_graph(w * h, edges)


def tree_graph(branching: int, depth: int) -> Graph:
    """Complete rooted tree where every internal vertex has `branching` children."""
    if branching < 1 or depth < 0:
        raise PreconditionError("branching >= 1 and depth >= 0 required")
    edges = []
    level = [0]
    next_id = 1
    for _ in range(depth):
        new_level = []
        for parent in level:
            for _ in range(branching):
                edges.append((parent, next_id))
                new_level.append(next_id)
                next_id += 1
        level = new_level
    if next_id == 1:
        # a single vertex is a valid (edgeless) tree
        return Graph(n=1, edges=frozenset())
    return make_graph(next_id, edges)


def random_tree(n: int, rng) -> Graph:
    """Uniform-ish random tree: each vertex i >= 1 attaches to a random earlier one."""
    if n < 1:
        raise PreconditionError("tree needs at least one vertex")
    if n == 1:
        return Graph(n=1, edges=frozenset())
    edges = [(rng.randrange(i), i) for i in range(1, n)]
    return make_graph(n, edges)


def add_random_chords(g: Graph, count: int, rng) -> Graph:
    """Add `count` random non-edges as chords (returns a new graph)."""
    edges = set(g.edges)
    attempts = 0
    added = 0
    while added < count and attempts < 100 * (count + 1):
        attempts += 1
        u = rng.randrange(g.n)
        v = rng.randrange(g.n)
        if u == v:
            continue
        e = (min(u, v), max(u, v))
        if e in edges:
            continue
        edges.add(e)
        added += 1
    return make_graph(g.n, edges)
