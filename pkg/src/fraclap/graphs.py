"""Graph ingestion, structural queries, and Laplacian matrix construction.

Graphs are simple (no self-loops, no duplicate edges) with strictly positive
edge weights.  Matrices are plain dense ``numpy`` arrays: the largest network
of interest here has ~1000 nodes, so O(n^2) storage is cheap and keeps every
downstream kernel simple.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GraphParseError

__all__ = [
    "Graph",
    "DistanceMatrix",
    "ConnectivityReport",
    "load_graph",
    "adjacency_and_degrees",
    "combinatorial_laplacian",
    "directed_laplacians",
    "normalized_laplacians",
    "incidence_matrix",
    "all_pairs_distances",
    "connectivity",
    "k_path_laplacian",
    "transformed_k_path_laplacian",
]


@dataclass(frozen=True)
class Graph:
    """A simple weighted graph with 0-based node indices.

    Undirected graphs store each unordered pair exactly once, canonicalized
    as (min, max); the expansion to a symmetric weight matrix happens in the
    matrix builders.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    directed: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        seen = set()
        canonical = []
        for u, v, w in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise ValueError(f"self-loop at node {u} is not allowed")
            if not w > 0:
                raise ValueError(f"edge ({u}, {v}) has nonpositive weight {w}")
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add(key)
            canonical.append((key[0], key[1], float(w)) if not self.directed
                             else (u, v, float(w)))
        object.__setattr__(self, "edges", tuple(canonical))

    @property
    def m(self) -> int:
        return len(self.edges)

    def out_neighbors(self) -> list[list[int]]:
        """Adjacency lists following edge direction (both ways if undirected)."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            if not self.directed:
                adj[v].append(u)
        return adj


@dataclass(frozen=True)
class DistanceMatrix:
    """All-pairs hop distances; unreachable pairs hold ``inf``.

    ``diameter`` is the largest finite entry.
    """

    hops: np.ndarray
    diameter: int


@dataclass(frozen=True)
class ConnectivityReport:
    """Component structure of a graph.

    ``components`` are sorted largest first.  For directed graphs the
    components are the strongly connected ones and ``is_connected`` means
    strongly connected.  ``largest_component`` is the induced subgraph on the
    biggest component with nodes relabeled 0..k-1; ``node_map[i]`` gives the
    original index of new node i.
    """

    components: tuple[tuple[int, ...], ...]
    is_connected: bool
    largest_component: Graph
    node_map: tuple[int, ...]


# ---------------------------------------------------------------------------
# File loading
# ---------------------------------------------------------------------------

def load_graph(path, fmt: str | None = None, directed: bool = False) -> Graph:
    """Load a graph from an edge-list or Matrix Market file.

    Indices in files are 1-based and converted to 0-based.  Missing weights
    default to 1.0.  Duplicate edges and self-loops are rejected.

    Args:
        path: file location.
        fmt: "edgelist" or "mtx"; inferred from the extension when None.
        directed: direction flag for edge lists.  Matrix Market files decide
            from the header ("symmetric" -> undirected, "general" -> directed).

    Raises:
        GraphParseError: malformed content, with the offending line number.
    """
    path = Path(path)
    if fmt is None:
        fmt = "mtx" if path.suffix.lower() in (".mtx", ".mm") else "edgelist"
    if fmt not in ("edgelist", "mtx"):
        raise ValueError(f"unknown graph format {fmt!r}")
    try:
        text = path.read_text()
    except OSError as exc:
        raise GraphParseError(f"cannot read file: {exc}", path=str(path)) from exc
    if fmt == "mtx":
        return _parse_matrix_market(text, str(path))
    return _parse_edge_list(text, str(path), directed)


def _parse_edge_list(text: str, path: str, directed: bool) -> Graph:
    edges = []
    max_index = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("%", "#")):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphParseError(
                f"expected 'src dst [weight]', got {line!r}", path, lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise GraphParseError(str(exc), path, lineno) from exc
        if u < 1 or v < 1:
            raise GraphParseError("indices are 1-based and must be >= 1",
                                  path, lineno)
        if u == v:
            raise GraphParseError(f"self-loop at node {u}", path, lineno)
        edges.append((u - 1, v - 1, w, lineno))
        max_index = max(max_index, u, v)
    if not edges:
        raise GraphParseError("no edges found", path)
    return _build_checked(max_index, edges, directed, path)


def _parse_matrix_market(text: str, path: str) -> Graph:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise GraphParseError("missing %%MatrixMarket header", path, 1)
    header = lines[0].lower().split()
    if "coordinate" not in header:
        raise GraphParseError("only coordinate format is supported", path, 1)
    pattern = "pattern" in header
    if not pattern and not ("real" in header or "integer" in header):
        raise GraphParseError("field must be real, integer, or pattern", path, 1)
    symmetric = "symmetric" in header
    if not symmetric and "general" not in header:
        raise GraphParseError("symmetry must be general or symmetric", path, 1)

    size_seen = False
    n = nnz = 0
    edges = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split()
        if not size_seen:
            if len(parts) != 3:
                raise GraphParseError("expected size line 'rows cols nnz'",
                                      path, lineno)
            rows, cols, nnz = (int(p) for p in parts)
            if rows != cols:
                raise GraphParseError("adjacency matrix must be square",
                                      path, lineno)
            n = rows
            size_seen = True
            continue
        expected = 2 if pattern else 3
        if len(parts) != expected:
            raise GraphParseError(
                f"expected {expected} fields per entry", path, lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if not pattern else 1.0
        except ValueError as exc:
            raise GraphParseError(str(exc), path, lineno) from exc
        if u == v:
            raise GraphParseError(f"self-loop at node {u}", path, lineno)
        edges.append((u - 1, v - 1, w, lineno))
    if not size_seen:
        raise GraphParseError("missing size line", path)
    if len(edges) != nnz:
        raise GraphParseError(
            f"header promises {nnz} entries, found {len(edges)}", path)
    return _build_checked(n, edges, directed=not symmetric, path=path)


def _build_checked(n, tagged_edges, directed, path):
    """Assemble a Graph, mapping duplicate-edge errors to parse errors."""
    seen = {}
    clean = []
    for u, v, w, lineno in tagged_edges:
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise GraphParseError(
                f"duplicate edge ({u + 1}, {v + 1}) first seen on line "
                f"{seen[key]}", path, lineno)
        seen[key] = lineno
        clean.append((u, v, w))
    return Graph(n=n, edges=tuple(clean), directed=directed)


# ---------------------------------------------------------------------------
# Matrix builders
# ---------------------------------------------------------------------------

def adjacency_and_degrees(g: Graph):
    """Return (A, D, D_in, D_out) as dense arrays.

    A carries the edge weights; degrees are weighted row/column sums.  For an
    undirected graph D = D_in = D_out.
    """
    a = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        a[u, v] = w
        if not g.directed:
            a[v, u] = w
    d_out = np.diag(a.sum(axis=1))
    d_in = np.diag(a.sum(axis=0))
    return a, d_out.copy(), d_in, d_out


def combinatorial_laplacian(g: Graph) -> np.ndarray:
    """L = D - W for an undirected graph; exactly symmetric with L @ 1 = 0."""
    if g.directed:
        raise ValueError(
            "combinatorial_laplacian needs an undirected graph; "
            "use directed_laplacians")
    lap = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        lap[u, v] = -w
        lap[v, u] = -w
        lap[u, u] += w
        lap[v, v] += w
    return lap


def directed_laplacians(g: Graph):
    """Return (L_out, L_in) = (D_out - W, D_in - W) for a directed graph."""
    if not g.directed:
        raise ValueError("directed_laplacians needs a directed graph")
    a, _, d_in, d_out = adjacency_and_degrees(g)
    return d_out - a, d_in - a


def normalized_laplacians(g: Graph):
    """Return (random-walk, symmetric) normalized Laplacians.

    rw = I - D^{-1} W (D^{-1} W is row-stochastic) and
    sym = I - D^{-1/2} W D^{-1/2}.  Every vertex must have nonzero degree.
    """
    if g.directed:
        raise ValueError("normalized_laplacians needs an undirected graph")
    a, d, _, _ = adjacency_and_degrees(g)
    deg = np.diag(d).copy()
    isolated = np.nonzero(deg == 0)[0]
    if isolated.size:
        raise ValueError(f"isolated vertex {int(isolated[0])} has zero degree")
    rw = np.eye(g.n) - a / deg[:, None]
    root = np.sqrt(deg)
    sym = np.eye(g.n) - a / np.outer(root, root)
    sym = 0.5 * (sym + sym.T)
    return rw, sym


def incidence_matrix(g: Graph) -> np.ndarray:
    """Signed |V| x |E| incidence matrix B with entries +-sqrt(w).

    The signs are chosen so that B @ B.T equals the combinatorial Laplacian
    (undirected case).  Directed edges use -sqrt(w) where the edge leaves and
    +sqrt(w) where it enters.
    """
    b = np.zeros((g.n, g.m))
    for j, (u, v, w) in enumerate(g.edges):
        r = np.sqrt(w)
        if g.directed:
            b[u, j] = -r
            b[v, j] = r
        else:
            b[u, j] = r
            b[v, j] = -r
    return b


# ---------------------------------------------------------------------------
# Distances and connectivity
# ---------------------------------------------------------------------------

def _bfs_row(adj, source, n):
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in adj[u]:
            if np.isinf(dist[v]):
                dist[v] = du + 1.0
                queue.append(v)
    return dist


def all_pairs_distances(g: Graph) -> DistanceMatrix:
    """Hop distances by BFS from every source; weights are ignored.

    Directed graphs use directed paths, so the result need not be symmetric.
    """
    adj = g.out_neighbors()
    hops = np.vstack([_bfs_row(adj, s, g.n) for s in range(g.n)])
    finite = hops[np.isfinite(hops)]
    diameter = int(finite.max()) if finite.size else 0
    return DistanceMatrix(hops=hops, diameter=diameter)


def _undirected_components(g: Graph):
    adj = g.out_neighbors()
    label = [-1] * g.n
    comps = []
    for s in range(g.n):
        if label[s] >= 0:
            continue
        comp = [s]
        label[s] = len(comps)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if label[v] < 0:
                    label[v] = label[s]
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def _strong_components(g: Graph):
    """Iterative Tarjan strongly connected components."""
    adj = g.out_neighbors()
    index = [-1] * g.n
    low = [0] * g.n
    on_stack = [False] * g.n
    stack: list[int] = []
    comps = []
    counter = 0
    for root in range(g.n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        while work:
            node, ptr = work[-1]
            if ptr == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            while ptr < len(adj[node]):
                nxt = adj[node][ptr]
                ptr += 1
                if index[nxt] < 0:
                    work[-1] = (node, ptr)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return comps


def connectivity(g: Graph) -> ConnectivityReport:
    """Component report; directed graphs are judged by strong connectivity."""
    comps = _strong_components(g) if g.directed else _undirected_components(g)
    comps.sort(key=lambda c: (-len(c), c))
    largest = comps[0]
    node_map = tuple(largest)
    back = {orig: new for new, orig in enumerate(node_map)}
    keep = set(largest)
    sub_edges = tuple((back[u], back[v], w) for u, v, w in g.edges
                      if u in keep and v in keep)
    sub = Graph(n=len(largest), edges=sub_edges, directed=g.directed)
    return ConnectivityReport(
        components=tuple(tuple(c) for c in comps),
        is_connected=len(comps) == 1,
        largest_component=sub,
        node_map=node_map,
    )


# ---------------------------------------------------------------------------
# k-path Laplacians
# ---------------------------------------------------------------------------

def k_path_laplacian(g: Graph, k: int, distances: DistanceMatrix | None = None
                     ) -> np.ndarray:
    """Laplacian-like coupling of node pairs at hop distance exactly k.

    Off-diagonal entries are -1 where d(u, v) = k; the diagonal holds the
    count of nodes at distance exactly k, so each row sums to zero.  Returns
    the zero matrix for k larger than the diameter.
    """
    if g.directed:
        raise ValueError("k_path_laplacian needs an undirected graph")
    if k < 1:
        raise ValueError("k must be >= 1")
    if distances is None:
        distances = all_pairs_distances(g)
    if not np.all(np.isfinite(distances.hops)):
        raise ValueError("k_path_laplacian needs a connected graph")
    mask = distances.hops == k
    lap = np.where(mask, -1.0, 0.0)
    np.fill_diagonal(lap, mask.sum(axis=1))
    return lap


def transformed_k_path_laplacian(g: Graph, alpha: float) -> np.ndarray:
    """Mellin-weighted sum L_1 + sum_{k>=2} k^{-alpha} L_k up to the diameter."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    distances = all_pairs_distances(g)
    total = k_path_laplacian(g, 1, distances)
    for k in range(2, distances.diameter + 1):
        total = total + float(k) ** (-alpha) * k_path_laplacian(g, k, distances)
    return total
