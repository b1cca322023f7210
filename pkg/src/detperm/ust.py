"""Random spanning trees through transfer currents.

The edge set of a (conductance-weighted) uniform spanning tree is a
determinantal process whose kernel is the transfer-current matrix: entry
(e, f) is the current through f when a unit current is driven across e.
Concretely this is the orthogonal projection onto the column space of the
signed incidence matrix, computed with the graph Laplacian pseudoinverse,
and it has rank |V| - 1.

The sampler walks the projection-process recipe directly on the graph:
pick an edge with probability conductance * effective resistance / n,
contract it, recompute resistances, repeat.  The trace identity
sum_e c_e R(e) = (#tree edges still needed) is asserted after every
contraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GraphError, GroundSet, sample_categorical
from .kernels import HermitianKernel

TRACE_TOL = 1e-8


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph with a reference orientation per edge."""

    vertices: tuple
    edges: tuple            # (u, v) pairs, oriented u -> v
    conductances: np.ndarray

    def __post_init__(self):
        vertices = tuple(self.vertices)
        edges = tuple((u, v) for u, v in self.edges)
        cond = np.asarray(self.conductances, dtype=float)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "conductances", cond)
        if len(set(vertices)) != len(vertices):
            raise GraphError("vertex labels must be distinct")
        if cond.shape != (len(edges),):
            raise GraphError("one conductance per edge required")
        if len(edges) and not np.all(cond > 0):
            raise GraphError("conductances must be strictly positive")
        vset = set(vertices)
        for u, v in edges:
            if u not in vset or v not in vset:
                raise GraphError(f"edge ({u}, {v}) uses an unknown vertex")
            if u == v:
                raise GraphError(f"self-loop at {u} is not allowed")
        if not _connected(len(vertices), self._index_pairs()):
            raise GraphError("graph must be connected")

    def _index_pairs(self):
        pos = {v: i for i, v in enumerate(self.vertices)}
        return [(pos[u], pos[v]) for u, v in self.edges]

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    def edge_labels(self):
        return tuple(f"e{i}:{u}-{v}" for i, (u, v) in enumerate(self.edges))

    def edge_index(self, edge):
        """Resolve an edge given as an index or an endpoint pair."""
        if isinstance(edge, int):
            if not 0 <= edge < self.n_edges:
                raise GraphError(f"edge index {edge} out of range")
            return edge
        u, v = edge
        for i, (a, b) in enumerate(self.edges):
            if (a, b) == (u, v) or (a, b) == (v, u):
                return i
        raise GraphError(f"no edge between {u!r} and {v!r}")

    @staticmethod
    def from_edge_list(text):
        """Parse 'u v [conductance]' lines (blank lines and # comments ok)."""
        vertices, edges, conds = [], [], []
        seen = set()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphError(f"line {lineno}: expected 'u v [conductance]'")
            u, v = parts[0], parts[1]
            for x in (u, v):
                if x not in seen:
                    seen.add(x)
                    vertices.append(x)
            edges.append((u, v))
            conds.append(float(parts[2]) if len(parts) == 3 else 1.0)
        return Graph(tuple(vertices), tuple(edges), np.array(conds))

    @staticmethod
    def load(path):
        with open(path) as fh:
            return Graph.from_edge_list(fh.read())


def _connected(n_vertices, index_pairs):
    if n_vertices == 0:
        return False
    parent = list(range(n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in index_pairs:
        parent[find(u)] = find(v)
    return len({find(i) for i in range(n_vertices)}) == 1


def _incidence(n_vertices, index_pairs):
    b = np.zeros((len(index_pairs), n_vertices))
    for e, (u, v) in enumerate(index_pairs):
        b[e, u] += 1.0
        b[e, v] -= 1.0
    return b


def _current_matrix(n_vertices, index_pairs, cond):
    """B L^+ B^T: entry (e, f) is the current through f per unit current
    driven across e."""
    b = _incidence(n_vertices, index_pairs)
    lap = b.T @ (cond[:, None] * b)
    return b @ np.linalg.pinv(lap, hermitian=True) @ b.T


def transfer_current_kernel(graph):
    """Determinantal kernel of the weighted spanning tree on the edge set
    (counting measure): C^(1/2) B L^+ B^T C^(1/2), an orthogonal
    projection of rank |V| - 1 with diagonal c_e R(e) = P(e in tree)."""
    y = _current_matrix(graph.n_vertices, graph._index_pairs(), graph.conductances)
    s = np.sqrt(graph.conductances)
    k = s[:, None] * y * s[None, :]
    k = (k + k.T) / 2
    ground = GroundSet(graph.edge_labels(), np.ones(graph.n_edges))
    return HermitianKernel(k.astype(complex), ground)


def effective_resistance(graph, edge):
    """Voltage across an edge when a unit current is driven along it."""
    e = graph.edge_index(edge)
    y = _current_matrix(graph.n_vertices, graph._index_pairs(), graph.conductances)
    return float(y[e, e])


def sample_ust(graph, rng):
    """Draw one spanning tree (edge indices), distributed proportionally
    to the product of its conductances.

    Repeatedly selects an edge with probability c_e R(e) / n, contracts
    it, drops the self-loops the contraction creates, and recomputes
    effective resistances on the contracted multigraph.
    """
    classes = list(range(graph.n_vertices))

    def find(x):
        while classes[x] != x:
            classes[x] = classes[classes[x]]
            x = classes[x]
        return x

    alive = [(i, u, v) for i, (u, v) in enumerate(graph._index_pairs())]
    cond = graph.conductances
    tree = []
    needed = graph.n_vertices - 1
    while needed > 0:
        reps = sorted({find(v) for v in range(graph.n_vertices)})
        relabel = {r: i for i, r in enumerate(reps)}
        pairs = [(relabel[find(u)], relabel[find(v)]) for _, u, v in alive]
        c = np.array([cond[i] for i, _, _ in alive])
        y = _current_matrix(len(reps), pairs, c)
        resistances = np.diag(y)
        mass = c * resistances
        if abs(mass.sum() - needed) > TRACE_TOL * max(1.0, needed):
            raise GraphError(
                f"resistance trace {mass.sum()!r} drifted from {needed}"
            )
        pick = sample_categorical(np.maximum(mass, 0.0), rng)
        orig, u, v = alive[pick]
        tree.append(orig)
        classes[find(u)] = find(v)
        alive = [(i, a, b) for i, a, b in alive if find(a) != find(b)]
        needed -= 1
    return tuple(sorted(tree))


def is_spanning_tree(graph, edge_indices):
    """Check |V| - 1 edges that connect every vertex (hence acyclic)."""
    idx = list(edge_indices)
    if len(idx) != graph.n_vertices - 1 or len(set(idx)) != len(idx):
        return False
    pairs = graph._index_pairs()
    return _connected(graph.n_vertices, [pairs[i] for i in idx])
