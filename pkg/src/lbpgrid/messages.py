"""Min-sum message passing with difference messages.

The engine works on any finite graph with a designated interior ``B``; the
grid of the block-interpolation problem and the trees used for the tree
result share it.  Messages live on every directed edge with at least one
endpoint in ``B``.  Boundary-sourced messages are pinned to the boundary
value; interior-sourced ones are updated synchronously.

Two message families are provided:

* difference messages ``m[j->i]`` in ``{-1, 0, +1}`` (the normalized form),
* unnormalized integer pairs ``M[j->i](-1), M[j->i](+1)`` kept exactly.

Kernels operate on numpy arrays whose last axis indexes directed edges, so a
whole batch of boundaries can be stepped at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .grid import BoundaryConfig, Coord, GridInstance, make_grid


@dataclass(frozen=True, eq=False)
class Topology:
    """Boundary-independent message bookkeeping for a graph and interior set.

    ``edges`` are the directed edges ``(j, i)`` with ``i`` or ``j`` interior.
    ``boundary_vertices`` fixes the order of the boundary-value vector.
    """

    vertices: tuple
    interior: frozenset
    edges: tuple
    boundary_vertices: tuple
    sites: tuple  # interior vertices, in output order

    @classmethod
    def build(cls, edges: Iterable[tuple[Hashable, Hashable]], interior: Iterable[Hashable],
              boundary_order: Sequence[Hashable] | None = None,
              site_order: Sequence[Hashable] | None = None) -> "Topology":
        interior = frozenset(interior)
        und = set()
        verts = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            verts.update((u, v))
            und.add(frozenset((u, v)))
        verts |= interior
        directed = []
        for e in und:
            u, v = tuple(e)
            if u in interior or v in interior:
                directed += [(u, v), (v, u)]
        directed.sort(key=_sort_key)
        touching = {j for j, i in directed if j not in interior}
        if boundary_order is None:
            boundary_order = sorted(touching, key=_sort_key)
        else:
            missing = touching - set(boundary_order)
            if missing:
                raise ValueError(f"boundary order misses {sorted(missing, key=_sort_key)}")
        if site_order is None:
            site_order = sorted(interior, key=_sort_key)
        return cls(vertices=tuple(sorted(verts, key=_sort_key)), interior=interior,
                   edges=tuple(directed), boundary_vertices=tuple(boundary_order),
                   sites=tuple(site_order))

    @cached_property
    def edge_index(self) -> dict:
        return {e: k for k, e in enumerate(self.edges)}

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _neighbors(self) -> dict:
        nb: dict = {v: [] for v in self.vertices}
        for j, i in self.edges:
            nb[j].append(i)
        return nb

    def neighbors(self, v) -> list:
        return list(self._neighbors[v])

    @cached_property
    def interior_edges(self) -> np.ndarray:
        return np.array([k for k, (j, _) in enumerate(self.edges) if j in self.interior],
                        dtype=np.intp)

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        return np.array([k for k, (j, _) in enumerate(self.edges) if j not in self.interior],
                        dtype=np.intp)

    @cached_property
    def boundary_edge_source(self) -> np.ndarray:
        """Position in ``boundary_vertices`` of each boundary edge's source."""
        pos = {v: k for k, v in enumerate(self.boundary_vertices)}
        return np.array([pos[self.edges[k][0]] for k in self.boundary_edges], dtype=np.intp)

    @cached_property
    def in_idx(self) -> np.ndarray:
        """For each interior-sourced edge ``j->i``: indices of ``k->j``, ``k != i``.

        Rows are padded with ``n_edges``, which kernels map to a zero slot.
        """
        idx = self.edge_index
        rows = []
        for k in self.interior_edges:
            j, i = self.edges[k]
            rows.append([idx[(q, j)] for q in self._neighbors[j] if q != i])
        return _pad(rows, self.n_edges)

    @cached_property
    def site_in(self) -> np.ndarray:
        """For each site: indices of all incoming edges, padded."""
        idx = self.edge_index
        return _pad([[idx[(q, s)] for q in self._neighbors[s]] for s in self.sites],
                    self.n_edges)


def _pad(rows: list[list[int]], fill: int) -> np.ndarray:
    width = max((len(r) for r in rows), default=0)
    out = np.full((len(rows), max(width, 1)), fill, dtype=np.intp)
    for k, r in enumerate(rows):
        out[k, :len(r)] = r
    return out


def _sort_key(v):
    return (type(v).__name__, v) if not isinstance(v, tuple) else ("", v)


@lru_cache(maxsize=None)
def grid_topology(N: int) -> Topology:
    g = make_grid(N)
    edges = []
    for c in g.vertices:
        for nb in g.neighbors(c):
            if c < nb:
                edges.append((c, nb))
    return Topology.build(edges, g.interior, boundary_order=g.ring, site_order=g.interior)


@dataclass(frozen=True, eq=False)
class GraphInstance:
    """A topology together with boundary values ``x_j`` for ``j`` outside ``B``."""

    topology: Topology
    boundary_values: np.ndarray  # aligned with topology.boundary_vertices
    grid: GridInstance | None = None
    boundary: BoundaryConfig | None = None

    @classmethod
    def from_grid(cls, x: BoundaryConfig) -> "GraphInstance":
        return cls(grid_topology(x.N), np.asarray(x.signs, dtype=np.int8), make_grid(x.N), x)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], interior: Iterable,
                   boundary_values: Mapping) -> "GraphInstance":
        topo = Topology.build(edges, interior)
        missing = [v for v in topo.boundary_vertices if v not in boundary_values]
        if missing:
            raise ValueError(f"boundary vertices without a value: {missing}")
        bad = [v for v in topo.boundary_vertices if boundary_values[v] not in (-1, 1)]
        if bad:
            raise ValueError(f"boundary values must be +-1: {bad}")
        vals = np.array([boundary_values[v] for v in topo.boundary_vertices], dtype=np.int8)
        return cls(topo, vals)

    @property
    def interior(self) -> frozenset:
        return self.topology.interior

    def boundary_value(self, v) -> int:
        return int(self.boundary_values[self.topology.boundary_vertices.index(v)])

    def boundary_mapping(self) -> dict:
        return {v: int(s) for v, s in zip(self.topology.boundary_vertices, self.boundary_values)}


def as_graph(g) -> GraphInstance:
    if isinstance(g, GraphInstance):
        return g
    if isinstance(g, BoundaryConfig):
        return GraphInstance.from_grid(g)
    raise TypeError(f"expected GraphInstance or BoundaryConfig, got {type(g).__name__}")


# --------------------------------------------------------------------------
# Array kernels


def init_array(topo: Topology, bvals: np.ndarray) -> np.ndarray:
    """Initial difference messages for a batch ``bvals[..., boundary_vertex]``."""
    bvals = np.asarray(bvals, dtype=np.int8)
    m = np.zeros(bvals.shape[:-1] + (topo.n_edges,), dtype=np.int8)
    m[..., topo.boundary_edges] = bvals[..., topo.boundary_edge_source]
    return m


def step_array(topo: Topology, m: np.ndarray) -> np.ndarray:
    pad = np.zeros(m.shape[:-1] + (1,), dtype=np.int16)
    mp = np.concatenate([m.astype(np.int16), pad], axis=-1)
    out = m.copy()
    out[..., topo.interior_edges] = np.sign(mp[..., topo.in_idx].sum(axis=-1))
    return out


def run_array(topo: Topology, bvals: np.ndarray, n_max: int) -> np.ndarray:
    """Difference-message history, shape ``(n_max + 1, *batch, n_edges)``."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    m = init_array(topo, bvals)
    out = np.empty((n_max + 1,) + m.shape, dtype=np.int8)
    out[0] = m
    for n in range(1, n_max + 1):
        m = step_array(topo, m)
        out[n] = m
    return out


def estimates_array(topo: Topology, m: np.ndarray) -> np.ndarray:
    pad = np.zeros(m.shape[:-1] + (1,), dtype=np.int16)
    mp = np.concatenate([m.astype(np.int16), pad], axis=-1)
    return mp[..., topo.site_in].sum(axis=-1)


def init_unnormalized_array(topo: Topology, bvals: np.ndarray) -> np.ndarray:
    """Initial unnormalized messages, shape ``(*batch, n_edges, 2)``.

    Slot 0 holds ``M(-1)`` and slot 1 holds ``M(+1)``.
    """
    bvals = np.asarray(bvals, dtype=np.int64)
    M = np.zeros(bvals.shape[:-1] + (topo.n_edges, 2), dtype=np.int64)
    xj = bvals[..., topo.boundary_edge_source]
    M[..., topo.boundary_edges, 0] = (xj != -1)
    M[..., topo.boundary_edges, 1] = (xj != 1)
    return M


def step_unnormalized_array(topo: Topology, M: np.ndarray) -> np.ndarray:
    pad = np.zeros(M.shape[:-2] + (1, 2), dtype=M.dtype)
    Mp = np.concatenate([M, pad], axis=-2)
    phi = Mp[..., topo.in_idx, :].sum(axis=-2)
    out = M.copy()
    out[..., topo.interior_edges, 0] = np.minimum(phi[..., 0], 1 + phi[..., 1])
    out[..., topo.interior_edges, 1] = np.minimum(phi[..., 1], 1 + phi[..., 0])
    return out


def run_unnormalized_array(topo: Topology, bvals: np.ndarray, n_max: int) -> np.ndarray:
    M = init_unnormalized_array(topo, bvals)
    out = np.empty((n_max + 1,) + M.shape, dtype=np.int64)
    out[0] = M
    for n in range(1, n_max + 1):
        M = step_unnormalized_array(topo, M)
        out[n] = M
    return out


def first_stable_array(history: np.ndarray) -> np.ndarray:
    """Per batch member: first ``n`` from which the history is constant, else -1.

    ``history`` has shape ``(n_max + 1, *batch, n_edges)``.
    """
    T = history.shape[0]
    if T == 1:
        return np.zeros(history.shape[1:-1], dtype=np.int64)
    changed = np.any(history[1:] != history[:-1], axis=-1)  # (T-1, *batch)
    # last step index k where states[k] != states[k+1]
    rev = changed[::-1]
    any_change = rev.any(axis=0)
    last = (T - 2) - np.argmax(rev, axis=0)
    result = np.where(any_change, last + 1, 0)
    return np.where(changed[-1], -1, result)


# --------------------------------------------------------------------------
# Object-level API


@dataclass(frozen=True, eq=False)
class MessageState:
    n: int
    values: np.ndarray
    graph: GraphInstance

    def __getitem__(self, edge) -> int:
        return int(self.values[self.graph.topology.edge_index[tuple(edge)]])

    def as_dict(self) -> dict:
        return {e: int(v) for e, v in zip(self.graph.topology.edges, self.values)}

    def __eq__(self, other) -> bool:
        return isinstance(other, MessageState) and np.array_equal(self.values, other.values)

    def to_json(self) -> dict:
        return {"n": self.n,
                "messages": [{"from": _jsonable(j), "to": _jsonable(i), "value": int(v)}
                             for (j, i), v in zip(self.graph.topology.edges, self.values)]}


@dataclass(frozen=True, eq=False)
class UnnormalizedState:
    n: int
    values: np.ndarray  # (n_edges, 2): M(-1), M(+1)
    graph: GraphInstance

    def __getitem__(self, edge) -> tuple[int, int]:
        row = self.values[self.graph.topology.edge_index[tuple(edge)]]
        return int(row[0]), int(row[1])

    def differences(self) -> np.ndarray:
        return self.values[:, 0] - self.values[:, 1]


@dataclass(frozen=True, eq=False)
class Trace:
    """Difference messages for ``n = 0..n_max``; ``history[n]`` is state ``n``."""

    graph: GraphInstance
    history: np.ndarray

    @property
    def n_max(self) -> int:
        return self.history.shape[0] - 1

    @property
    def boundary(self):
        return self.graph.boundary if self.graph.boundary is not None else self.graph.boundary_mapping()

    @property
    def states(self) -> tuple[MessageState, ...]:
        return tuple(self.state(n) for n in range(self.n_max + 1))

    def state(self, n: int) -> MessageState:
        return MessageState(n, self.history[n], self.graph)

    def __len__(self) -> int:
        return self.history.shape[0]

    def message(self, edge, n: int) -> int:
        return int(self.history[n, self.graph.topology.edge_index[tuple(edge)]])

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.states]


@dataclass(frozen=True)
class LocalSolutionField:
    """Integer value per interior site (estimates or exact local solutions)."""

    values: dict

    def __getitem__(self, site) -> int:
        return self.values[site]

    def __len__(self) -> int:
        return len(self.values)

    def items(self):
        return self.values.items()

    def to_array(self, N: int) -> np.ndarray:
        """Grid field as an ``N x N`` array indexed ``[b - 1, a - 1]``."""
        arr = np.zeros((N, N), dtype=np.int64)
        for (a, b), v in self.values.items():
            arr[b - 1, a - 1] = v
        return arr

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "LocalSolutionField":
        N = arr.shape[0]
        return cls({Coord(a, b): int(arr[b - 1, a - 1])
                    for b in range(1, N + 1) for a in range(1, N + 1)})

    def to_json(self) -> dict:
        return {_key(s): int(v) for s, v in sorted(self.values.items(), key=lambda kv: _sort_key(kv[0]))}

    def mismatches(self, other: "LocalSolutionField") -> list:
        return sorted((s for s in self.values if self.values[s] != other.values.get(s)),
                      key=_sort_key)


def _key(site) -> str:
    return f"{site[0]},{site[1]}" if isinstance(site, tuple) else str(site)


def _jsonable(v):
    return list(v) if isinstance(v, tuple) else v


def init_state(g) -> MessageState:
    g = as_graph(g)
    return MessageState(0, init_array(g.topology, g.boundary_values), g)


def step(s: MessageState, g=None) -> MessageState:
    g = s.graph if g is None else as_graph(g)
    return MessageState(s.n + 1, step_array(g.topology, s.values), g)


def run(g, n_max: int) -> Trace:
    g = as_graph(g)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    s = init_state(g)
    hist = [s.values]
    for _ in range(n_max):
        s = step(s, g)
        hist.append(s.values)
    return Trace(g, np.stack(hist))


def estimates(s: MessageState, g=None) -> LocalSolutionField:
    g = s.graph if g is None else as_graph(g)
    vals = estimates_array(g.topology, s.values)
    return LocalSolutionField({site: int(v) for site, v in zip(g.topology.sites, vals)})


def first_stable_iteration(t: Trace) -> int | None:
    if len(t) == 0:
        raise ValueError("empty trace")
    k = int(first_stable_array(t.history[:, None, :])[0])
    return None if k < 0 else k


def unnormalized_run(g, n_max: int) -> list[UnnormalizedState]:
    g = as_graph(g)
    hist = run_unnormalized_array(g.topology, g.boundary_values, n_max)
    return [UnnormalizedState(n, hist[n], g) for n in range(n_max + 1)]


def unnormalized_readout(s: UnnormalizedState) -> dict:
    """``sum_j M[j->i](z)`` per site, as ``(minus, plus)`` pairs."""
    topo = s.graph.topology
    pad = np.zeros((1, 2), dtype=s.values.dtype)
    Mp = np.concatenate([s.values, pad], axis=0)
    tot = Mp[topo.site_in].sum(axis=1)
    return {site: (int(a), int(b)) for site, (a, b) in zip(topo.sites, tot)}


@dataclass(frozen=True)
class ConsistencyReport:
    ok: bool
    n_checked: int
    first_violation: dict | None = None


def difference_consistency(g, n_max: int) -> ConsistencyReport:
    """Check ``M^n(-1) - M^n(+1) == m^n`` on every edge for ``n <= n_max``."""
    g = as_graph(g)
    topo = g.topology
    m = run_array(topo, g.boundary_values, n_max)
    M = run_unnormalized_array(topo, g.boundary_values, n_max)
    bad = np.argwhere(M[..., 0] - M[..., 1] != m)
    if len(bad):
        n, k = (int(v) for v in bad[0])
        j, i = topo.edges[k]
        return ConsistencyReport(False, n_max + 1, {
            "n": n, "edge": [_jsonable(j), _jsonable(i)],
            "M": [int(M[n, k, 0]), int(M[n, k, 1])], "m": int(m[n, k])})
    return ConsistencyReport(True, n_max + 1)


def difference_consistency_batch(topo: Topology, bvals: np.ndarray, n_max: int) -> np.ndarray:
    """Vectorised check over a batch; returns one boolean per boundary."""
    bvals = np.atleast_2d(bvals)
    m = init_array(topo, bvals)
    M = init_unnormalized_array(topo, bvals)
    ok = np.all(M[..., 0] - M[..., 1] == m, axis=-1)
    for _ in range(n_max):
        m = step_array(topo, m)
        M = step_unnormalized_array(topo, M)
        ok &= np.all(M[..., 0] - M[..., 1] == m, axis=-1)
    return ok


@dataclass
class RunResult:
    """Convenience bundle returned by :func:`solve`."""

    trace: Trace
    stable_from: int | None
    estimates: LocalSolutionField
    extra: dict = field(default_factory=dict)


def solve(g, n_max: int, readout_at: int | None = None) -> RunResult:
    """Run to ``n_max`` and read estimates at ``readout_at`` (default: last state)."""
    t = run(g, n_max)
    n = t.n_max if readout_at is None else readout_at
    return RunResult(t, first_stable_iteration(t), estimates(t.state(n)))
