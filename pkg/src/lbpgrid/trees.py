"""Tree instances: a small text format, random generation, and diameters.

File format, one statement per line (``#`` starts a comment)::

    edge u v
    interior u
    boundary v +1

Node names are arbitrary strings.  The edges must form a forest whose
interior nodes are connected; every non-interior neighbour of an interior
node needs a boundary value.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .messages import GraphInstance


class TreeSpecError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


@dataclass(frozen=True)
class TreeSpec:
    edges: tuple[tuple[str, str], ...]
    interior: frozenset
    boundary: dict

    def graph(self) -> GraphInstance:
        return GraphInstance.from_edges(self.edges, self.interior, self.boundary)

    def to_text(self) -> str:
        lines = [f"edge {u} {v}" for u, v in self.edges]
        lines += [f"interior {v}" for v in sorted(self.interior)]
        lines += [f"boundary {v} {s:+d}" for v, s in sorted(self.boundary.items())]
        return "\n".join(lines) + "\n"


def _adjacency(edges) -> dict:
    adj: dict = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def _bfs(adj: dict, src, allowed=None) -> dict:
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for w in adj.get(u, ()):
            if w not in dist and (allowed is None or w in allowed):
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def validate_tree(edges, interior) -> None:
    """Reject cycles, repeated edges and disconnected interiors."""
    parent: dict = {}

    def find(v):
        while parent.setdefault(v, v) != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    seen = set()
    for u, v in edges:
        key = frozenset((u, v))
        if u == v or key in seen:
            raise TreeSpecError(f"edge {u} {v} repeats or loops, so the graph is not a tree")
        seen.add(key)
        ru, rv = find(u), find(v)
        if ru == rv:
            raise TreeSpecError(f"edge {u} {v} closes a cycle")
        parent[ru] = rv
    interior = set(interior)
    if not interior:
        raise TreeSpecError("no interior nodes")
    adj = _adjacency(edges)
    reach = _bfs(adj, next(iter(sorted(interior))), interior)
    if set(reach) != interior:
        raise TreeSpecError("interior nodes do not form a subtree (not connected)")


def parse_tree_spec(text: str) -> TreeSpec:
    edges, interior, boundary = [], set(), {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "edge" and len(parts) == 3:
            edges.append((parts[1], parts[2]))
        elif kind == "interior" and len(parts) == 2:
            interior.add(parts[1])
        elif kind == "boundary" and len(parts) == 3:
            try:
                val = int(parts[2])
            except ValueError:
                val = 0
            if val not in (-1, 1):
                raise TreeSpecError(f"boundary value must be +1 or -1, got {parts[2]!r}", lineno)
            boundary[parts[1]] = val
        else:
            raise TreeSpecError(f"cannot parse {raw.strip()!r}", lineno)
    overlap = interior & set(boundary)
    if overlap:
        raise TreeSpecError(f"nodes both interior and boundary: {sorted(overlap)}")
    validate_tree(edges, interior)
    adj = _adjacency(edges)
    needed = {w for v in interior for w in adj.get(v, ()) if w not in interior}
    missing = needed - set(boundary)
    if missing:
        raise TreeSpecError(f"boundary nodes without a value: {sorted(missing)}")
    return TreeSpec(tuple(edges), frozenset(interior), {v: boundary[v] for v in sorted(needed)})


def load_tree_spec(path) -> TreeSpec:
    return parse_tree_spec(Path(path).read_text())


def diameter(spec: TreeSpec) -> int:
    """Diameter (in edges) of the interior plus its boundary edges."""
    keep = [(u, v) for u, v in spec.edges if u in spec.interior or v in spec.interior]
    adj = _adjacency(keep)
    if not adj:
        return 0
    # double sweep is exact on trees
    far = max(_bfs(adj, next(iter(sorted(adj)))).items(), key=lambda kv: (kv[1], kv[0]))[0]
    return max(_bfs(adj, far).values())


def random_tree(rng: random.Random, max_nodes: int = 20) -> TreeSpec:
    """A random labelled tree with a random connected interior and random boundary."""
    n = rng.randint(2, max_nodes)
    names = [f"v{k}" for k in range(n)]
    edges = [(names[rng.randrange(k)], names[k]) for k in range(1, n)]
    adj = _adjacency(edges)
    # grow a connected interior from a random seed, leaving room for a boundary
    target = rng.randint(1, n - 1)
    interior = {rng.choice(names)}
    frontier = set(adj[next(iter(interior))])
    while len(interior) < target and frontier:
        v = rng.choice(sorted(frontier))
        interior.add(v)
        frontier = {w for u in interior for w in adj[u]} - interior
    needed = sorted({w for v in interior for w in adj[v]} - interior)
    boundary = {v: rng.choice((-1, 1)) for v in needed}
    return TreeSpec(tuple(edges), frozenset(interior), boundary)


def star_tree(leaf_values) -> TreeSpec:
    edges = tuple(("c", f"l{k}") for k in range(len(leaf_values)))
    return TreeSpec(edges, frozenset({"c"}), {f"l{k}": s for k, s in enumerate(leaf_values)})


def path_tree(n: int, left: int, right: int) -> TreeSpec:
    """Path ``p0 - ... - p{n-1}`` with the two ends on the boundary."""
    names = [f"p{k}" for k in range(n)]
    edges = tuple(zip(names, names[1:]))
    return TreeSpec(edges, frozenset(names[1:-1]), {names[0]: left, names[-1]: right})
