"""Exact min-marginals, local solutions and global solutions.

Two independent solvers are provided for the grid:

* full enumeration of interior configurations (also used for trees), and
* a forward/backward sweep over row configurations.

Enumeration order is row-major over the interior, a configuration being an
``|B|``-bit counter whose bit ``k`` set means site ``k`` is ``+1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .grid import BoundaryConfig, Coord, GridInstance, make_grid
from .messages import GraphInstance, LocalSolutionField, as_graph

#: Default size guards (largest N accepted).
CAP_ENUM = 4
CAP_DP = 12
#: Enumeration can be pushed to this N with an explicit override, never further.
HARD_CAP_ENUM = 5


class SizeGuardError(ValueError):
    pass


@dataclass(frozen=True)
class InteriorConfig:
    """A +-1 value for every interior site."""

    values: Mapping

    def __getitem__(self, site) -> int:
        return self.values[site]

    @classmethod
    def from_bits(cls, sites, k: int) -> "InteriorConfig":
        return cls({s: 1 if (k >> i) & 1 else -1 for i, s in enumerate(sites)})

    @classmethod
    def constant(cls, g: GridInstance, sign: int) -> "InteriorConfig":
        return cls({c: sign for c in g.interior})


@dataclass(frozen=True)
class MinMarginals:
    o_minus: dict
    o_plus: dict

    @property
    def sites(self) -> list:
        return list(self.o_minus)

    @property
    def global_minimum(self) -> int:
        return min(min(self.o_minus[s], self.o_plus[s]) for s in self.o_minus)

    def __eq__(self, other) -> bool:
        return (isinstance(other, MinMarginals) and self.o_minus == other.o_minus
                and self.o_plus == other.o_plus)

    def to_json(self) -> list[dict]:
        out = []
        for s in self.o_minus:
            out.append({"coord": list(s) if isinstance(s, tuple) else s,
                        "o_minus": self.o_minus[s], "o_plus": self.o_plus[s],
                        "local": self.o_minus[s] - self.o_plus[s]})
        return out


@dataclass(frozen=True)
class GlobalSolutionSet:
    minimum: int
    configs: tuple[InteriorConfig, ...]

    def __len__(self) -> int:
        return len(self.configs)

    def values_at(self, site) -> set[int]:
        return {c[site] for c in self.configs}


def count_odd_bonds(xB: InteriorConfig | Mapping, xdB: BoundaryConfig) -> int:
    """Odd bonds on edges with at least one interior endpoint."""
    g = make_grid(xdB.N)
    vals = xB.values if isinstance(xB, InteriorConfig) else xB
    if set(vals) != set(g.interior):
        raise ValueError("interior configuration must cover exactly the interior sites")
    bnd = xdB.as_dict()

    def value(c):
        return vals[c] if g.is_interior(c) else bnd[c]

    total = 0
    for c in g.interior:
        for nb in g.neighbors(c):
            # interior-interior edges are seen from both ends; count once
            if g.is_interior(nb) and nb < c:
                continue
            total += value(c) != value(nb)
    return total


# --------------------------------------------------------------------------
# Enumeration (generic over graphs)


def _edge_lists(graph: GraphInstance):
    topo = graph.topology
    pos = {s: k for k, s in enumerate(topo.sites)}
    inner, outer = [], []
    for j, i in topo.edges:
        if j in topo.interior and i in topo.interior:
            if pos[j] < pos[i]:
                inner.append((pos[j], pos[i]))
        elif i in topo.interior:
            outer.append((pos[i], graph.boundary_value(j)))
    return np.array(inner, dtype=np.intp).reshape(-1, 2), outer


def _config_costs(graph: GraphInstance, chunk: int = 1 << 18) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(bits, cost)`` for consecutive blocks of configuration counters."""
    n = len(graph.topology.sites)
    inner, outer = _edge_lists(graph)
    total = 1 << n
    shifts = np.arange(n, dtype=np.int64)
    for lo in range(0, total, chunk):
        k = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        bits = ((k[:, None] >> shifts) & 1).astype(bool)
        cost = np.zeros(len(k), dtype=np.int32)
        if len(inner):
            cost += (bits[:, inner[:, 0]] != bits[:, inner[:, 1]]).sum(axis=1, dtype=np.int32)
        for site, xj in outer:
            cost += bits[:, site] != (xj > 0)
        yield bits, cost


def enumerate_min_marginals(g, max_sites: int = 25) -> MinMarginals:
    graph = as_graph(g)
    sites = graph.topology.sites
    if len(sites) > max_sites:
        raise SizeGuardError(f"{len(sites)} interior sites exceed enumeration limit {max_sites}")
    big = np.iinfo(np.int32).max
    o_minus = np.full(len(sites), big, dtype=np.int64)
    o_plus = np.full(len(sites), big, dtype=np.int64)
    for bits, cost in _config_costs(graph):
        c = cost[:, None]
        o_plus = np.minimum(o_plus, np.where(bits, c, big).min(axis=0))
        o_minus = np.minimum(o_minus, np.where(bits, big, c).min(axis=0))
    return MinMarginals({s: int(v) for s, v in zip(sites, o_minus)},
                        {s: int(v) for s, v in zip(sites, o_plus)})


def _check_enum_size(N: int, cap: int) -> None:
    if N > min(cap, HARD_CAP_ENUM):
        raise SizeGuardError(
            f"enumeration oracle limited to N <= {min(cap, HARD_CAP_ENUM)} (got N={N}); "
            f"raise the cap to {HARD_CAP_ENUM} explicitly or use the row-sweep oracle")


def brute_force_min_marginals(g: GridInstance, x: BoundaryConfig, cap: int = CAP_ENUM) -> MinMarginals:
    _check_enum_size(g.N, cap)
    return enumerate_min_marginals(GraphInstance.from_grid(x))


def global_solutions(g: GridInstance, x: BoundaryConfig, cap: int = CAP_ENUM) -> GlobalSolutionSet:
    _check_enum_size(g.N, cap)
    return enumerate_global_solutions(GraphInstance.from_grid(x))


def enumerate_global_solutions(g) -> GlobalSolutionSet:
    graph = as_graph(g)
    sites = graph.topology.sites
    best = None
    members: list[np.ndarray] = []
    for bits, cost in _config_costs(graph):
        m = int(cost.min())
        if best is None or m < best:
            best, members = m, []
        if m == best:
            members.append(bits[cost == m])
    rows = np.concatenate(members) if members else np.zeros((0, len(sites)), bool)
    configs = tuple(InteriorConfig({s: 1 if v else -1 for s, v in zip(sites, row)})
                    for row in rows)
    return GlobalSolutionSet(best, configs)


# --------------------------------------------------------------------------
# Row sweep


def _popcount(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.int64)
    out = np.zeros_like(v)
    while np.any(v):
        out += v & 1
        v >>= 1
    return out


def _row_bits(values) -> int:
    return sum(1 << k for k, s in enumerate(values) if s > 0)


def dp_min_marginals(g: GridInstance, x: BoundaryConfig, cap: int = CAP_DP) -> MinMarginals:
    """Min-marginals from a forward and a backward sweep over row states.

    Row state ``s`` of row ``b`` has bit ``a - 1`` set when site ``(a, b)``
    is ``+1``.  ``fwd[b][s]`` is the least cost of rows ``1..b`` (with the
    bottom boundary) ending in ``s``; ``bwd[b][s]`` the least cost of rows
    above ``b`` (with the top boundary) given row ``b`` is ``s``.
    """
    N = g.N
    if N > cap:
        raise SizeGuardError(f"row-sweep oracle limited to N <= {cap} (got N={N})")
    xv = x.as_dict()
    S = 1 << N
    states = np.arange(S, dtype=np.int64)
    pc = _popcount(states).astype(np.int32)
    hamming = pc[states[:, None] ^ states[None, :]]
    bits = ((states[:, None] >> np.arange(N)) & 1).astype(bool)

    def unary(b: int) -> np.ndarray:
        inrow = pc[(states ^ (states >> 1)) & ((1 << (N - 1)) - 1)] if N > 1 else np.zeros(S, np.int32)
        left = bits[:, 0] != (xv[Coord(0, b)] > 0)
        right = bits[:, N - 1] != (xv[Coord(N + 1, b)] > 0)
        return inrow + left + right

    bottom = pc[states ^ _row_bits(xv[Coord(a, 0)] for a in range(1, N + 1))]
    top = pc[states ^ _row_bits(xv[Coord(a, N + 1)] for a in range(1, N + 1))]
    U = [None] + [unary(b) for b in range(1, N + 1)]

    fwd = [None] * (N + 1)
    fwd[1] = U[1] + bottom
    for b in range(2, N + 1):
        fwd[b] = U[b] + _min_plus(fwd[b - 1], hamming)
    bwd = [None] * (N + 1)
    bwd[N] = top
    for b in range(N - 1, 0, -1):
        bwd[b] = _min_plus(U[b + 1] + bwd[b + 1], hamming)

    o_minus, o_plus = {}, {}
    for b in range(1, N + 1):
        tot = fwd[b] + bwd[b]
        for a in range(1, N + 1):
            on = bits[:, a - 1]
            o_plus[Coord(a, b)] = int(tot[on].min())
            o_minus[Coord(a, b)] = int(tot[~on].min())
    # reorder to row-major interior order
    order = g.interior
    return MinMarginals({c: o_minus[c] for c in order}, {c: o_plus[c] for c in order})


def _min_plus(vec: np.ndarray, mat: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """``out[t] = min_s vec[s] + mat[s, t]`` (mat is symmetric here)."""
    S = len(vec)
    out = np.empty(S, dtype=np.int64)
    for lo in range(0, S, chunk):
        out[lo:lo + chunk] = (vec[:, None] + mat[:, lo:lo + chunk]).min(axis=0)
    return out


def dp_global_minimum(g: GridInstance, x: BoundaryConfig, cap: int = CAP_DP) -> int:
    return dp_min_marginals(g, x, cap).global_minimum


def local_solutions(mm: MinMarginals) -> LocalSolutionField:
    return LocalSolutionField({s: mm.o_minus[s] - mm.o_plus[s] for s in mm.o_minus})


def exact_local_solutions(x: BoundaryConfig, cap_enum: int = CAP_ENUM,
                          cap_dp: int = CAP_DP, method: str = "auto") -> LocalSolutionField:
    """Local solutions via enumeration for small ``N``, the row sweep otherwise."""
    g = make_grid(x.N)
    if method == "enum" or (method == "auto" and x.N <= cap_enum):
        return local_solutions(brute_force_min_marginals(g, x, cap_enum))
    return local_solutions(dp_min_marginals(g, x, cap_dp))
