"""Forward and backward convergence of difference messages on rectangles.

Everything here reads a finished :class:`~lbpgrid.messages.Trace`.  "Converges
in ``n`` iterations to ``sigma``" is checked on the finite window
``[n, n_max]`` of the trace, so callers must run long enough
(``n_max >= n0 + 2N`` for the backward lemma).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .grid import (ADJACENT_PAIRS, BoundaryConfig, Coord, DirectedEdge, Direction, GridInstance,
                   make_grid, orient_for_proof)
from .messages import LocalSolutionField, Trace, estimates, run
from .regions import closed_form_local_solutions, region_decomposition

INF = 1 << 30


class TraceWindowError(ValueError):
    """The trace is too short to decide a convergence statement."""


# --------------------------------------------------------------------------
# Geometry


@dataclass(frozen=True)
class Rectangle:
    corner1: Coord
    corner2: Coord

    @property
    def bounds(self) -> tuple[int, int, int, int]:
        (a1, b1), (a2, b2) = self.corner1, self.corner2
        return min(a1, a2), max(a1, a2), min(b1, b2), max(b1, b2)

    @cached_property
    def nodes(self) -> frozenset[Coord]:
        a0, a1, b0, b1 = self.bounds
        return frozenset(Coord(a, b) for a in range(a0, a1 + 1) for b in range(b0, b1 + 1))

    def __contains__(self, c) -> bool:
        a0, a1, b0, b1 = self.bounds
        return a0 <= c[0] <= a1 and b0 <= c[1] <= b1

    def __len__(self) -> int:
        a0, a1, b0, b1 = self.bounds
        return (a1 - a0 + 1) * (b1 - b0 + 1)

    def intersection(self, other: "Rectangle") -> "Rectangle | None":
        a0, a1, b0, b1 = self.bounds
        c0, c1, d0, d1 = other.bounds
        lo_a, hi_a, lo_b, hi_b = max(a0, c0), min(a1, c1), max(b0, d0), min(b1, d1)
        if lo_a > hi_a or lo_b > hi_b:
            return None
        return Rectangle(Coord(lo_a, lo_b), Coord(hi_a, hi_b))


@dataclass(frozen=True)
class CutRectangle:
    """Nodes of ``rectangle`` within L1 distance ``D - 1`` of ``corner1``."""

    rectangle: Rectangle
    D: int

    def __post_init__(self):
        if self.D < 1:
            raise ValueError("cut depth D must be a positive integer")

    @cached_property
    def nodes(self) -> frozenset[Coord]:
        a1, b1 = self.rectangle.corner1
        return frozenset(c for c in self.rectangle.nodes
                         if abs(c[0] - a1) + abs(c[1] - b1) <= self.D - 1)


@dataclass(frozen=True)
class LRegion:
    """Row and column through ``corner`` clipped to the rectangle it spans with ``far``."""

    corner: Coord
    far: Coord

    @cached_property
    def nodes(self) -> frozenset[Coord]:
        a1, b1 = self.corner
        a2, b2 = self.far
        col = {Coord(a1, b) for b in range(min(b1, b2), max(b1, b2) + 1)}
        row = {Coord(a, b1) for a in range(min(a1, a2), max(a1, a2) + 1)}
        return frozenset(col | row)

    @property
    def rectangle(self) -> Rectangle:
        return Rectangle(self.corner, self.far)


@dataclass(frozen=True)
class CompatibleTuple:
    i1: Coord
    i2: Coord
    d1: Direction
    d2: Direction

    @property
    def rectangle(self) -> Rectangle:
        return Rectangle(Coord(*self.i1), Coord(*self.i2))

    @property
    def directions(self) -> frozenset[Direction]:
        return frozenset((self.d1, self.d2))

    def to_json(self) -> dict:
        return {"i1": list(self.i1), "i2": list(self.i2), "d1": self.d1.name, "d2": self.d2.name}

    def __str__(self) -> str:
        return f"({tuple(self.i1)} > {tuple(self.i2)}, {self.d1.name}, {self.d2.name})"


def is_compatible(t: CompatibleTuple) -> bool:
    if not t.d1.is_adjacent(t.d2) or t.d1 == t.d2:
        return False
    dx, dy = t.i2[0] - t.i1[0], t.i2[1] - t.i1[1]
    # v(d1), v(d2) are orthogonal unit vectors, so the coefficients are projections
    (x1, y1), (x2, y2) = t.d1.vector, t.d2.vector
    return dx * x1 + dy * y1 >= 0 and dx * x2 + dy * y2 >= 0


def tuple_for(rect: Rectangle, d1: Direction, d2: Direction) -> CompatibleTuple:
    """The compatible tuple with directions ``d1, d2`` whose rectangle is ``rect``."""
    a0, a1, b0, b1 = rect.bounds
    vx = d1.vector[0] + d2.vector[0]
    vy = d1.vector[1] + d2.vector[1]
    i1 = Coord(a0 if vx > 0 else a1, b0 if vy > 0 else b1)
    i2 = Coord(a1 if vx > 0 else a0, b1 if vy > 0 else b0)
    return CompatibleTuple(i1, i2, d1, d2)


def messages_received_by(S: Iterable, D: Direction, g: GridInstance | None = None) -> set[DirectedEdge]:
    S = set(map(Coord._make, S))
    out = set()
    for c in S:
        src = Coord(c[0] - D.vector[0], c[1] - D.vector[1])
        if src not in S and (g is None or g.contains(src)):
            out.add(DirectedEdge(src, c))
    return out


def messages_sent_from(S: Iterable, D: Direction, g: GridInstance | None = None) -> set[DirectedEdge]:
    out = set()
    for c in map(Coord._make, S):
        tgt = c + D.vector
        if g is None or g.contains(tgt):
            out.add(DirectedEdge(c, tgt))
    return out


def bc_direction(t1: CompatibleTuple, t2: CompatibleTuple) -> Direction | None:
    if len(t1.directions & t2.directions) != 1:
        return None
    (rest,) = set(Direction) - (t1.directions | t2.directions)
    return rest


# --------------------------------------------------------------------------
# Trace predicates


@dataclass(frozen=True, eq=False)
class ConvergenceTimes:
    """Per directed edge: final value and first ``n`` from which it holds."""

    trace: Trace

    @cached_property
    def final(self) -> np.ndarray:
        return self.trace.history[-1]

    @cached_property
    def stable_from(self) -> np.ndarray:
        h = self.trace.history
        differs = h != h[-1]
        T = h.shape[0]
        last = T - 1 - np.argmax(differs[::-1], axis=0)
        return np.where(differs.any(axis=0), last + 1, 0)

    @property
    def n_max(self) -> int:
        return self.trace.n_max

    def time(self, edge, sigma: int) -> int:
        """First ``n`` with ``m^k == sigma`` for all ``k in [n, n_max]``, else ``INF``."""
        k = self.trace.graph.topology.edge_index[tuple(edge)]
        return int(self.stable_from[k]) if self.final[k] == sigma else INF

    def converged(self, edge, sigma: int, n: int) -> bool:
        if n > self.n_max:
            raise TraceWindowError(f"need iterations up to {n}, trace stops at {self.n_max}")
        return self.time(edge, sigma) <= n

    def grid_times(self, N: int) -> dict[tuple[int, Direction], np.ndarray]:
        """``T[(sigma, D)][a, b]``: convergence time of ``D(a, b)`` to ``sigma``."""
        topo = self.trace.graph.topology
        out = {}
        for sigma in (1, -1):
            for D in Direction:
                out[(sigma, D)] = np.full((N + 2, N + 2), INF, dtype=np.int64)
        for k, (j, i) in enumerate(topo.edges):
            D = Direction.from_vector((i[0] - j[0], i[1] - j[1]))
            sigma = int(self.final[k])
            if sigma:
                out[(sigma, D)][j[0], j[1]] = self.stable_from[k]
        return out


def _times(trace) -> ConvergenceTimes:
    return trace if isinstance(trace, ConvergenceTimes) else ConvergenceTimes(trace)


def _grid_of(trace) -> GridInstance:
    t = trace.trace if isinstance(trace, ConvergenceTimes) else trace
    if t.graph.grid is None:
        raise TypeError("convergence predicates need a grid trace")
    return t.graph.grid


def fc_hypothesis_time(trace, t: CompatibleTuple, sigma: int) -> int:
    """Smallest ``n0`` for which the tuple is FC(sigma, n0) on this trace."""
    ct = _times(trace)
    g = _grid_of(trace)
    rect = t.rectangle.nodes
    edges = messages_received_by(rect, t.d1, g) | messages_received_by(rect, t.d2, g)
    return max((ct.time(e, sigma) for e in edges), default=0)


def check_fc(trace, t: CompatibleTuple, sigma: int, n0: int) -> bool:
    if not is_compatible(t):
        raise ValueError(f"{t} is not a compatible tuple")
    ct = _times(trace)
    if n0 > ct.n_max:
        raise TraceWindowError(f"n0={n0} lies beyond the trace (n_max={ct.n_max})")
    return fc_hypothesis_time(ct, t, sigma) <= n0


@dataclass
class LemmaReport:
    kind: str
    tuples: tuple
    sigma: int
    n0: int
    hypothesis_holds: bool
    conclusion_holds: bool | None
    first_violation: dict | None = None
    vacuous: bool = False
    cut_holds: bool | None = None
    cut_times: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"tuple": [t.to_json() for t in self.tuples] if len(self.tuples) > 1
               else self.tuples[0].to_json(),
               "sigma": self.sigma, "n0": self.n0,
               "hypothesis_holds": self.hypothesis_holds,
               "conclusion_holds": self.conclusion_holds}
        if self.first_violation is not None:
            out["first_violation"] = self.first_violation
        if self.kind == "BC":
            out["vacuous"] = self.vacuous
        if self.cut_holds is not None:
            out["cut_holds"] = self.cut_holds
        return out


def _violation(edge: DirectedEdge, required: int, observed: int, ct: ConvergenceTimes) -> dict:
    return {"edge": [list(edge.source), list(edge.target)], "required_by": required,
            "converged_from": None if observed >= INF else observed,
            "final_value": int(ct.final[ct.trace.graph.topology.edge_index[tuple(edge)]])}


def verify_fc_lemma(trace, t: CompatibleTuple, sigma: int, n0: int) -> LemmaReport:
    """Check the forward lemma and its cut-rectangle refinement for one tuple.

    Messages sent from the rectangle in ``d1``/``d2`` must equal ``sigma`` from
    ``n0 + 2N - 1`` on; those sent from the depth-``D`` cut from ``n0 + D`` on.
    ``cut_times[D - 1]`` records when each cut actually converged.
    """
    ct = _times(trace)
    g = _grid_of(trace)
    N = g.N
    if n0 + 2 * N - 1 > ct.n_max:
        raise TraceWindowError(f"need n_max >= {n0 + 2 * N - 1}, trace has {ct.n_max}")
    rep = LemmaReport("FC", (t,), sigma, n0, check_fc(ct, t, sigma, n0), None)
    if not rep.hypothesis_holds:
        return rep
    rect = t.rectangle
    deadline = n0 + 2 * N - 1
    sent = sorted(messages_sent_from(rect.nodes, t.d1, g) | messages_sent_from(rect.nodes, t.d2, g))
    rep.conclusion_holds = True
    for e in sent:
        obs = ct.time(e, sigma)
        if obs > deadline:
            rep.conclusion_holds = False
            rep.first_violation = _violation(e, deadline, obs, ct)
            break
    rep.cut_holds = True
    a1, b1 = t.i1
    for D in range(1, 2 * N):
        cut = CutRectangle(rect, D).nodes
        times = [ct.time(e, sigma) for d in (t.d1, t.d2) for e in messages_sent_from(cut, d, g)]
        worst = max(times, default=0)
        rep.cut_times.append(worst)
        if worst > n0 + D and rep.cut_holds:
            rep.cut_holds = False
            bad = next(e for d in (t.d1, t.d2) for e in sorted(messages_sent_from(cut, d, g))
                       if ct.time(e, sigma) > n0 + D)
            if rep.first_violation is None:
                rep.first_violation = _violation(bad, n0 + D, ct.time(bad, sigma), ct)
    return rep


def check_bc(trace, t1: CompatibleTuple, t2: CompatibleTuple, sigma: int,
             n0: int) -> tuple[bool, Direction | None]:
    d = bc_direction(t1, t2)
    if d is None:
        return False, None
    ok = check_fc(trace, t1, sigma, n0) and check_fc(trace, t2, sigma, n0)
    return ok, d if ok else None


def verify_bc_lemma(trace, t1: CompatibleTuple, t2: CompatibleTuple, sigma: int,
                    n0: int) -> LemmaReport:
    ct = _times(trace)
    g = _grid_of(trace)
    N = g.N
    if n0 + 2 * N > ct.n_max:
        raise TraceWindowError(f"need n_max >= {n0 + 2 * N}, trace has {ct.n_max}")
    ok, d = check_bc(ct, t1, t2, sigma, n0)
    rep = LemmaReport("BC", (t1, t2), sigma, n0, ok, None)
    if not ok:
        return rep
    inter = t1.rectangle.intersection(t2.rectangle)
    rep.conclusion_holds = True
    if inter is None:
        rep.vacuous = True
        return rep
    deadline = n0 + 2 * N
    for e in sorted(messages_sent_from(inter.nodes, d, g)):
        obs = ct.time(e, sigma)
        if obs > deadline:
            rep.conclusion_holds = False
            rep.first_violation = _violation(e, deadline, obs, ct)
            break
    return rep


# --------------------------------------------------------------------------
# Exhaustive sweep over tuples for one trace


def all_rectangles(N: int) -> list[tuple[int, int, int, int]]:
    return [(a0, a1, b0, b1) for a0 in range(1, N + 1) for a1 in range(a0, N + 1)
            for b0 in range(1, N + 1) for b1 in range(b0, N + 1)]


def _range_max(T: np.ndarray, N: int) -> np.ndarray:
    """``R[a0, a1, b0, b1]`` = max of ``T`` over the rectangle (interior indices)."""
    R = np.full((N + 2, N + 2, N + 2, N + 2), -1, dtype=np.int64)
    for a0 in range(1, N + 1):
        cols = np.maximum.accumulate(T[a0:N + 1, :], axis=0)  # over a in [a0, a1]
        for b0 in range(1, N + 1):
            R[a0, a0:N + 1, b0, b0:N + 1] = np.maximum.accumulate(cols[:, b0:N + 1], axis=1)
    return R


@dataclass
class LemmaSweep:
    """Counts for one trace; ``violations`` lists every failed conclusion."""

    fc_instances: int = 0
    fc_verified: int = 0
    cut_instances: int = 0
    cut_verified: int = 0
    bc_instances: int = 0
    bc_verified: int = 0
    bc_vacuous: int = 0
    window_skipped: int = 0
    violations: list[dict] = field(default_factory=list)

    def merge(self, other: "LemmaSweep") -> "LemmaSweep":
        for k in ("fc_instances", "fc_verified", "cut_instances", "cut_verified",
                  "bc_instances", "bc_verified", "bc_vacuous", "window_skipped"):
            setattr(self, k, getattr(self, k) + getattr(other, k))
        self.violations.extend(other.violations)
        return self

    @property
    def ok(self) -> bool:
        return not self.violations

    def counts(self) -> dict:
        return {k: getattr(self, k) for k in (
            "fc_instances", "fc_verified", "cut_instances", "cut_verified",
            "bc_instances", "bc_verified", "bc_vacuous", "window_skipped")}


def _received_time(T: dict, sigma: int, D: Direction, rect, N: int) -> int:
    a0, a1, b0, b1 = rect
    G = T[(sigma, D)]
    if D is Direction.E:
        vals = G[a0 - 1, b0:b1 + 1]
    elif D is Direction.W:
        vals = G[a1 + 1, b0:b1 + 1]
    elif D is Direction.N:
        vals = G[a0:a1 + 1, b0 - 1]
    else:
        vals = G[a0:a1 + 1, b1 + 1]
    return int(vals.max())


def sweep_lemmas(trace, n0: int | None = 0) -> LemmaSweep:
    """Verify every FC, cut-rectangle and BC instance whose hypothesis holds.

    With ``n0=None`` each instance is checked at the earliest time its
    hypothesis holds, which implies the statement for every later ``n0``.
    Instances whose deadline falls beyond the trace are counted as skipped.
    """
    ct = _times(trace)
    g = _grid_of(trace)
    N = g.N
    T = ct.grid_times(N)
    rects = all_rectangles(N)
    out = LemmaSweep()
    rmax = {key: _range_max(arr, N) for key, arr in T.items()}
    aa, bb = np.meshgrid(np.arange(N + 2), np.arange(N + 2), indexing="ij")
    holding: dict[tuple[int, tuple], list[tuple[tuple, int]]] = {}
    for sigma in (1, -1):
        for pair in ADJACENT_PAIRS:
            d1, d2 = pair
            lst = holding.setdefault((sigma, pair), [])
            for rect in rects:
                h = max(_received_time(T, sigma, d1, rect, N), _received_time(T, sigma, d2, rect, N))
                start = h if n0 is None else n0
                if h > start or h >= INF:
                    continue
                if start + 2 * N > ct.n_max:
                    out.window_skipped += 1
                    continue
                lst.append((rect, start))
                a0, a1, b0, b1 = rect
                out.fc_instances += 1
                worst = max(rmax[(sigma, d1)][a0, a1, b0, b1], rmax[(sigma, d2)][a0, a1, b0, b1])
                if worst <= start + 2 * N - 1:
                    out.fc_verified += 1
                else:
                    out.violations.append({"lemma": "FC", "sigma": sigma, "n0": start,
                                           "tuple": str(tuple_for(_rect(rect), d1, d2)),
                                           "converged_from": int(worst)})
                # cut rectangles: node at L1 distance d from i1 must converge by start + d + 1
                t = tuple_for(_rect(rect), d1, d2)
                dist = np.abs(aa - t.i1[0]) + np.abs(bb - t.i1[1])
                sl = (slice(a0, a1 + 1), slice(b0, b1 + 1))
                need = np.maximum(T[(sigma, d1)][sl], T[(sigma, d2)][sl]) - dist[sl]
                out.cut_instances += 1
                if need.max() <= start + 1:
                    out.cut_verified += 1
                else:
                    out.violations.append({"lemma": "cut", "sigma": sigma, "n0": start,
                                           "tuple": str(t)})
    for sigma in (1, -1):
        for p1, p2 in _bc_pair_kinds():
            d = bc_direction(CompatibleTuple(Coord(1, 1), Coord(1, 1), *p1),
                             CompatibleTuple(Coord(1, 1), Coord(1, 1), *p2))
            L1, L2 = holding[(sigma, p1)], holding[(sigma, p2)]
            if not L1 or not L2:
                continue
            r1 = np.array([r for r, _ in L1])
            r2 = np.array([r for r, _ in L2])
            s1 = np.array([s for _, s in L1])
            s2 = np.array([s for _, s in L2])
            lo_a = np.maximum(r1[:, None, 0], r2[None, :, 0])
            hi_a = np.minimum(r1[:, None, 1], r2[None, :, 1])
            lo_b = np.maximum(r1[:, None, 2], r2[None, :, 2])
            hi_b = np.minimum(r1[:, None, 3], r2[None, :, 3])
            start = np.maximum(s1[:, None], s2[None, :])
            fits = start + 2 * N <= ct.n_max
            empty = (lo_a > hi_a) | (lo_b > hi_b)
            worst = rmax[(sigma, d)][np.clip(lo_a, 0, N + 1), np.clip(hi_a, 0, N + 1),
                                     np.clip(lo_b, 0, N + 1), np.clip(hi_b, 0, N + 1)]
            good = empty | (worst <= start + 2 * N)
            out.window_skipped += int((~fits).sum())
            out.bc_instances += int(fits.sum())
            out.bc_vacuous += int((fits & empty).sum())
            out.bc_verified += int((fits & good).sum())
            for i, j in np.argwhere(fits & ~good)[:20]:
                out.violations.append({
                    "lemma": "BC", "sigma": sigma, "n0": int(start[i, j]),
                    "tuples": [str(tuple_for(_rect(tuple(r1[i])), *p1)),
                               str(tuple_for(_rect(tuple(r2[j])), *p2))],
                    "direction": d.name})
    return out


def _rect(r) -> Rectangle:
    a0, a1, b0, b1 = (int(v) for v in r)
    return Rectangle(Coord(a0, b0), Coord(a1, b1))


def _bc_pair_kinds():
    pairs = list(ADJACENT_PAIRS)
    return [(p, q) for k, p in enumerate(pairs) for q in pairs[k + 1:]
            if len(set(p) & set(q)) == 1]


# --------------------------------------------------------------------------
# Replaying the case analysis behind the 2N theorem


@dataclass
class Observation:
    label: str
    sigma: int
    tuples: tuple[CompatibleTuple, ...]
    holds: bool | None = None
    skipped: bool = False  # a named site lies off the interior, so the fact is empty


@dataclass
class ProofReplay:
    boundary: BoundaryConfig
    oriented: BoundaryConfig
    case: str
    observations: list[Observation]
    derived: LocalSolutionField | None
    closed_form: LocalSolutionField
    estimates: LocalSolutionField
    undetermined: list = field(default_factory=list)
    conflicts: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (all(o.skipped or o.holds for o in self.observations)
                and not self.undetermined and not self.conflicts
                and self.derived == self.closed_form == self.estimates)


def case_observations(g: GridInstance, x: BoundaryConfig, case: str) -> list[Observation]:
    """The FC/BC facts the case analysis relies on, for an oriented boundary."""
    N = g.N
    c = g.corners
    sw, se, ne, nw = c["sw"], c["se"], c["ne"], c["nw"]
    E, W, S, Nn = Direction.E, Direction.W, Direction.S, Direction.N
    T = CompatibleTuple
    obs: list[Observation] = []
    if case == "C0":
        obs.append(Observation("dagger", -1, (T(ne, sw, S, W), T(se, nw, Nn, W))))
    elif case == "C1":
        a1 = max(p.a for p in x.r_plus if p.b == 0)
        b2 = max(p.b for p in x.r_plus if p.a == 0)
        obs += [
            Observation("I", 1, (T(sw, Coord(a1, b2), E, Nn),)),
            Observation("II", -1, (T(ne, sw, W, S),)),
            Observation("III", -1, (T(se, Coord(a1 + 1, N), Nn, W), T(ne, Coord(a1 + 1, 1), S, W))),
            Observation("IV", -1, (T(nw, Coord(N, b2 + 1), E, S), T(ne, Coord(1, b2 + 1), S, W))),
        ]
    elif case == "C2":
        a1 = max(p.a for p in x.r_plus if p.b == N + 1)
        a2 = max(p.a for p in x.r_plus if p.b == 0)
        obs += [
            Observation("i", 1, (T(sw, Coord(a2, N), E, Nn),)),
            Observation("ii", -1, (T(ne, Coord(a1 + 1, 1), W, S),)),
            Observation("iii", 1, (T(sw, Coord(a1, N), Nn, E), T(nw, Coord(a1, 1), S, E))),
            Observation("iv", -1, (T(ne, Coord(a2 + 1, 1), W, S), T(se, Coord(a2 + 1, N), Nn, W))),
        ]
    else:
        raise ValueError(f"unknown case {case!r}")
    for o in obs:
        if not all(g.is_interior(t.i1) and g.is_interior(t.i2) for t in o.tuples):
            o.skipped = True
    return obs


def replay_proof(x: BoundaryConfig, n_max: int | None = None) -> ProofReplay:
    """Re-derive ``o_hat^{2N}`` from the case observations and the two lemmas.

    The boundary is normalised and rotated into its canonical case, the
    observations are checked on the trace, and the message values they
    guarantee (via the forward and backward lemmas, plus the boundary
    condition) are summed per site without looking at the trace again.
    """
    g = make_grid(x.N)
    N = g.N
    z, _, case = orient_for_proof(g, x)
    trace = run(z, 2 * N + 10 if n_max is None else n_max)
    ct = ConvergenceTimes(trace)
    obs = case_observations(g, z, case)
    guaranteed: dict[DirectedEdge, int] = {}
    conflicts = []

    def pin(edges, sigma):
        for e in edges:
            if guaranteed.get(e, sigma) != sigma:
                conflicts.append(e)
            guaranteed[e] = sigma

    zb = z.as_dict()
    for j, i in trace.graph.topology.edges:
        if j in zb:
            pin([DirectedEdge(j, i)], zb[j])
    for o in obs:
        if o.skipped:
            continue
        if len(o.tuples) == 1:
            (t,) = o.tuples
            o.holds = check_fc(ct, t, o.sigma, 0)
            if o.holds:
                rect = t.rectangle.nodes
                pin(messages_sent_from(rect, t.d1, g) | messages_sent_from(rect, t.d2, g), o.sigma)
        else:
            t1, t2 = o.tuples
            o.holds, d = check_bc(ct, t1, t2, o.sigma, 0)
            if o.holds:
                for t in (t1, t2):
                    rect = t.rectangle.nodes
                    pin(messages_sent_from(rect, t.d1, g) | messages_sent_from(rect, t.d2, g), o.sigma)
                inter = t1.rectangle.intersection(t2.rectangle)
                if inter is not None:
                    pin(messages_sent_from(inter.nodes, d, g), o.sigma)
    derived = {}
    undetermined = []
    for site in g.interior:
        incoming = [DirectedEdge(nb, site) for nb in g.neighbors(site)]
        missing = [e for e in incoming if e not in guaranteed]
        if missing:
            undetermined.extend(missing)
            continue
        derived[site] = sum(guaranteed[e] for e in incoming)
    closed = closed_form_local_solutions(region_decomposition(g, z))
    est = estimates(trace.state(2 * N))
    return ProofReplay(x, z, case, obs, LocalSolutionField(derived) if not undetermined else None,
                       closed, est, undetermined, conflicts)


def fig2_example() -> dict:
    """Edge sets of the rectangle ``R_(1,1)^(2,4)`` used in the lemma figure."""
    g = make_grid(4)
    rect = Rectangle(Coord(1, 1), Coord(2, 4))
    t = CompatibleTuple(Coord(1, 1), Coord(2, 4), Direction.E, Direction.N)
    return {
        "received": messages_received_by(rect.nodes, Direction.N, g)
        | messages_received_by(rect.nodes, Direction.E, g),
        "sent": messages_sent_from(rect.nodes, Direction.N, g)
        | messages_sent_from(rect.nodes, Direction.E, g),
        "tuple": t,
    }


def rectangles_of(pairs: Sequence[tuple[Direction, Direction]] = ADJACENT_PAIRS, N: int = 1):
    for rect, (d1, d2) in product(all_rectangles(N), pairs):
        yield tuple_for(_rect(rect), d1, d2)
