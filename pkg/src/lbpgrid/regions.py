"""Region decomposition of the interior for a one-run boundary.

Shortest paths joining the two endpoints of a run (through interior sites or
boundary sites of the run's sign) are enumerated from the breadth-first
predecessor structure.  Among them the inner path encloses the fewest nodes
together with the run, the outer path the most.  The enclosed sets give the
inner/outer regions, and from those the five classes carrying local solution
``+4, +2, 0, -2, -4``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .grid import BoundaryConfig, Coord, GridInstance, classify_boundary, corner_set, make_grid
from .messages import LocalSolutionField

log = logging.getLogger(__name__)

#: Paths enumerated per run before falling back to oracle-derived regions.
PATH_CAP = 10**6

CLASS_VALUES = {"inner_plus": 4, "delta_plus": 2, "outer_both": 0,
                "delta_minus": -2, "inner_minus": -4}


class PathExplosion(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"{count} shortest paths exceed the cap of {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class SimplePath:
    nodes: tuple[Coord, ...]

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)


def _allowed(g: GridInstance, x: BoundaryConfig, sign: int, ends: Iterable[Coord]):
    ends = set(ends)
    return lambda c: c in ends or g.is_interior(c) or x[c] == sign


def _bfs(g: GridInstance, src: Coord, ok) -> dict[Coord, int]:
    dist = {src: 0}
    q = deque([src])
    while q:
        c = q.popleft()
        for nb in g.neighbors(c):
            if nb not in dist and ok(nb):
                dist[nb] = dist[c] + 1
                q.append(nb)
    return dist


def run_endpoints(g: GridInstance, x: BoundaryConfig, sign: int) -> tuple[Coord, Coord]:
    rs = classify_boundary(g, x)
    if not rs.one_run:
        raise ValueError(f"{x} is not a one-run boundary ({rs.kind})")
    return rs.plus_endpoints if sign > 0 else rs.minus_endpoints


def run_arc(g: GridInstance, x: BoundaryConfig, sign: int) -> list[Coord]:
    """Nodes of the run of ``sign`` in counter-clockwise ring order."""
    rs = classify_boundary(g, x)
    r = next(r for r in rs.runs if r.sign == sign)
    L = len(g.ring)
    return [g.ring[(r.start + k) % L] for k in range(r.length)]


def count_shortest_paths(g: GridInstance, x: BoundaryConfig, sign: int) -> tuple[int, int]:
    """``(k, count)``: node count of a shortest path and how many there are."""
    s, t = run_endpoints(g, x, sign)
    ok = _allowed(g, x, sign, (s, t))
    ds = _bfs(g, s, ok)
    if t not in ds:
        raise ValueError(f"no admissible path between run endpoints {s} and {t}")
    ways = {s: 1}
    for c in sorted(ds, key=ds.get):
        if c == s:
            continue
        ways[c] = sum(ways[p] for p in g.neighbors(c) if ds.get(p) == ds[c] - 1)
    return ds[t] + 1, ways[t]


def shortest_simple_paths(g: GridInstance, x: BoundaryConfig, sign: int,
                          cap: int = PATH_CAP) -> tuple[int, list[SimplePath]]:
    """All minimum-length admissible paths between the endpoints of a run.

    Paths run from the clockwise-last to the first node of the run, i.e.
    they close the loop traced by the run in ring order.
    """
    first, last = run_endpoints(g, x, sign)
    k, count = count_shortest_paths(g, x, sign)
    if count > cap:
        raise PathExplosion(count, cap)
    ok = _allowed(g, x, sign, (first, last))
    d_first = _bfs(g, first, ok)
    paths: list[SimplePath] = []
    # walk from `last` back toward `first` along strictly decreasing distance
    stack = [(last, (last,))]
    while stack:
        c, acc = stack.pop()
        if c == first:
            paths.append(SimplePath(acc))
            continue
        for p in g.neighbors(c):
            if d_first.get(p) == d_first[c] - 1:
                stack.append((p, acc + (p,)))
    paths.sort(key=lambda p: p.nodes)
    return k, paths


def enclosed_nodes(g: GridInstance, loop: list[Coord]) -> frozenset[Coord]:
    """Grid nodes strictly inside the closed lattice curve ``loop``.

    ``loop`` lists the curve's nodes in order; consecutive nodes (and the
    last and first) must be grid neighbours.  A node off the curve is inside
    when the curve winds around it a nonzero number of times, so segments
    traversed back and forth enclose nothing.
    """
    if not loop:
        raise ValueError("empty curve")
    pts = list(loop)
    for p, q in zip(pts, pts[1:] + pts[:1]):
        if len(pts) > 1 and abs(p[0] - q[0]) + abs(p[1] - q[1]) != 1:
            raise ValueError(f"curve is not closed: {p} and {q} are not neighbours")
    on = set(pts)
    size = g.N + 2
    # winding number of a rightward ray from each node, accumulated per row:
    # an upward vertical unit step at column c adds +1 to every node left of c
    diff = [[0] * (size + 1) for _ in range(size)]
    for p, q in zip(pts, pts[1:] + pts[:1]):
        if p[0] != q[0] or p == q:
            continue
        row, sgn = (p[1], 1) if q[1] > p[1] else (q[1], -1)
        diff[row][p[0]] += sgn
    inside = set()
    for b in range(size):
        w = 0
        for a in range(size - 1, -1, -1):
            w += diff[b][a + 1]
            if w and (a, b) not in on:
                inside.add(Coord(a, b))
    return frozenset(inside)


def _loop(run: list[Coord], path: SimplePath) -> list[Coord]:
    # run goes first..last; path goes last..first
    return run + list(path.nodes[1:-1])


@dataclass(frozen=True)
class RegionDecomposition:
    N: int
    boundary: BoundaryConfig
    P_plus_inner: SimplePath | None
    P_plus_outer: SimplePath | None
    P_minus_inner: SimplePath | None
    P_minus_outer: SimplePath | None
    I_plus: frozenset
    O_plus: frozenset
    I_minus: frozenset
    O_minus: frozenset
    delta_I_plus: frozenset
    delta_I_minus: frozenset
    corners: frozenset
    fallback: bool = False
    diagnostics: tuple[str, ...] = field(default=())

    def _B(self, s):
        return frozenset(c for c in s if 1 <= c[0] <= self.N and 1 <= c[1] <= self.N)

    @property
    def cal_I_plus(self):
        return self._B(self.I_plus)

    @property
    def cal_I_minus(self):
        return self._B(self.I_minus)

    @property
    def cal_O_plus(self):
        return self._B(self.O_plus)

    @property
    def cal_O_minus(self):
        return self._B(self.O_minus)

    @property
    def classes(self) -> dict[str, frozenset]:
        return {
            "inner_plus": self.cal_I_plus - self.delta_I_plus,
            "delta_plus": self.delta_I_plus,
            "outer_both": self.cal_O_plus & self.cal_O_minus,
            "delta_minus": self.delta_I_minus,
            "inner_minus": self.cal_I_minus - self.delta_I_minus,
        }

    def partition_errors(self) -> list[str]:
        g = make_grid(self.N)
        errs = []
        seen: dict[Coord, str] = {}
        for name, cls in self.classes.items():
            for c in cls:
                if c in seen:
                    errs.append(f"{c} in both {seen[c]} and {name}")
                seen[c] = name
        missing = [c for c in g.interior if c not in seen]
        if missing:
            errs.append(f"sites in no class: {missing}")
        return errs

    def class_of(self, c: Coord) -> str:
        for name, cls in self.classes.items():
            if c in cls:
                return name
        raise KeyError(c)

    def to_json(self) -> dict:
        out = {name: sorted([list(c) for c in cls]) for name, cls in self.classes.items()}
        out["corners"] = sorted(self.corners)
        out["fallback"] = self.fallback
        for key in ("P_plus_inner", "P_plus_outer", "P_minus_inner", "P_minus_outer"):
            p = getattr(self, key)
            out[key] = None if p is None else [list(c) for c in p.nodes]
        return out


def _touches(g: GridInstance, c: Coord, s: frozenset) -> bool:
    return any(nb in s for nb in g.neighbors(c))


def _extreme_paths(g, x, sign, cap):
    # Paths are ranked by the closed region (run + path + strictly enclosed
    # nodes): a path hugging the run and one detouring through B can both
    # enclose nothing strictly while covering different sites.
    run = run_arc(g, x, sign)
    _, paths = shortest_simple_paths(g, x, sign, cap)
    scored = []
    for p in paths:
        region = frozenset(run) | frozenset(p.nodes) | enclosed_nodes(g, _loop(run, p))
        scored.append((len(region), p.nodes, p, region))
    inner = min(scored, key=lambda t: (t[0], t[1]))
    outer = min(scored, key=lambda t: (-t[0], t[1]))
    diags = []
    for pick, label in ((inner, "inner"), (outer, "outer")):
        same = {t[3] for t in scored if t[0] == pick[0]}
        if len(same) > 1:
            diags.append(f"{'+' if sign > 0 else '-'}{label}: {len(same)} distinct regions "
                         f"of size {pick[0]}")
    return inner[2], outer[2], inner[3], outer[3], diags


def region_decomposition(g: GridInstance, x: BoundaryConfig, cap: int = PATH_CAP,
                         oracle_field: LocalSolutionField | None = None) -> RegionDecomposition:
    rs = classify_boundary(g, x)
    if not rs.one_run:
        raise ValueError(f"{x} is not a one-run boundary (degenerate: {rs.kind})")
    C = corner_set(g, x)
    try:
        pi, po, I_p, O_p, d1 = _extreme_paths(g, x, 1, cap)
        mi, mo, I_m, O_m, d2 = _extreme_paths(g, x, -1, cap)
    except PathExplosion as exc:
        log.warning("%s: %s; using oracle-derived regions", x, exc)
        return regions_from_field(g, x, oracle_field, reason=str(exc))
    cal = lambda s: frozenset(c for c in s if g.is_interior(c))  # noqa: E731
    dI_p = frozenset(c for c in cal(I_p) if _touches(g, c, O_m))
    dI_m = frozenset(c for c in cal(I_m) if _touches(g, c, O_p))
    return RegionDecomposition(g.N, x, pi, po, mi, mo, I_p, O_p, I_m, O_m, dI_p, dI_m, C,
                               diagnostics=tuple(d1 + d2))


def regions_from_field(g: GridInstance, x: BoundaryConfig, field_: LocalSolutionField | None,
                       reason: str = "") -> RegionDecomposition:
    """Regions read off an exact local-solution field (values map to classes)."""
    if field_ is None:
        from .oracle import exact_local_solutions
        field_ = exact_local_solutions(x)
    by = {v: frozenset(c for c, w in field_.items() if w == v) for v in (4, 2, 0, -2, -4)}
    I_p = by[4] | by[2]
    I_m = by[-4] | by[-2]
    O_p = I_p | by[0]
    O_m = I_m | by[0]
    return RegionDecomposition(g.N, x, None, None, None, None,
                               I_p | x.r_plus, O_p | x.r_plus, I_m | x.r_minus, O_m | x.r_minus,
                               by[2], by[-2], corner_set(g, x), fallback=True,
                               diagnostics=(reason,) if reason else ())


def closed_form_local_solutions(r: RegionDecomposition) -> LocalSolutionField:
    errs = r.partition_errors()
    if errs:
        raise ValueError("region classes do not partition the interior: " + "; ".join(errs))
    vals = {}
    for name, cls in r.classes.items():
        for c in cls:
            vals[c] = CLASS_VALUES[name]
    g = make_grid(r.N)
    return LocalSolutionField({c: vals[c] for c in g.interior})
