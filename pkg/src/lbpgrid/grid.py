"""Grid topology, boundary configurations and their symmetries.

Coordinates are ``(a, b)`` with ``a`` the column and ``b`` the row, both in
``[0, N+1]``; ``(0, 0)`` is the bottom-left corner.  The boundary ring is
walked counter-clockwise from ``(0, 0)``, east along the bottom edge first,
and that order fixes the ``B<N>:+-...`` wire format.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Mapping, NamedTuple, Sequence


class Coord(NamedTuple):
    a: int
    b: int

    def __add__(self, other):  # type: ignore[override]
        return Coord(self.a + other[0], self.b + other[1])


class Direction(enum.Enum):
    N = (0, 1)
    S = (0, -1)
    E = (1, 0)
    W = (-1, 0)

    @property
    def vector(self) -> tuple[int, int]:
        return self.value

    @property
    def opposite(self) -> "Direction":
        return _OPPOSITE[self]

    def is_adjacent(self, other: "Direction") -> bool:
        (x1, y1), (x2, y2) = self.value, other.value
        return x1 * x2 + y1 * y2 == 0

    @classmethod
    def from_vector(cls, v: tuple[int, int]) -> "Direction":
        return _BY_VECTOR[tuple(v)]


_OPPOSITE = {Direction.N: Direction.S, Direction.S: Direction.N,
             Direction.E: Direction.W, Direction.W: Direction.E}
_BY_VECTOR = {d.value: d for d in Direction}

#: The four unordered adjacent direction pairs.
ADJACENT_PAIRS: tuple[tuple[Direction, Direction], ...] = (
    (Direction.E, Direction.N),
    (Direction.E, Direction.S),
    (Direction.W, Direction.N),
    (Direction.W, Direction.S),
)


class DirectedEdge(NamedTuple):
    source: Coord
    target: Coord

    @classmethod
    def toward(cls, c: Coord, d: Direction) -> "DirectedEdge":
        """The edge ``D(a, b) = (a, b) -> (a, b) + v(D)``."""
        return cls(Coord(*c), Coord(*c) + d.vector)

    @property
    def direction(self) -> Direction:
        return Direction.from_vector((self.target.a - self.source.a,
                                      self.target.b - self.source.b))


@dataclass(frozen=True)
class GridInstance:
    """The ``(N+2) x (N+2)`` grid with interior ``B = {1..N}^2``."""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"grid size must be a positive integer, got {self.N!r}")

    def contains(self, c: Sequence[int]) -> bool:
        return 0 <= c[0] <= self.N + 1 and 0 <= c[1] <= self.N + 1

    def is_interior(self, c: Sequence[int]) -> bool:
        return 1 <= c[0] <= self.N and 1 <= c[1] <= self.N

    def is_boundary(self, c: Sequence[int]) -> bool:
        return self.contains(c) and not self.is_interior(c)

    def neighbors(self, c: Sequence[int]) -> list[Coord]:
        """Grid neighbours in N, S, E, W order."""
        return self._adjacency[c]

    @cached_property
    def _adjacency(self) -> dict[Coord, list[Coord]]:
        adj = {}
        for c in self.vertices:
            adj[c] = [nb for d in Direction
                      if (nb := apply_direction(self, c, d)) is not None]
        return adj

    @cached_property
    def vertices(self) -> tuple[Coord, ...]:
        n = self.N + 2
        return tuple(Coord(a, b) for b in range(n) for a in range(n))

    @cached_property
    def interior(self) -> tuple[Coord, ...]:
        """Interior sites in row-major order (row ``b``, then column ``a``)."""
        return tuple(Coord(a, b) for b in range(1, self.N + 1)
                     for a in range(1, self.N + 1))

    @cached_property
    def ring(self) -> tuple[Coord, ...]:
        return _ring(self.N)

    @property
    def boundary(self) -> tuple[Coord, ...]:
        return self.ring

    @cached_property
    def ring_index(self) -> dict[Coord, int]:
        return {c: k for k, c in enumerate(self.ring)}

    @property
    def outer_corners(self) -> tuple[Coord, ...]:
        m = self.N + 1
        return (Coord(0, 0), Coord(m, 0), Coord(m, m), Coord(0, m))

    @cached_property
    def corners(self) -> dict[str, Coord]:
        """Named interior corners ``sw, se, ne, nw``."""
        n = self.N
        return {"sw": Coord(1, 1), "se": Coord(n, 1),
                "ne": Coord(n, n), "nw": Coord(1, n)}

    def corner_boundary_neighbors(self, name: str) -> tuple[Coord, Coord]:
        """The two boundary neighbours that make ``name`` a corner.

        For ``N = 1`` the single site is all four corners at once, so the
        pair is chosen by the corner's compass name rather than by degree.
        """
        a, b = self.corners[name]
        horiz = Direction.W if "w" in name else Direction.E
        vert = Direction.S if name[0] == "s" else Direction.N
        return (Coord(a, b) + horiz.vector, Coord(a, b) + vert.vector)


@lru_cache(maxsize=None)
def make_grid(N: int) -> GridInstance:
    return GridInstance(N)


def apply_direction(g: GridInstance, c: Sequence[int], d: Direction) -> Coord | None:
    """Return ``c + v(d)`` if it lies in the grid, else ``None``."""
    nb = Coord(c[0] + d.vector[0], c[1] + d.vector[1])
    return nb if g.contains(nb) else None


@lru_cache(maxsize=None)
def _ring(N: int) -> tuple[Coord, ...]:
    m = N + 1
    ring = [Coord(a, 0) for a in range(0, m + 1)]
    ring += [Coord(m, b) for b in range(1, m + 1)]
    ring += [Coord(a, m) for a in range(m - 1, -1, -1)]
    ring += [Coord(0, b) for b in range(m - 1, 0, -1)]
    return tuple(ring)


# --------------------------------------------------------------------------
# Boundary configurations


@dataclass(frozen=True)
class BoundaryConfig:
    """A +-1 assignment to the boundary ring, stored in ring order."""

    N: int
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.signs) != 4 * self.N + 4:
            raise ValueError(
                f"boundary of a size-{self.N} grid needs {4 * self.N + 4} values, "
                f"got {len(self.signs)}")
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("boundary values must be +1 or -1")
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))

    @property
    def grid(self) -> GridInstance:
        return make_grid(self.N)

    def __getitem__(self, c: Sequence[int]) -> int:
        return self.signs[self.grid.ring_index[Coord(*c)]]

    def as_dict(self) -> dict[Coord, int]:
        return dict(zip(self.grid.ring, self.signs))

    @property
    def values(self) -> dict[Coord, int]:
        return self.as_dict()

    @property
    def r_plus(self) -> frozenset[Coord]:
        return frozenset(c for c, s in zip(self.grid.ring, self.signs) if s == 1)

    @property
    def r_minus(self) -> frozenset[Coord]:
        return frozenset(c for c, s in zip(self.grid.ring, self.signs) if s == -1)

    def flipped(self) -> "BoundaryConfig":
        return BoundaryConfig(self.N, tuple(-s for s in self.signs))

    def to_string(self) -> str:
        return f"B{self.N}:" + "".join("+" if s > 0 else "-" for s in self.signs)

    def __str__(self) -> str:
        return self.to_string()

    @classmethod
    def from_string(cls, text: str) -> "BoundaryConfig":
        return parse_boundary(text)

    @classmethod
    def from_mapping(cls, g: GridInstance, values: Mapping[Sequence[int], int]) -> "BoundaryConfig":
        vals = {Coord(*k): v for k, v in values.items()}
        extra = [c for c in vals if not g.is_boundary(c)]
        if extra:
            raise ValueError(f"coordinates not on the boundary: {sorted(extra)}")
        missing = [c for c in g.ring if c not in vals]
        if missing:
            raise ValueError(f"boundary coordinates without a value: {missing}")
        return cls(g.N, tuple(vals[c] for c in g.ring))

    @classmethod
    def uniform(cls, N: int, sign: int = -1) -> "BoundaryConfig":
        return cls(N, (sign,) * (4 * N + 4))

    @classmethod
    def arc(cls, N: int, start: int, length: int) -> "BoundaryConfig":
        """``+1`` on ``length`` consecutive ring positions from ``start``, else ``-1``."""
        L = 4 * N + 4
        signs = [-1] * L
        for k in range(length):
            signs[(start + k) % L] = 1
        return cls(N, tuple(signs))


class BoundaryFormatError(ValueError):
    """Malformed boundary string; ``position`` indexes the offending character."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at character {position})")
        self.position = position


def parse_boundary(text: str) -> BoundaryConfig:
    text = text.strip()
    if not text.startswith("B"):
        raise BoundaryFormatError("boundary string must start with 'B<N>:'", 0)
    colon = text.find(":")
    if colon < 0:
        raise BoundaryFormatError("missing ':' after the grid size", len(text))
    size = text[1:colon]
    if not size.isdigit() or int(size) < 1:
        raise BoundaryFormatError(f"invalid grid size {size!r}", 1)
    N = int(size)
    body = text[colon + 1:]
    signs = []
    for k, ch in enumerate(body):
        if ch == "+":
            signs.append(1)
        elif ch == "-":
            signs.append(-1)
        else:
            raise BoundaryFormatError(f"unexpected character {ch!r}", colon + 1 + k)
    if len(signs) != 4 * N + 4:
        raise BoundaryFormatError(
            f"expected {4 * N + 4} boundary characters for N={N}, got {len(signs)}",
            colon + 1 + min(len(signs), 4 * N + 4))
    return BoundaryConfig(N, tuple(signs))


@dataclass(frozen=True)
class Run:
    sign: int
    start: int  # ring index of the first node, counter-clockwise
    length: int


@dataclass(frozen=True)
class RunStructure:
    runs: tuple[Run, ...]
    odd_bonds: int  # sign changes along the ring
    one_run: bool
    uniform: bool
    plus_endpoints: tuple[Coord, Coord] | None = None
    minus_endpoints: tuple[Coord, Coord] | None = None

    @property
    def kind(self) -> str:
        if self.uniform:
            return "uniform"
        return "one-run" if self.one_run else f"{len(self.runs) // 2}-run"


def classify_boundary(g: GridInstance, x: BoundaryConfig | Mapping) -> RunStructure:
    if not isinstance(x, BoundaryConfig):
        x = BoundaryConfig.from_mapping(g, x)
    if x.N != g.N:
        raise ValueError(f"boundary is for N={x.N}, grid has N={g.N}")
    s = x.signs
    L = len(s)
    changes = [k for k in range(L) if s[k] != s[k - 1]]
    if not changes:
        return RunStructure(runs=(Run(s[0], 0, L),), odd_bonds=0,
                            one_run=False, uniform=True)
    runs = []
    for idx, k in enumerate(changes):
        nxt = changes[(idx + 1) % len(changes)]
        runs.append(Run(s[k], k, (nxt - k) % L or L))
    runs.sort(key=lambda r: r.start)
    one_run = len(changes) == 2
    plus_ep = minus_ep = None
    if one_run:
        ring = g.ring
        for r in runs:
            ends = (ring[r.start], ring[(r.start + r.length - 1) % L])
            if r.sign > 0:
                plus_ep = ends
            else:
                minus_ep = ends
    return RunStructure(runs=tuple(runs), odd_bonds=len(changes), one_run=one_run,
                        uniform=False, plus_endpoints=plus_ep, minus_endpoints=minus_ep)


def plus_run(g: GridInstance, x: BoundaryConfig) -> Run:
    rs = classify_boundary(g, x)
    if not rs.one_run:
        raise ValueError(f"{x} is not a one-run boundary ({rs.kind})")
    return next(r for r in rs.runs if r.sign > 0)


# --------------------------------------------------------------------------
# Symmetries


@dataclass(frozen=True)
class SymmetryTransform:
    """Dihedral grid symmetry plus optional colour flip.

    Acting on a coordinate, the reflection ``a -> N+1-a`` is applied first and
    then ``rotation`` counter-clockwise quarter turns about the grid centre.
    """

    rotation: int = 0
    reflect: bool = False
    color_flip: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rotation", self.rotation % 4)

    @property
    def is_identity(self) -> bool:
        return self.rotation == 0 and not self.reflect and not self.color_flip

    def apply_vector(self, v: Sequence[int]) -> tuple[int, int]:
        x, y = v
        if self.reflect:
            x = -x
        for _ in range(self.rotation):
            x, y = -y, x
        return (x, y)

    def apply_coord(self, c: Sequence[int], N: int) -> Coord:
        m = N + 1
        a, b = c
        if self.reflect:
            a = m - a
        for _ in range(self.rotation):
            a, b = m - b, a
        return Coord(a, b)

    def apply_direction(self, d: Direction) -> Direction:
        return Direction.from_vector(self.apply_vector(d.vector))

    def apply_sign(self, s: int) -> int:
        return -s if self.color_flip else s

    def apply_edge(self, e: Sequence[Sequence[int]], N: int) -> DirectedEdge:
        return DirectedEdge(self.apply_coord(e[0], N), self.apply_coord(e[1], N))

    def apply_boundary(self, x: BoundaryConfig) -> BoundaryConfig:
        src = x.as_dict()
        out = {self.apply_coord(c, x.N): self.apply_sign(s) for c, s in src.items()}
        return BoundaryConfig.from_mapping(x.grid, out)

    def apply_field(self, values: Mapping[Coord, int], N: int) -> dict[Coord, int]:
        return {self.apply_coord(c, N): self.apply_sign(v) for c, v in values.items()}

    def inverse(self) -> "SymmetryTransform":
        if self.reflect:
            return self  # every reflection is an involution
        return SymmetryTransform(-self.rotation, False, self.color_flip)

    def compose(self, first: "SymmetryTransform") -> "SymmetryTransform":
        """``self o first``: apply ``first``, then ``self``."""
        # reflect; rotate r  ==  F^f R^r in application order; F R = R^-1 F
        rot = first.rotation
        refl = first.reflect
        if self.reflect:
            rot = -rot
            refl = not refl
        return SymmetryTransform(rot + self.rotation, refl,
                                 self.color_flip != first.color_flip)


def dihedral_group(with_color_flip: bool = False) -> list[SymmetryTransform]:
    flips = (False, True) if with_color_flip else (False,)
    return [SymmetryTransform(r, f, c) for c in flips for f in (False, True)
            for r in range(4)]


# --------------------------------------------------------------------------
# Normalisation used by the case analysis


def contract(g: GridInstance, x: BoundaryConfig) -> BoundaryConfig:
    """Set every outer corner whose two ring neighbours disagree to ``-1``.

    Outer corners have no interior neighbour, so messages are unaffected.
    """
    vals = x.as_dict()
    for c in g.outer_corners:
        p, q = (nb for nb in g.neighbors(c))
        if vals[p] != vals[q]:
            vals[c] = -1
    return BoundaryConfig.from_mapping(g, vals)


def normalize_one_run(g: GridInstance, x: BoundaryConfig) -> tuple[BoundaryConfig, SymmetryTransform]:
    """Contract the positive run and make it the smaller one.

    Returns ``(x', T)``; ``T`` maps results computed on ``x'`` back to ``x``
    (here it is at most a colour flip, which is its own inverse).
    """
    rs = classify_boundary(g, x)
    if not rs.one_run:
        raise ValueError(f"{x} is not a one-run boundary ({rs.kind})")
    y = contract(g, x)
    flip = False
    if len(y.r_plus) > len(y.r_minus):
        y = contract(g, y.flipped())
        flip = True
    return y, SymmetryTransform(color_flip=flip)


def corner_set(g: GridInstance, x: BoundaryConfig) -> frozenset[str]:
    """Names of interior corners whose two boundary neighbours are both +1."""
    return frozenset(name for name in ("sw", "se", "ne", "nw")
                     if all(x[c] == 1 for c in g.corner_boundary_neighbors(name)))


def orient_for_proof(g: GridInstance, x: BoundaryConfig) -> tuple[BoundaryConfig, SymmetryTransform, str]:
    """Normalise and rotate a one-run boundary into a canonical case position.

    Canonical positions: ``C = {}`` with the run on the west side,
    ``C = {sw}``, or ``C = {sw, nw}`` with the northern endpoint column no
    larger than the southern one.  Returns ``(x', T, case)`` where ``T`` maps
    results on ``x'`` back to ``x`` and ``case`` is ``"C0"``, ``"C1"`` or ``"C2"``.
    """
    y, back = normalize_one_run(g, x)
    for t in dihedral_group():
        z = contract(g, t.apply_boundary(y))
        c = corner_set(g, z)
        if len(c) == 0 and all(p.a == 0 for p in z.r_plus):
            case = "C0"
        elif c == {"sw"}:
            case = "C1"
        elif c == {"sw", "nw"}:
            top = [p.a for p in z.r_plus if p.b == g.N + 1]
            bot = [p.a for p in z.r_plus if p.b == 0]
            if max(top) > max(bot):
                continue
            case = "C2"
        else:
            continue
        return z, back.compose(t.inverse()), case
    raise ValueError(f"no canonical orientation for {x} (corner set {sorted(corner_set(g, y))})")


# --------------------------------------------------------------------------
# Enumeration


def enumerate_one_run_boundaries(g: GridInstance, dedup_symmetry: bool = False) -> Iterator[BoundaryConfig]:
    """Every one-run boundary once: all proper arcs of ``+1`` on the ring.

    With ``dedup_symmetry`` only the lexicographically smallest member of
    each orbit under the 8 grid symmetries and colour flip is yielded.
    """
    L = 4 * g.N + 4
    group = dihedral_group(with_color_flip=True) if dedup_symmetry else None
    for length in range(1, L):
        for start in range(L):
            x = BoundaryConfig.arc(g.N, start, length)
            if group is not None:
                key = x.signs
                if any(t.apply_boundary(x).signs < key for t in group):
                    continue
            yield x


def all_boundaries(g: GridInstance) -> Iterator[BoundaryConfig]:
    """All ``2^(4N+4)`` boundary configurations, in binary counting order."""
    L = 4 * g.N + 4
    for k in range(1 << L):
        yield BoundaryConfig(g.N, tuple(1 if (k >> i) & 1 else -1 for i in range(L)))

