"""Torus geometry for the triangular lattice: sites, directed edges, couplings, angles.

The lattice is the L x M torus with three edge classes per site: horizontal
(east), vertical (north), and oblique (north-east).  Everything downstream --
the even-subgraph combinatorics, the Kac-Ward matrices, the transfer matrix --
is indexed through this module.

Sites are 1-based pairs (i, j) with 1 <= i <= L, 1 <= j <= M, matching the
handle bookkeeping at the lattice boundary ((L, M)-(1, 1) corner and friends).
Turning angles are kept as exact integer multiples of pi/4 so that half-angle
phases are exact sixteenth roots of unity; floats appear only at matrix
assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum


class Direction(IntEnum):
    """The six directed-edge directions, ordered as in the 6x6 Fourier block."""

    E = 0
    W = 1
    N = 2
    S = 3
    NE = 4
    SW = 5


# Displacement of one step in each direction.
STEP = {
    Direction.E: (1, 0),
    Direction.W: (-1, 0),
    Direction.N: (0, 1),
    Direction.S: (0, -1),
    Direction.NE: (1, 1),
    Direction.SW: (-1, -1),
}

REVERSE = {
    Direction.E: Direction.W,
    Direction.W: Direction.E,
    Direction.N: Direction.S,
    Direction.S: Direction.N,
    Direction.NE: Direction.SW,
    Direction.SW: Direction.NE,
}

# Edge class of each direction: 0 horizontal, 1 vertical, 2 oblique.
HOR, VER, OBL = 0, 1, 2
EDGE_CLASS = {
    Direction.E: HOR,
    Direction.W: HOR,
    Direction.N: VER,
    Direction.S: VER,
    Direction.NE: OBL,
    Direction.SW: OBL,
}

# Heading of each direction in units of pi/4 (E = 0, counterclockwise).
_HEADING_STEPS = {
    Direction.E: 0,
    Direction.NE: 1,
    Direction.N: 2,
    Direction.W: 4,
    Direction.SW: -3,
    Direction.S: -2,
}


@dataclass(frozen=True)
class TorusSpec:
    """Extent of the torus: L sites horizontally, M vertically."""

    L: int
    M: int

    def __post_init__(self):
        if self.L < 2 or self.M < 2:
            raise ValueError(f"torus extents must be >= 2, got {self.L}x{self.M}")

    @property
    def n_sites(self) -> int:
        return self.L * self.M

    @property
    def n_undirected(self) -> int:
        return 3 * self.L * self.M

    @property
    def n_directed(self) -> int:
        return 6 * self.L * self.M

    def site_index(self, i: int, j: int) -> int:
        """Row-major index of site (i, j) in [0, L*M)."""
        return (j - 1) * self.L + (i - 1)

    def site_at(self, index: int) -> tuple[int, int]:
        j, i = divmod(index, self.L)
        return (i + 1, j + 1)

    def wrap(self, i: int, j: int) -> tuple[int, int]:
        """Reduce a site modulo the torus (first coordinate mod L, second mod M)."""
        return ((i - 1) % self.L + 1, (j - 1) % self.M + 1)


@dataclass(frozen=True)
class Couplings:
    """Edge-class couplings (J1 horizontal, J2 vertical, J3 oblique), any sign."""

    J1: float
    J2: float
    J3: float

    def __post_init__(self):
        for name in ("J1", "J2", "J3"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"coupling {name} must be finite")

    def by_class(self) -> tuple[float, float, float]:
        return (self.J1, self.J2, self.J3)

    def scaled(self, beta: float) -> "Couplings":
        return Couplings(beta * self.J1, beta * self.J2, beta * self.J3)


@dataclass(frozen=True)
class DirectedEdge:
    """A directed edge: base site plus direction."""

    site: tuple[int, int]
    direction: Direction


def flatten(spec: TorusSpec, e: DirectedEdge) -> int:
    """Flat index in [0, 6LM): six directions per site, site-major."""
    return 6 * spec.site_index(*e.site) + int(e.direction)


def unflatten(spec: TorusSpec, flat: int) -> DirectedEdge:
    site_idx, d = divmod(flat, 6)
    return DirectedEdge(spec.site_at(site_idx), Direction(d))


def endpoint(spec: TorusSpec, e: DirectedEdge) -> tuple[int, int]:
    di, dj = STEP[e.direction]
    return spec.wrap(e.site[0] + di, e.site[1] + dj)


def reverse_edge(spec: TorusSpec, e: DirectedEdge) -> DirectedEdge:
    return DirectedEdge(endpoint(spec, e), REVERSE[e.direction])


def is_consecutive(spec: TorusSpec, e: DirectedEdge, f: DirectedEdge) -> bool:
    """True iff f starts where e ends and f does not backtrack on e."""
    return endpoint(spec, e) == f.site and f.direction != REVERSE[e.direction]


def coupling_of(e: DirectedEdge, couplings: Couplings) -> float:
    """Coupling of the undirected edge under e; both directions get the same value."""
    return couplings.by_class()[EDGE_CLASS[e.direction]]


def turning_steps(a: Direction, b: Direction) -> int:
    """Signed turn from heading a to heading b in pi/4 units, in (-4, 4].

    Backtracking (b = reverse(a)) is the only pair reaching a turn of pi and is
    rejected: the Kac-Ward matrices are non-backtracking.
    """
    if b == REVERSE[a]:
        raise ValueError(f"turning angle undefined for backtracking pair {a.name}->{b.name}")
    return (_HEADING_STEPS[b] - _HEADING_STEPS[a] + 3) % 8 - 3


def turning_angle(a: Direction, b: Direction) -> float:
    """Signed planar turning angle from a to b, in radians, range (-pi, pi]."""
    return turning_steps(a, b) * (math.pi / 4.0)


def half_angle_phase(a: Direction, b: Direction) -> complex:
    """exp(i * turning_angle / 2), an exact sixteenth root of unity."""
    return complex(math.cos(turning_steps(a, b) * math.pi / 8.0),
                   math.sin(turning_steps(a, b) * math.pi / 8.0))


# ---------------------------------------------------------------------------
# Undirected edges.
#
# Each undirected edge is identified by (class, base site), where the base is
# the tail of the positive direction (E, N or NE).  The flat undirected index
# is class-major: idx = class * LM + site_index(base).
# ---------------------------------------------------------------------------

_POSITIVE_DIR = {HOR: Direction.E, VER: Direction.N, OBL: Direction.NE}


def undirected_index(spec: TorusSpec, e: DirectedEdge) -> int:
    """Flat undirected-edge index in [0, 3LM) shared by both directions."""
    cls = EDGE_CLASS[e.direction]
    if e.direction in (Direction.E, Direction.N, Direction.NE):
        base = e.site
    else:
        base = endpoint(spec, e)
    return cls * spec.n_sites + spec.site_index(*base)


def undirected_base(spec: TorusSpec, idx: int) -> tuple[int, tuple[int, int]]:
    """Inverse of undirected_index: (edge class, base site)."""
    cls, site_idx = divmod(idx, spec.n_sites)
    return cls, spec.site_at(site_idx)


def undirected_endpoints(spec: TorusSpec, idx: int) -> tuple[tuple[int, int], tuple[int, int]]:
    cls, base = undirected_base(spec, idx)
    d = _POSITIVE_DIR[cls]
    return base, endpoint(spec, DirectedEdge(base, d))


def directed_edges(spec: TorusSpec):
    """All 6LM directed edges in flat-index order."""
    for flat in range(spec.n_directed):
        yield unflatten(spec, flat)


def crosses_x_seam(spec: TorusSpec, idx: int) -> bool:
    """True iff the undirected edge connects column L to column 1."""
    cls, (i, _) = undirected_base(spec, idx)
    return cls in (HOR, OBL) and i == spec.L


def crosses_y_seam(spec: TorusSpec, idx: int) -> bool:
    """True iff the undirected edge connects row M to row 1."""
    cls, (_, j) = undirected_base(spec, idx)
    return cls in (VER, OBL) and j == spec.M


def corner_edge_index(spec: TorusSpec) -> int:
    """The oblique (L, M)-(1, 1) edge, the only one crossing both seams."""
    return OBL * spec.n_sites + spec.site_index(spec.L, spec.M)


def is_wrap_edge(spec: TorusSpec, idx: int) -> bool:
    return crosses_x_seam(spec, idx) or crosses_y_seam(spec, idx)
