"""Faithful projections of the torus graph and even-subgraph combinatorics.

A faithful projection draws the torus graph in the plane: straight edges stay
straight, wrap-around edges become "handles" -- curves with an integer winding
number that may cross each other or themselves.  Only the combinatorial data
matters for the determinant identities, so a projection stores, per undirected
edge, the winding number, the set of crossing pairs, and which handles
self-cross.  No curve is ever drawn.

Two projections are supported:

* G1: every handle winds by -1 except the (L,M)-(1,1) corner handle, which
  winds by -2 and crosses itself once.
* G2: the corner handle winds by -1 and does not self-cross, while every other
  handle connecting column L to column 1 self-crosses once (winding -2).

In both, handles leaving row M cross each handle leaving column L exactly
once, the corner handle belonging to both groups.

Even subgraphs (edge sets with all vertex degrees even) are enumerated through
a spanning-tree cycle basis: the cycle space has dimension 2LM + 1, far below
the 3LM edge count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .lattice import (
    DirectedEdge,
    Direction,
    TorusSpec,
    corner_edge_index,
    crosses_x_seam,
    crosses_y_seam,
    undirected_endpoints,
    undirected_index,
)


def x_seam_edges(spec: TorusSpec) -> list[int]:
    """Handles connecting column L to column 1, corner included."""
    return [e for e in range(spec.n_undirected) if crosses_x_seam(spec, e)]


def y_seam_edges(spec: TorusSpec) -> list[int]:
    """Handles connecting row M to row 1, corner included."""
    return [e for e in range(spec.n_undirected) if crosses_y_seam(spec, e)]


@dataclass(frozen=True)
class FaithfulProjection:
    """Combinatorial crossing/winding data of one drawing of the torus graph."""

    variant: str
    spec: TorusSpec
    winding: dict[int, int]
    crossing_pairs: frozenset[tuple[int, int]]
    self_crossing: frozenset[int]
    # Partner bitmasks derived from crossing_pairs, for fast parity counts.
    _partner: dict[int, int] = field(repr=False, default_factory=dict)
    _selfx_mask: int = field(repr=False, default=0)

    def __post_init__(self):
        partner: dict[int, int] = {}
        for a, b in self.crossing_pairs:
            partner[a] = partner.get(a, 0) | (1 << b)
            partner[b] = partner.get(b, 0) | (1 << a)
        selfx = 0
        for e in self.self_crossing:
            selfx |= 1 << e
        object.__setattr__(self, "_partner", partner)
        object.__setattr__(self, "_selfx_mask", selfx)


def faithful_projection(spec: TorusSpec, variant: str) -> FaithfulProjection:
    """Build the G1 or G2 projection of the L x M torus."""
    if variant not in ("G1", "G2"):
        raise ValueError(f"unknown projection variant {variant!r}")
    xs = x_seam_edges(spec)
    ys = y_seam_edges(spec)
    corner = corner_edge_index(spec)

    # Every (row-M handle, column-L handle) pair crosses exactly once; the
    # corner handle sits in both groups and never pairs with itself.
    pairs = frozenset(
        (min(v, h), max(v, h)) for v in ys for h in xs if v != h
    )

    winding = {}
    if variant == "G1":
        for e in set(xs) | set(ys):
            winding[e] = -1
        winding[corner] = -2
        selfx = frozenset({corner})
    else:
        for e in ys:
            winding[e] = -1
        for e in xs:
            if e != corner:
                winding[e] = -2
        winding[corner] = -1
        selfx = frozenset(e for e in xs if e != corner)

    return FaithfulProjection(variant, spec, winding, pairs, selfx)


def integrated_angle(p: FaithfulProjection, e: DirectedEdge) -> float:
    """Total turning of the drawn curve for edge e: 2*pi*winding, 0 if straight.

    Only the half-angle phase exp(i*angle/2) = (-1)^winding enters any matrix,
    and it is insensitive to the traversal direction, so the same signed value
    is returned for both orientations.
    """
    idx = undirected_index(p.spec, e)
    return 2.0 * math.pi * p.winding.get(idx, 0)


def winding_of(p: FaithfulProjection, e: DirectedEdge) -> int:
    return p.winding.get(undirected_index(p.spec, e), 0)


# ---------------------------------------------------------------------------
# Even subgraphs.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvenSubgraph:
    """An even-degree edge subset, stored as a bitmask over undirected edges."""

    spec: TorusSpec
    mask: int

    def edges(self) -> list[int]:
        return [e for e in range(self.spec.n_undirected) if (self.mask >> e) & 1]

    def __contains__(self, edge_idx: int) -> bool:
        return bool((self.mask >> edge_idx) & 1)


@lru_cache(maxsize=None)
def incidence_masks(spec: TorusSpec) -> tuple[int, ...]:
    """For each site index, the bitmask of undirected edges touching it."""
    masks = [0] * spec.n_sites
    for idx in range(spec.n_undirected):
        a, b = undirected_endpoints(spec, idx)
        masks[spec.site_index(*a)] |= 1 << idx
        masks[spec.site_index(*b)] |= 1 << idx
    return tuple(masks)


def is_even_mask(spec: TorusSpec, mask: int) -> bool:
    return all((mask & inc).bit_count() % 2 == 0 for inc in incidence_masks(spec))


def even_subgraph(spec: TorusSpec, edges) -> EvenSubgraph:
    """Build an EvenSubgraph from edge indices, checking the degree parity."""
    mask = 0
    for e in edges:
        mask |= 1 << e
    if not is_even_mask(spec, mask):
        raise ValueError("edge set has a vertex of odd degree")
    return EvenSubgraph(spec, mask)


def cycle_basis(spec: TorusSpec) -> list[int]:
    """Fundamental-cycle bitmasks from a spanning tree; length 2LM + 1.

    Tree: the vertical path up column 1 plus every row's horizontal path.
    Each non-tree edge closes exactly one cycle through the tree.
    """
    tree: set[int] = set()
    for j in range(1, spec.M):
        tree.add(undirected_index(spec, DirectedEdge((1, j), Direction.N)))
    for j in range(1, spec.M + 1):
        for i in range(1, spec.L):
            tree.add(undirected_index(spec, DirectedEdge((i, j), Direction.E)))

    # Bitmask of tree edges on the path from each site to the root (1, 1).
    path = [0] * spec.n_sites
    for j in range(1, spec.M + 1):
        for i in range(1, spec.L + 1):
            mask = 0
            for jj in range(1, j):
                mask |= 1 << undirected_index(spec, DirectedEdge((1, jj), Direction.N))
            for ii in range(1, i):
                mask |= 1 << undirected_index(spec, DirectedEdge((ii, j), Direction.E))
            path[spec.site_index(i, j)] = mask

    basis = []
    for idx in range(spec.n_undirected):
        if idx in tree:
            continue
        a, b = undirected_endpoints(spec, idx)
        cyc = (1 << idx) ^ path[spec.site_index(*a)] ^ path[spec.site_index(*b)]
        basis.append(cyc)
    assert len(basis) == 2 * spec.n_sites + 1
    return basis


def iter_even_masks(spec: TorusSpec):
    """Yield every even-subgraph bitmask once, via Gray-coded basis subsets.

    2^(2LM+1) masks; the empty subgraph comes first.
    """
    basis = cycle_basis(spec)
    n = len(basis)
    mask = 0
    yield mask
    for counter in range(1, 1 << n):
        # Gray code: bit flipped at step c is the ruler sequence bit.
        mask ^= basis[(counter & -counter).bit_length() - 1]
        yield mask


def crossing_count_mask(p: FaithfulProjection, mask: int) -> int:
    """Total crossings n0 of the drawn subgraph: pair crossings plus self-crossings."""
    total = 2 * (p._selfx_mask & mask).bit_count()
    rest = mask
    while rest:
        low = rest & -rest
        e = low.bit_length() - 1
        pm = p._partner.get(e)
        if pm is not None:
            total += (pm & mask).bit_count()
        rest ^= low
    # Every unordered pair was seen from both sides.
    assert total % 2 == 0
    return total // 2


def crossing_count(p: FaithfulProjection, g: EvenSubgraph) -> int:
    return crossing_count_mask(p, g.mask)


def handle_masks(spec: TorusSpec) -> tuple[int, int, int]:
    """Bitmasks for (column-L handles incl. corner, row-M handles excl. corner, corner)."""
    corner = corner_edge_index(spec)
    xm = 0
    for e in x_seam_edges(spec):
        xm |= 1 << e
    ym = 0
    for e in y_seam_edges(spec):
        if e != corner:
            ym |= 1 << e
    return xm, ym, 1 << corner


def handle_stats(g: EvenSubgraph) -> tuple[int, int, int]:
    """(n_h, n_v, n_hv): horizontal handles incl. corner, vertical handles excl.
    corner, and the corner-handle indicator."""
    xm, ym, cm = handle_masks(g.spec)
    n_h = (g.mask & xm).bit_count()
    n_v = (g.mask & ym).bit_count()
    n_hv = 1 if g.mask & cm else 0
    return n_h, n_v, n_hv
