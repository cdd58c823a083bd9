import cmath
import math

import pytest

from kacward.lattice import (
    Couplings,
    DirectedEdge,
    Direction,
    REVERSE,
    TorusSpec,
    coupling_of,
    directed_edges,
    endpoint,
    flatten,
    half_angle_phase,
    is_consecutive,
    reverse_edge,
    turning_angle,
    turning_steps,
    unflatten,
    undirected_index,
)

D = Direction


def test_spec_validation():
    with pytest.raises(ValueError):
        TorusSpec(1, 3)
    with pytest.raises(ValueError):
        TorusSpec(3, 1)
    spec = TorusSpec(4, 3)
    assert spec.n_sites == 12
    assert spec.n_undirected == 36
    assert spec.n_directed == 72


def test_couplings_validation():
    with pytest.raises(ValueError):
        Couplings(math.inf, 0.0, 0.0)
    with pytest.raises(ValueError):
        Couplings(0.0, math.nan, 0.0)
    Couplings(-2.0, 0.0, 3.5)  # any finite signs allowed


def test_coupling_of_edge_classes():
    J = Couplings(0.3, -1.0, 2.0)
    assert coupling_of(DirectedEdge((1, 1), D.E), J) == 0.3
    assert coupling_of(DirectedEdge((2, 2), D.SW), J) == 2.0
    assert coupling_of(DirectedEdge((1, 1), D.N), Couplings(0, 0, 0)) == 0
    # both directions of one undirected edge get the same value
    spec = TorusSpec(3, 3)
    for e in directed_edges(spec):
        assert coupling_of(e, J) == coupling_of(reverse_edge(spec, e), J)


def test_reverse_involution():
    spec = TorusSpec(3, 4)
    for e in directed_edges(spec):
        assert reverse_edge(spec, reverse_edge(spec, e)) == e
    for d in D:
        assert REVERSE[REVERSE[d]] == d


def test_flat_index_round_trip():
    for spec in (TorusSpec(2, 2), TorusSpec(3, 3), TorusSpec(4, 3)):
        for flat in range(spec.n_directed):
            assert flatten(spec, unflatten(spec, flat)) == flat


def test_undirected_index_shared_by_both_directions():
    spec = TorusSpec(3, 3)
    seen = {}
    for e in directed_edges(spec):
        idx = undirected_index(spec, e)
        assert idx == undirected_index(spec, reverse_edge(spec, e))
        seen.setdefault(idx, 0)
        seen[idx] += 1
    assert len(seen) == spec.n_undirected
    assert all(v == 2 for v in seen.values())


def test_is_consecutive_examples():
    spec = TorusSpec(3, 3)
    e = DirectedEdge((1, 1), D.E)
    assert is_consecutive(spec, e, DirectedEdge((2, 1), D.N))
    assert not is_consecutive(spec, e, DirectedEdge((2, 1), D.W))  # backtracking
    assert not is_consecutive(spec, e, DirectedEdge((3, 1), D.N))  # wrong start


def test_successor_count_is_five():
    spec = TorusSpec(3, 3)
    edges = list(directed_edges(spec))
    total = sum(is_consecutive(spec, e, f) for e in edges for f in edges)
    assert total == 270  # 54 directed edges x (6 outgoing - 1 backtrack)


def test_turning_angle_against_printed_phases():
    # Entries of the zero-momentum 6x6 block, phase = exp(i * angle / 2).
    assert turning_angle(D.E, D.N) == pytest.approx(math.pi / 2)
    assert turning_angle(D.E, D.NE) == pytest.approx(math.pi / 4)
    assert turning_angle(D.E, D.E) == 0.0
    assert cmath.isclose(half_angle_phase(D.E, D.N), cmath.exp(1j * math.pi / 4))
    assert cmath.isclose(half_angle_phase(D.E, D.NE), cmath.exp(1j * math.pi / 8))
    assert cmath.isclose(half_angle_phase(D.E, D.SW), cmath.exp(-3j * math.pi / 8))
    assert cmath.isclose(half_angle_phase(D.N, D.SW), cmath.exp(3j * math.pi / 8))


def test_turning_angle_rejects_backtracking():
    for a in D:
        with pytest.raises(ValueError):
            turning_angle(a, REVERSE[a])


def test_turning_angle_path_reversal_antisymmetry():
    pairs = 0
    for a in D:
        for b in D:
            if b == REVERSE[a]:
                continue
            pairs += 1
            assert turning_steps(a, b) == -turning_steps(REVERSE[b], REVERSE[a])
            # pi is unreachable without backtracking
            assert abs(turning_steps(a, b)) <= 3
    assert pairs == 30


def test_elementary_triangle_phase_product_is_minus_one():
    # The two directed lattice triangles: (E, N, SW) and (NE, W, S) close with
    # total turning +-2pi, so the half-angle phases multiply to -1.
    for loop in ((D.E, D.N, D.SW), (D.NE, D.W, D.S), (D.SW, D.N, D.E)):
        steps = sum(turning_steps(a, b) for a, b in zip(loop, loop[1:] + loop[:1]))
        assert abs(steps) == 8  # 2 pi in pi/4 units
        phase = 1.0 + 0j
        for a, b in zip(loop, loop[1:] + loop[:1]):
            phase *= half_angle_phase(a, b)
        assert cmath.isclose(phase, -1.0)


def test_triangle_loops_close_on_lattice():
    spec = TorusSpec(3, 3)
    for loop in ((D.E, D.N, D.SW), (D.NE, D.W, D.S)):
        site = (2, 2)
        edges = []
        for d in loop:
            edges.append(DirectedEdge(site, d))
            site = endpoint(spec, edges[-1])
        assert site == (2, 2)
        assert all(is_consecutive(spec, e, f) for e, f in zip(edges, edges[1:]))
