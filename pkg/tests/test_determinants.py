import cmath
import math

import numpy as np
import pytest

from kacward.determinants import (
    MomentumPoint,
    assemble_K,
    assemble_K_tilde,
    assemble_W,
    assemble_W_tilde,
    det_one_minus,
    fourier_block_det,
    fourier_block_det_direct,
    kacward_partition_pair,
    khat0,
    momentum_grid,
    product_formula_log_det,
)
from kacward.lattice import Couplings, DirectedEdge, Direction, TorusSpec, flatten
from kacward.oracle import even_subgraph_sums
from kacward.projection import faithful_projection

D = Direction


def seeded_couplings(seed, n, lo=-1.5, hi=1.5):
    rng = np.random.default_rng(seed)
    return [Couplings(*rng.uniform(lo, hi, 3)) for _ in range(n)]


def test_khat0_matches_printed_table():
    # the 6x6 phase table, row/column order (E, W, N, S, NE, SW)
    e = lambda x: cmath.exp(1j * math.pi * x)
    expected = np.array([
        [1, 0, e(1 / 4), e(-1 / 4), e(1 / 8), e(-3 / 8)],
        [0, 1, e(-1 / 4), e(1 / 4), e(-3 / 8), e(1 / 8)],
        [e(-1 / 4), e(1 / 4), 1, 0, e(-1 / 8), e(3 / 8)],
        [e(1 / 4), e(-1 / 4), 0, 1, e(3 / 8), e(-1 / 8)],
        [e(-1 / 8), e(3 / 8), e(1 / 8), e(-3 / 8), 1, 0],
        [e(3 / 8), e(-1 / 8), e(-3 / 8), e(1 / 8), 0, 1],
    ])
    assert np.allclose(khat0(), expected, atol=1e-15)


def test_assembly_structure():
    spec = TorusSpec(3, 3)
    K = assemble_K(spec, "G1")
    assert K.shape == (54, 54)
    counts = (np.abs(K) > 0).sum(axis=1)
    assert np.all(counts == 5)  # non-backtracking out-degree
    assert np.allclose(np.abs(K[np.abs(K) > 0]), 1.0)
    # straight E edge -> N successor carries e^{i pi/4}
    e = flatten(spec, DirectedEdge((1, 1), D.E))
    f = flatten(spec, DirectedEdge((2, 1), D.N))
    assert cmath.isclose(K[e, f], cmath.exp(1j * math.pi / 4))
    # wrap E edge at (3, 1) has winding -1: extra factor -1 on its row
    ew = flatten(spec, DirectedEdge((3, 1), D.E))
    fw = flatten(spec, DirectedEdge((1, 1), D.N))
    assert cmath.isclose(K[ew, fw], -cmath.exp(1j * math.pi / 4))
    Kt = assemble_K_tilde(spec)
    assert cmath.isclose(Kt[ew, fw], cmath.exp(1j * math.pi / 4))


def test_W_assembly():
    spec = TorusSpec(3, 3)
    J = Couplings(0.5, -0.7, 0.2)
    w = assemble_W(spec, J)
    assert np.isclose(w.min(), math.tanh(-0.7))
    assert np.all(assemble_W(spec, Couplings(0, 0, 0)) == 0)
    for variant in ("G1", "G2"):
        wt = assemble_W_tilde(spec, J, variant)
        assert np.allclose(np.abs(wt), np.abs(w))  # phases are unimodular
    # G2 horizontal entries carry phase exactly 1
    wt2 = assemble_W_tilde(spec, J, "G2")
    e = flatten(spec, DirectedEdge((2, 2), D.E))
    assert wt2[e] == pytest.approx(math.tanh(0.5))


def test_det_one_minus():
    res = det_one_minus(np.zeros((4, 4), dtype=complex))
    assert res.value == pytest.approx(1.0)
    assert res.log_abs == pytest.approx(0.0)
    assert res.cond >= 1.0
    with pytest.raises(ValueError):
        det_one_minus(np.zeros((3, 4)))
    big = det_one_minus(np.zeros((201, 201)))
    assert big.value is None and big.log_abs == pytest.approx(0.0)


def test_fourier_block_values():
    assert fourier_block_det(MomentumPoint(0.3, -0.8), Couplings(0, 0, 0)) == 1.0
    t = math.tanh(1.0)
    expected = (1 + t * t) ** 3 + 8 * t ** 3 - 6 * t * (1 - t * t) ** 2
    got = fourier_block_det(MomentumPoint(0, 0), Couplings(1, 1, 1))
    assert got == pytest.approx(expected, rel=1e-14)
    assert fourier_block_det_direct(MomentumPoint(0, 0), Couplings(1, 1, 1)) == pytest.approx(
        expected, rel=1e-12
    )


def test_fourier_block_closed_equals_direct():
    rng = np.random.default_rng(5)
    for _ in range(40):
        J = Couplings(*rng.uniform(-1.5, 1.5, 3))
        k = MomentumPoint(*rng.uniform(-math.pi, math.pi, 2))
        closed = fourier_block_det(k, J)
        direct = fourier_block_det_direct(k, J)
        assert abs(direct.imag) < 1e-12 * max(1, abs(closed))
        assert closed == pytest.approx(direct.real, rel=1e-12, abs=1e-12)


def test_momentum_grids_shifted_vs_not():
    spec = TorusSpec(4, 6)
    k1s, k2s = momentum_grid(spec, "G1")
    assert k1s[0] == pytest.approx(math.pi / 4)  # shifted in k1
    k1u, k2u = momentum_grid(spec, "G2")
    assert k1u[0] == 0.0  # unshifted in k1
    assert k2s[0] == k2u[0] == pytest.approx(math.pi / 6)  # k2 always shifted


def test_translation_invariance_and_product_formula():
    # direct complex LU det = modified-matrix det = Fourier product
    rng = np.random.default_rng(11)
    for L in (2, 3, 4):
        for M in (2, 3, 4):
            spec = TorusSpec(L, M)
            Kt = assemble_K_tilde(spec)
            for _ in range(3):
                J = Couplings(*rng.uniform(-1.5, 1.5, 3))
                w = assemble_W(spec, J)
                for variant in ("G1", "G2"):
                    d1 = det_one_minus(assemble_K(spec, variant) * w[None, :]).value
                    wt = assemble_W_tilde(spec, J, variant)
                    d2 = det_one_minus(Kt * wt[None, :]).value
                    scale = max(1.0, abs(d1))
                    assert abs(d1 - d2) / scale < 1e-10
                    logp = product_formula_log_det(spec, J, variant)
                    assert d1.real > -1e-10 * scale
                    if d1.real > 1e-280:
                        assert math.log(d1.real) == pytest.approx(
                            logp, abs=1e-9 * max(1, abs(logp))
                        )


def test_product_formula_trivial():
    assert product_formula_log_det(TorusSpec(3, 3), Couplings(0, 0, 0), "G1") == 0.0


def test_kacward_pair_trivial_and_preconditions():
    assert kacward_partition_pair(TorusSpec(3, 3), Couplings(0, 0, 0)) == (1.0, 1.0)
    with pytest.raises(ValueError):
        kacward_partition_pair(TorusSpec(2, 3), Couplings(1, 1, 1))


def test_kacward_identity_against_oracle():
    # universal: det_i = signed_i^2 ; literal nonneg-root equality on
    # branch-positive draws, which include the two worked examples
    spec = TorusSpec(3, 3)
    p1 = faithful_projection(spec, "G1")
    p2 = faithful_projection(spec, "G2")
    draws = [Couplings(0.4, 0.4, 0.4), Couplings(-0.6, 0.8, -0.3)] + seeded_couplings(7, 8)
    n_pos = 0
    for J in draws:
        zt, s1, s2, oh = even_subgraph_sums(spec, J, p1, p2)
        q1, q2 = kacward_partition_pair(spec, J)
        assert q1 * q1 == pytest.approx(s1 * s1, rel=1e-10)
        assert q2 * q2 == pytest.approx(s2 * s2, rel=1e-10)
        if s1 > 0 and s2 > 0:
            n_pos += 1
            assert q1 == pytest.approx(s1, rel=1e-10)
            assert q2 == pytest.approx(s2, rel=1e-10)
            assert q1 + q2 == pytest.approx(2 * (zt - oh), rel=1e-10)
    assert n_pos >= 4


def test_product_formula_converges_in_L():
    # Riemann-sum convergence: (1/L) log det approaches a limit, successive
    # doubling differences shrink by at least 2x
    J = Couplings(0.5, -0.7, 0.2)
    M = 3
    vals = {}
    for L in (4, 8, 16, 32):
        vals[L] = product_formula_log_det(TorusSpec(L, M), J, "G1") / L
    d1 = abs(vals[8] - vals[4])
    d2 = abs(vals[16] - vals[8])
    d3 = abs(vals[32] - vals[16])
    assert d2 <= d1 / 2
    assert d3 <= d2 / 2
