"""Kac-Ward matrices, their determinants, and the Fourier product formula.

The directed-edge matrix K of a projection has entry
exp(i/2 * (turning angle between consecutive edges) + i/2 * (integrated angle
of the source edge)) wherever edge f continues edge e without backtracking.
With W = diag(tanh J_e), the square root of det(1 - K W) reproduces the signed
even-subgraph sum of the projection.

Making the matrix translation invariant (dropping the handle angles from K and
moving direction-dependent phases into the diagonal) block-diagonalizes it in
momentum space; each 6x6 block has the closed-form determinant implemented in
fourier_block_det, and the full determinant is the product over a momentum
grid whose offsets differ between the two projections.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    Couplings,
    DirectedEdge,
    Direction,
    EDGE_CLASS,
    REVERSE,
    TorusSpec,
    endpoint,
    flatten,
    turning_steps,
    unflatten,
)
from .projection import FaithfulProjection, faithful_projection, winding_of

#: Dimension above which det_one_minus reports only log-magnitude and phase.
DENSE_VALUE_LIMIT = 200


@dataclass(frozen=True)
class MomentumPoint:
    """A point of the momentum torus; the third component is always k1 + k2."""

    k1: float
    k2: float

    @property
    def k3(self) -> float:
        return self.k1 + self.k2


@dataclass(frozen=True)
class KacWardAssembly:
    """A fully assembled Kac-Ward matrix with its defining data."""

    spec: TorusSpec
    J: Couplings
    projection_variant: str
    matrix: np.ndarray


def khat0() -> np.ndarray:
    """The 6x6 half-angle phase matrix (zero-momentum Fourier block of K-tilde)."""
    P = np.zeros((6, 6), dtype=complex)
    for a in Direction:
        for b in Direction:
            if b == REVERSE[a]:
                continue
            P[a, b] = cmath.exp(1j * math.pi * turning_steps(a, b) / 8.0)
    return P


def assemble_K_tilde(spec: TorusSpec) -> np.ndarray:
    """Translation-invariant Kac-Ward matrix: turning phases only, no handles."""
    n = spec.n_directed
    K = np.zeros((n, n), dtype=complex)
    for fe in range(n):
        e = unflatten(spec, fe)
        tail = endpoint(spec, e)
        for d in Direction:
            if d == REVERSE[e.direction]:
                continue
            f = DirectedEdge(tail, d)
            K[fe, flatten(spec, f)] = cmath.exp(
                1j * math.pi * turning_steps(e.direction, d) / 8.0
            )
    return K


def assemble_K(spec: TorusSpec, variant: str) -> np.ndarray:
    """Kac-Ward matrix of projection G1 or G2.

    Equals K-tilde with every row of a handle edge multiplied by
    exp(i * pi * winding) = (-1)^winding.
    """
    p = faithful_projection(spec, variant)
    K = assemble_K_tilde(spec)
    signs = np.array(
        [(-1.0) ** (winding_of(p, unflatten(spec, fe)) % 2) for fe in range(spec.n_directed)]
    )
    return signs[:, None] * K


def assemble_W(spec: TorusSpec, J: Couplings) -> np.ndarray:
    """Diagonal of W: tanh(J_e) per directed edge, as a real vector."""
    t = [math.tanh(j) for j in J.by_class()]
    return np.array(
        [t[EDGE_CLASS[unflatten(spec, fe).direction]] for fe in range(spec.n_directed)]
    )


_WTILDE_PHASE_EXP = {
    # Phase exponents (x, y) with phase = exp(i*pi*(x/L + y/M)).
    "G1": {
        Direction.E: (1, 0),
        Direction.W: (-1, 0),
        Direction.N: (0, 1),
        Direction.S: (0, -1),
        Direction.NE: (1, 1),
        Direction.SW: (-1, -1),
    },
    "G2": {
        Direction.E: (0, 0),
        Direction.W: (0, 0),
        Direction.N: (0, 1),
        Direction.S: (0, -1),
        Direction.NE: (0, 1),
        Direction.SW: (0, -1),
    },
}


def assemble_W_tilde(spec: TorusSpec, J: Couplings, variant: str) -> np.ndarray:
    """Diagonal of the direction-phased weight matrix for projection G1 or G2."""
    w = assemble_W(spec, J).astype(complex)
    table = _WTILDE_PHASE_EXP[variant]
    for fe in range(spec.n_directed):
        x, y = table[unflatten(spec, fe).direction]
        w[fe] *= cmath.exp(1j * math.pi * (x / spec.L + y / spec.M))
    return w


@dataclass(frozen=True)
class DetResult:
    """det(1 - A) in value and log form, with a 1-norm condition estimate."""

    value: complex | None
    log_abs: float
    phase: complex
    cond: float


def det_one_minus(A: np.ndarray) -> DetResult:
    """Determinant of (I - A) by LU with partial pivoting.

    Above DENSE_VALUE_LIMIT the complex value is withheld (overflow guard) and
    only log|det| plus the unit phase is reported.
    """
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("det_one_minus needs a square matrix")
    B = np.eye(n, dtype=A.dtype) - A
    phase, log_abs = np.linalg.slogdet(B)
    cond = float(abs(np.linalg.cond(B, 1)))
    value = None
    if n <= DENSE_VALUE_LIMIT:
        value = complex(phase * math.exp(log_abs))
    return DetResult(value, float(log_abs), complex(phase), cond)


def _tanh_triple(J: Couplings) -> tuple[float, float, float]:
    return tuple(math.tanh(j) for j in J.by_class())


def block_values(k1, k2, J: Couplings) -> np.ndarray:
    """Closed-form 6x6 block determinant on broadcastable momentum arrays.

    prod(1 + t_i^2) + 8 prod(t_i)
      - 2 sum_i t_i (1 - t_{i+1}^2)(1 - t_{i+2}^2) cos(k_i),  k3 = k1 + k2.
    """
    t1, t2, t3 = _tanh_triple(J)
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    const = (1 + t1**2) * (1 + t2**2) * (1 + t3**2) + 8 * t1 * t2 * t3
    c1 = 2 * t1 * (1 - t2**2) * (1 - t3**2)
    c2 = 2 * t2 * (1 - t3**2) * (1 - t1**2)
    c3 = 2 * t3 * (1 - t1**2) * (1 - t2**2)
    return const - c1 * np.cos(k1) - c2 * np.cos(k2) - c3 * np.cos(k1 + k2)


def fourier_block_det(k: MomentumPoint, J: Couplings) -> float:
    """Closed-form determinant of the 6x6 momentum block."""
    return float(block_values(k.k1, k.k2, J))


def fourier_block_det_direct(k: MomentumPoint, J: Couplings) -> complex:
    """The same block determinant from the literal 6x6 matrix 1 - W-hat(k) K-hat(0)."""
    t1, t2, t3 = _tanh_triple(J)
    diag = np.array(
        [
            t1 * cmath.exp(1j * k.k1),
            t1 * cmath.exp(-1j * k.k1),
            t2 * cmath.exp(1j * k.k2),
            t2 * cmath.exp(-1j * k.k2),
            t3 * cmath.exp(1j * k.k3),
            t3 * cmath.exp(-1j * k.k3),
        ]
    )
    return complex(np.linalg.det(np.eye(6) - diag[:, None] * khat0()))


def momentum_grid(spec: TorusSpec, variant: str) -> tuple[np.ndarray, np.ndarray]:
    """(k1 values, k2 values) of the product formula for each projection.

    k2 always runs over the shifted grid (2 pi T_M + pi)/M; k1 is shifted for
    G1 and unshifted for G2 (whose horizontal weights carry no phase).
    """
    if variant == "G1":
        k1 = (2.0 * np.pi * np.arange(spec.L) + np.pi) / spec.L
    elif variant == "G2":
        k1 = 2.0 * np.pi * np.arange(spec.L) / spec.L
    else:
        raise ValueError(f"unknown projection variant {variant!r}")
    k2 = (2.0 * np.pi * np.arange(spec.M) + np.pi) / spec.M
    return k1, k2


def product_formula_log_det(spec: TorusSpec, J: Couplings, variant: str) -> float:
    """log det(1 - K-tilde W-tilde) as the sum of log block determinants.

    Raises if any block factor is negative beyond roundoff: that would
    contradict the nonnegativity of the determinants.
    """
    k1, k2 = momentum_grid(spec, variant)
    vals = block_values(k1[:, None], k2[None, :], J)
    floor = -1e-12 * max(1.0, float(np.abs(vals).max()))
    if vals.min() < floor:
        raise ArithmeticError(
            f"momentum block factor {vals.min()} negative beyond tolerance"
        )
    with np.errstate(divide="ignore"):
        logs = np.log(np.clip(vals, 0.0, None))
    return float(math.fsum(logs.ravel().tolist()))


def kacward_partition_pair(spec: TorusSpec, J: Couplings) -> tuple[float, float]:
    """(sqrt det(1-K1 W), sqrt det(1-K2 W)) with the nonnegative real root.

    A determinant with a significant imaginary or negative real part is a
    sign-convention bug, not a branch choice, and raises.
    """
    if spec.L < 3 or spec.M < 3:
        raise ValueError("partition identities need L, M >= 3")
    w = assemble_W(spec, J)
    out = []
    for variant in ("G1", "G2"):
        K = assemble_K(spec, variant)
        res = det_one_minus(K * w[None, :])
        val = res.value if res.value is not None else res.phase * math.exp(res.log_abs)
        scale = max(1.0, abs(val))
        if abs(val.imag) > 1e-9 * scale or val.real < -1e-9 * scale:
            raise ArithmeticError(
                f"det(1-K{variant}W) = {val} is not real nonnegative; "
                "projection sign convention is broken"
            )
        out.append(math.sqrt(max(val.real, 0.0)))
    return out[0], out[1]
