"""Independent ground-truth engines for desk-scale validation.

Three oracles, none of which touches the Kac-Ward machinery:

* brute_force_Z -- literal sum over all 2^(LM) spin configurations.
* even_subgraph_sums -- the high-temperature expansion summed over the cycle
  space, with signed variants weighted by drawn-crossing parities.
* transfer_matrix / cylinder_free_energy_tm -- the 2^M column transfer matrix
  and the exact infinite-cylinder free energy from its top eigenvalue.

Accumulations run through math.fsum so that 1e-12 comparisons over ~5e5-term
sums are meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .lattice import Couplings, TorusSpec, undirected_endpoints
from .projection import (
    FaithfulProjection,
    crossing_count_mask,
    faithful_projection,
    handle_masks,
    iter_even_masks,
)

MAX_BRUTE_SITES = 24
MAX_CYCLE_DIM = 25
MAX_TRANSFER_M = 14


class SizeExceededError(ValueError):
    """Requested lattice is beyond the documented enumeration bounds."""


@dataclass(frozen=True)
class SpinConfig:
    """One spin assignment: bit = 1 means sigma = +1 at that site index."""

    spec: TorusSpec
    bits: int

    def spin(self, i: int, j: int) -> int:
        return 1 if (self.bits >> self.spec.site_index(i, j)) & 1 else -1


def hamiltonian(spec: TorusSpec, J: Couplings, config: SpinConfig) -> float:
    """H(sigma) = -sum_e J_e sigma_x sigma_y, summed edge by edge."""
    js = J.by_class()
    total = 0.0
    for idx in range(spec.n_undirected):
        a, b = undirected_endpoints(spec, idx)
        total -= js[idx // spec.n_sites] * config.spin(*a) * config.spin(*b)
    return total


def _edge_site_pairs(spec: TorusSpec) -> list[tuple[int, int, int]]:
    """(edge class, site index a, site index b) for every undirected edge."""
    out = []
    for idx in range(spec.n_undirected):
        a, b = undirected_endpoints(spec, idx)
        out.append((idx // spec.n_sites, spec.site_index(*a), spec.site_index(*b)))
    return out


def brute_force_Z(spec: TorusSpec, J: Couplings) -> float:
    """Exact partition function by enumerating all spin configurations.

    Requires L, M >= 3 (below that the torus edge set degenerates into a
    multigraph and the Hamiltonian is ambiguous) and L*M <= 24.
    """
    if spec.L < 3 or spec.M < 3:
        raise ValueError("brute_force_Z needs L, M >= 3; smaller tori are ambiguous")
    n = spec.n_sites
    if n > MAX_BRUTE_SITES:
        raise SizeExceededError(f"{n} sites exceeds the {MAX_BRUTE_SITES}-site bound")

    js = J.by_class()
    pairs = _edge_site_pairs(spec)
    partials = []
    block = 1 << min(n, 20)
    for start in range(0, 1 << n, block):
        configs = np.arange(start, start + block, dtype=np.uint32)
        exponent = np.zeros(block, dtype=np.float64)
        for cls, a, b in pairs:
            # sigma_a * sigma_b = 1 - 2 * (bit_a XOR bit_b)
            par = ((configs >> a) ^ (configs >> b)) & 1
            exponent += js[cls] * (1.0 - 2.0 * par)
        partials.append(math.fsum(np.exp(exponent).tolist()))
    return math.fsum(partials)


@lru_cache(maxsize=8)
def _even_subgraph_histogram(
    spec: TorusSpec, variant1: str, variant2: str
) -> dict[tuple[int, int, int, int, int, int], int]:
    """Count even subgraphs by (edge counts per class, crossing parities, n_h parity).

    Weights are translation invariant, so these six integers determine every
    term of the signed sums; the enumeration runs once per lattice shape.
    """
    p1 = faithful_projection(spec, variant1)
    p2 = faithful_projection(spec, variant2)
    n = spec.n_sites
    hor_mask = (1 << n) - 1
    ver_mask = hor_mask << n
    obl_mask = hor_mask << (2 * n)
    xm, _, _ = handle_masks(spec)

    hist: dict[tuple[int, int, int, int, int, int], int] = {}
    for mask in iter_even_masks(spec):
        key = (
            (mask & hor_mask).bit_count(),
            ((mask & ver_mask) >> n).bit_count(),
            ((mask & obl_mask) >> (2 * n)).bit_count(),
            crossing_count_mask(p1, mask) & 1,
            crossing_count_mask(p2, mask) & 1,
            (mask & xm).bit_count() & 1,
        )
        hist[key] = hist.get(key, 0) + 1
    return hist


def even_subgraph_sums(
    spec: TorusSpec,
    J: Couplings,
    p1: FaithfulProjection,
    p2: FaithfulProjection,
) -> tuple[float, float, float, float]:
    """(Ztilde, signed1, signed2, odd_h) over all even subgraphs.

    Ztilde  = sum of w(Gamma) with w = prod tanh(J_e);
    signed_i = sum of w(Gamma) * (-1)^(crossings in projection i);
    odd_h   = sum of w(Gamma) over subgraphs with an odd number of
              column-L-to-column-1 handles.
    """
    if spec.L < 3 or spec.M < 3:
        raise ValueError("even_subgraph_sums needs L, M >= 3")
    if 2 * spec.n_sites + 1 > MAX_CYCLE_DIM:
        raise SizeExceededError(
            f"cycle-space dimension {2 * spec.n_sites + 1} exceeds {MAX_CYCLE_DIM}"
        )

    hist = _even_subgraph_histogram(spec, p1.variant, p2.variant)
    n = spec.n_sites
    # tanh values are dyadic rationals, so Fraction arithmetic makes the whole
    # signed sum exact; rounding happens once, at the final float conversions.
    t1, t2, t3 = (Fraction(math.tanh(j)) for j in J.by_class())
    pow1 = [t1**k for k in range(n + 1)]
    pow2 = [t2**k for k in range(n + 1)]
    pow3 = [t3**k for k in range(n + 1)]

    zt = s1 = s2 = oh = Fraction(0)
    for (n1, n2, n3, c1, c2, nh), count in hist.items():
        w = count * pow1[n1] * pow2[n2] * pow3[n3]
        zt += w
        s1 += -w if c1 else w
        s2 += -w if c2 else w
        if nh:
            oh += w
    return float(zt), float(s1), float(s2), float(oh)


def high_temperature_Z(spec: TorusSpec, J: Couplings, ztilde: float) -> float:
    """Z from the high-temperature expansion: 2^(LM) * prod_e cosh(J_e) * Ztilde."""
    n = spec.n_sites
    coshprod = math.prod(math.cosh(j) ** n for j in J.by_class())
    return (2.0**n) * coshprod * ztilde


def ring_partition_1d(M: int, J: float) -> float:
    """Closed form for the 1D Ising ring: (2 cosh J)^M + (2 sinh J)^M."""
    return (2.0 * math.cosh(J)) ** M + (2.0 * math.sinh(J)) ** M


# ---------------------------------------------------------------------------
# Column transfer matrix.
# ---------------------------------------------------------------------------


def _column_arrays(M: int):
    states = np.arange(1 << M, dtype=np.int64)
    mask = (1 << M) - 1
    rot = ((states >> 1) | ((states & 1) << (M - 1))) & mask
    # Intra-column vertical bond sum: sum_i eta_i eta_{i+1}, periodic.
    intra = np.zeros(1 << M, dtype=np.float64)
    for i in range(M):
        same = 1.0 - 2.0 * (((states >> i) ^ (states >> ((i + 1) % M))) & 1)
        intra += same
    return states, rot, intra


def transfer_matrix(M: int, J: Couplings) -> np.ndarray:
    """Dense 2^M x 2^M transfer matrix between column configurations.

    T[eta, eta'] = exp( sum_i J1*eta_i*eta'_i + J2*eta_i*eta_{i+1}
                        + J3*eta_i*eta'_{i+1} ), indices periodic in i.
    Strictly positive, hence Perron-Frobenius applies.  Built in row blocks to
    keep integer temporaries small at the top of the M range.
    """
    if not 2 <= M <= MAX_TRANSFER_M:
        raise SizeExceededError(f"transfer matrix bound is 2 <= M <= {MAX_TRANSFER_M}")
    states, rot, intra = _column_arrays(M)
    T = np.empty((1 << M, 1 << M), dtype=np.float64)
    block = 1 << min(M, 10)
    for start in range(0, 1 << M, block):
        rows = states[start : start + block, None]
        B = M - 2.0 * np.bitwise_count(rows ^ states[None, :])
        C = M - 2.0 * np.bitwise_count(rows ^ rot[None, :])
        T[start : start + block] = np.exp(
            J.J1 * B + J.J2 * intra[start : start + block, None] + J.J3 * C
        )
    return T


def _transfer_matvec(M: int, J: Couplings, v: np.ndarray) -> np.ndarray:
    """T @ v without materializing T, in row blocks."""
    states, rot, intra = _column_arrays(M)
    out = np.empty_like(v)
    block = 1 << min(M, 10)
    for start in range(0, 1 << M, block):
        rows = states[start : start + block, None]
        B = M - 2.0 * np.bitwise_count(rows ^ states[None, :])
        C = M - 2.0 * np.bitwise_count(rows ^ rot[None, :])
        T = np.exp(J.J1 * B + J.J2 * intra[start : start + block, None] + J.J3 * C)
        out[start : start + block] = T @ v
    return out


def _power_iteration_lambda(matvec, dim: int, rel_tol: float, max_iter: int):
    """Collatz-Wielandt bracketing of the Perron eigenvalue of a positive map.

    Deterministic all-ones start.  Returns (lambda, achieved interval) or None
    if the bracket has not collapsed after max_iter sweeps.
    """
    v = np.full(dim, 1.0 / math.sqrt(dim))
    best = None
    for _ in range(max_iter):
        w = matvec(v)
        ratios = w / v
        lo, hi = float(ratios.min()), float(ratios.max())
        best = (0.5 * (lo + hi), hi - lo)
        if hi - lo <= rel_tol * hi:
            return best
        v = w / np.linalg.norm(w)
    return None


def _lambda_max_by_squaring(T: np.ndarray, rel_tol: float) -> float:
    """log lambda_max via scaled repeated squaring, then a short power iteration.

    Squaring cures the slow Collatz-Wielandt collapse when the spectral gap is
    tiny (near-frozen columns); the Perron root is recovered from
    lambda_max(T^(2^k))^(1/2^k).
    """
    A = T.copy()
    log_scale = 0.0  # log of the factor taken out of A so far
    for k in range(1, 120):
        s = float(A.max())
        A = (A / s) @ (A / s)
        log_scale = 2.0 * (log_scale + math.log(s))
        got = _power_iteration_lambda(lambda v: A @ v, A.shape[0], rel_tol, 5)
        if got is not None:
            lam, _ = got
            return (math.log(lam) + log_scale) / (1 << k)
    raise RuntimeError("repeated-squaring power iteration failed to converge (bug)")


def log_lambda_max(M: int, J: Couplings, rel_tol: float = 1e-13) -> float:
    """log of the largest transfer-matrix eigenvalue, simple and positive."""
    if not 2 <= M <= MAX_TRANSFER_M:
        raise SizeExceededError(f"transfer matrix bound is 2 <= M <= {MAX_TRANSFER_M}")
    if M <= 6:
        # Small enough for a full dense solve; Perron root is the largest real part.
        T = transfer_matrix(M, J)
        lam = np.linalg.eigvals(T)
        return math.log(float(lam.real.max()))
    if M <= 12:
        T = transfer_matrix(M, J)
        got = _power_iteration_lambda(lambda v: T @ v, 1 << M, rel_tol, 2000)
        if got is not None:
            return math.log(got[0])
        return _lambda_max_by_squaring(T, rel_tol)
    got = _power_iteration_lambda(lambda v: _transfer_matvec(M, J, v), 1 << M, rel_tol, 20000)
    if got is None:
        raise RuntimeError("power iteration failed to converge (bug for a positive matrix)")
    return math.log(got[0])


def cylinder_free_energy_tm(M: int, J: Couplings) -> float:
    """Exact infinite-cylinder free energy density: -(1/M) log lambda_max."""
    return -log_lambda_max(M, J) / M


def torus_Z_tm(L: int, M: int, J: Couplings) -> float:
    """Exact torus partition function Tr T^L.

    Uses repeated products of the positive matrix: every intermediate sum has
    positive terms, so no cancellation degrades the trace.
    """
    T = transfer_matrix(M, J)
    P = T
    for _ in range(L - 1):
        P = P @ T
    return float(np.trace(P))
