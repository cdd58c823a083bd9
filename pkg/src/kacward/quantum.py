"""The 1D transverse-field quantum Ising chain via the classical cylinder.

Chain Hamiltonian (spin-1/2 operators S = sigma/2, periodic):

    H_L = - sum_i S^z_i S^z_{i+1} - h sum_i S^x_i.

The free energy per site, divided by beta so the beta -> infinity limit is
the ground-state energy, has the closed form

    f_qu(beta, h) = -(1/beta) log 2
                    - (1/(2 pi beta)) int dk log cosh(beta eps(h,k)/4),
    eps(h, k) = sqrt(1 + 4 h^2 + 4 h cos k).

Trotterization with n slices maps the chain onto the classical L x n torus
with J1 = beta/(4n) along the chain and J2 = -log(beta h / 2n)/2 along the
imaginary-time direction, so the infinite-chain, n-slice free energy is a
classical cylinder evaluation.  Exact diagonalization (dense, or translation
momentum sectors above 10 sites) provides the independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import Couplings
from .quadrature import QuadratureSpec, midpoint_doubling_1d
from . import thermo

MAX_DENSE_SITES = 10
MAX_ED_SITES = 14


@dataclass(frozen=True)
class QuantumParams:
    """Inverse temperature and transverse field; the free energy is even in h."""

    beta: float
    h: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")


def dispersion(h: float, k) -> np.ndarray:
    """Quasiparticle energy sqrt(1 + 4h^2 + 4h cos k), >= |1 - 2|h||."""
    return np.sqrt(1.0 + 4.0 * h * h + 4.0 * h * np.cos(np.asarray(k, dtype=float)))


def _log_cosh(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return ax - math.log(2.0) + np.log1p(np.exp(-2.0 * ax))


def _logsumexp(x: np.ndarray) -> float:
    m = float(np.max(x))
    return m + math.log(float(np.sum(np.exp(x - m))))


def quantum_free_energy(p: QuantumParams, quad: QuadratureSpec | None = None) -> float:
    """Infinite-volume free energy of the transverse-field chain."""
    quad = quad or QuadratureSpec()
    res = midpoint_doubling_1d(
        lambda k: [np.sum(_log_cosh(0.25 * p.beta * dispersion(p.h, k)))],
        -math.pi, math.pi, quad,
    )
    return -math.log(2.0) / p.beta - res.value / (2.0 * math.pi * p.beta)


# ---------------------------------------------------------------------------
# Exact diagonalization oracle.
# ---------------------------------------------------------------------------


def _ising_diagonal(L: int, states: np.ndarray) -> np.ndarray:
    """Diagonal part -(1/4) sum_i sigma_i sigma_{i+1} for each basis state."""
    total = np.zeros(len(states))
    for i in range(L):
        par = ((states >> i) ^ (states >> ((i + 1) % L))) & 1
        total += 1.0 - 2.0 * par
    return -0.25 * total


def _dense_spectrum(L: int, h: float) -> np.ndarray:
    size = 1 << L
    states = np.arange(size)
    H = np.zeros((size, size))
    H[states, states] = _ising_diagonal(L, states)
    for i in range(L):
        H[states ^ (1 << i), states] += -0.5 * h
    return np.linalg.eigvalsh(H)


def _orbits(L: int):
    """Cyclic-translation orbits: representatives with periods, plus per-state
    (representative, shift, period) tables."""
    size = 1 << L
    mask = size - 1
    rep = np.empty(size, np.int64)
    shift = np.empty(size, np.int64)
    period = np.empty(size, np.int64)
    visited = np.zeros(size, bool)
    reps = []
    for s in range(size):
        if visited[s]:
            continue
        orbit = [s]
        x = ((s << 1) & mask) | (s >> (L - 1))
        while x != s:
            orbit.append(x)
            x = ((x << 1) & mask) | (x >> (L - 1))
        R = len(orbit)
        reps.append((s, R))
        for l, y in enumerate(orbit):
            visited[y] = True
            rep[y] = s
            shift[y] = l
            period[y] = R
    return reps, rep, shift, period


def _momentum_spectrum(L: int, h: float) -> np.ndarray:
    """Full spectrum from translation momentum sectors (Bloch states).

    Each sector m collects representatives whose period R satisfies
    m R = 0 mod L; the spin-flip term connects Bloch states with amplitude
    -(h/2) e^{-i k l} sqrt(R_a / R_b).  Validated against _dense_spectrum in
    the tests; the assembled blocks must be Hermitian and their dimensions
    must add up to 2^L.
    """
    reps, rep, shift, period = _orbits(L)
    states = np.arange(1 << L)
    ez = _ising_diagonal(L, states)
    spectra = []
    total_dim = 0
    for m in range(L):
        k = 2.0 * math.pi * m / L
        sector = [(s, R) for (s, R) in reps if (m * R) % L == 0]
        if not sector:
            continue
        index = {s: i for i, (s, _) in enumerate(sector)}
        dim = len(sector)
        total_dim += dim
        H = np.zeros((dim, dim), dtype=complex)
        for i, (s, R) in enumerate(sector):
            H[i, i] += ez[s]
            if h == 0.0:
                continue
            for site in range(L):
                s2 = s ^ (1 << site)
                j = index.get(rep[s2])
                if j is None:
                    continue
                amp = -0.5 * h * math.sqrt(R / period[s2])
                H[j, i] += amp * np.exp(-1j * k * shift[s2])
        if not np.allclose(H, H.conj().T, atol=1e-12):
            raise AssertionError("momentum block is not Hermitian (bug)")
        spectra.append(np.linalg.eigvalsh(H))
    if total_dim != 1 << L:
        raise AssertionError("momentum sectors do not span the full space (bug)")
    return np.concatenate(spectra)


def exact_diag_spectrum(L: int, h: float) -> np.ndarray:
    if not 2 <= L <= MAX_ED_SITES:
        raise ValueError(f"exact diagonalization bound is 2 <= L <= {MAX_ED_SITES}")
    if L <= MAX_DENSE_SITES:
        return _dense_spectrum(L, h)
    return _momentum_spectrum(L, h)


def exact_diag_free_energy(L: int, p: QuantumParams) -> float:
    """-(1/(beta L)) log Tr exp(-beta H_L) from the full spectrum."""
    lam = exact_diag_spectrum(L, p.h)
    return -_logsumexp(-p.beta * lam) / (p.beta * L)


# ---------------------------------------------------------------------------
# Trotter mapping to the classical cylinder.
# ---------------------------------------------------------------------------


def trotter_couplings(p: QuantumParams, n: int) -> Couplings:
    """Classical couplings of the n-slice Trotterization; needs n > beta h / 2."""
    if p.h <= 0:
        raise ValueError("the Trotter route needs h > 0; use h -> -h symmetry")
    if n <= 0.5 * p.beta * p.h:
        raise ValueError("need n > beta h / 2 so the time-direction coupling is real")
    return Couplings(0.25 * p.beta / n, -0.5 * math.log(0.5 * p.beta * p.h / n), 0.0)


def trotter_free_energy(p: QuantumParams, n: int,
                        quad: QuadratureSpec | None = None) -> float:
    """n-slice approximation of the quantum free energy, O(1/n) accurate.

    [-(n/2) log(beta h / 2n) + n f_n(J1, J2, 0)] / beta with f_n the classical
    infinite-cylinder free energy at M = n Trotter slices.
    """
    J = trotter_couplings(p, n)
    f_cyl = thermo.cylinder_free_energy(n, J, quad).f
    return (-0.5 * n * math.log(0.5 * p.beta * p.h / n) + n * f_cyl) / p.beta


def _kron_chain(factor: np.ndarray, L: int) -> np.ndarray:
    out = np.ones((1, 1))
    for _ in range(L):
        out = np.kron(out, factor)
    return out


def lie_trotter_trace(L: int, n: int, p: QuantumParams) -> float:
    """Tr[(e^{(beta/n) sum SzSz} prod_i (1 + (beta h / n) S^x_i))^n] by dense algebra."""
    states = np.arange(1 << L)
    D = np.exp((p.beta / n) * (-_ising_diagonal(L, states)))
    c = 0.5 * p.beta * p.h / n
    B = _kron_chain(np.array([[1.0, c], [c, 1.0]]), L)
    M = D[:, None] * B
    P = np.linalg.matrix_power(M, n)
    return float(np.trace(P))


def trotter_classical_Z(L: int, n: int, p: QuantumParams) -> float:
    """exp((L n / 2) log(beta h / 2n)) * Z_{L,n}(J1, J2, J3=0), the classical side
    of the finite Lie-Trotter identity."""
    from .oracle import brute_force_Z
    from .lattice import TorusSpec

    J = trotter_couplings(p, n)
    return math.exp(0.5 * L * n * math.log(0.5 * p.beta * p.h / n)) * brute_force_Z(
        TorusSpec(L, n), J
    )


def finite_trotter_free_energy(L: int, n: int, p: QuantumParams) -> float:
    """f^qu_{L,n}: -(1/L) log Tr[(e^{(beta/n) sum SzSz} e^{(beta h/n) sum Sx})^n].

    The symmetrized-exponential slice of the limit-interchange bound; not yet
    divided by beta.
    """
    states = np.arange(1 << L)
    D = np.exp((p.beta / n) * (-_ising_diagonal(L, states)))
    th = 0.5 * p.beta * p.h / n
    X = np.array([[math.cosh(th), math.sinh(th)], [math.sinh(th), math.cosh(th)]])
    # Tr (D X)^n = Tr (D^{1/2} X D^{1/2})^n with a symmetric positive matrix.
    sq = np.sqrt(D)
    S = sq[:, None] * _kron_chain(X, L) * sq[None, :]
    lam = np.linalg.eigvalsh(S)
    return -_logsumexp(float(n) * np.log(lam)) / L


def infinite_trotter_free_energy(n: int, p: QuantumParams,
                                 quad: QuadratureSpec | None = None) -> float:
    """f^qu_{infinity,n}: the L -> infinity limit of finite_trotter_free_energy.

    The exponential slice factors as C^{Ln} Z_{L,n}(beta/4n, J2', 0) with
    C = sqrt(sinh(beta h / n)/2) and J2' = log(coth(beta h / 2n))/2, so the
    limit is -n log C + n f_n^{cyl}.
    """
    if p.h <= 0:
        raise ValueError("needs h > 0")
    th = p.beta * p.h / n
    C = math.sqrt(0.5 * math.sinh(th))
    J2p = 0.5 * math.log(1.0 / math.tanh(0.5 * th))
    f_cyl = thermo.cylinder_free_energy(n, Couplings(0.25 * p.beta / n, J2p, 0.0), quad).f
    return -n * math.log(C) + n * f_cyl


# ---------------------------------------------------------------------------
# The 2d-to-1d momentum-sum identity and the ground state.
# ---------------------------------------------------------------------------


def sum_identity_lhs_rhs_a(M: int, a: float) -> tuple[float, float]:
    """Both sides of sum_{k in shifted grid} log(a - cos k) for any a > 1.

    rhs = -M log 2 + M log(a + sqrt(a^2 - 1)) + 2 log(1 + (a + sqrt(a^2-1))^{-M}).
    """
    if a <= 1.0:
        raise ValueError("the identity needs a > 1")
    if M < 2:
        raise ValueError("need M >= 2")
    k = (2.0 * np.pi * np.arange(M) + np.pi) / M
    lhs = float(np.sum(np.log(a - np.cos(k))))
    cothJ = a + math.sqrt(a * a - 1.0)
    rhs = -M * math.log(2.0) + M * math.log(cothJ) + 2.0 * math.log1p(cothJ ** (-M))
    return lhs, rhs


def sum_identity_check(M: int, J2: float) -> tuple[float, float]:
    """The identity at a = coth(2 J2), where a + sqrt(a^2-1) = coth(J2); J2 > 0."""
    if J2 <= 0:
        raise ValueError("need J2 > 0")
    return sum_identity_lhs_rhs_a(M, 1.0 / math.tanh(2.0 * J2))


GSE_EXCLUSION = 1e-9


def ground_state_energy(h: float, quad: QuadratureSpec | None = None) -> float:
    """e0(h) = -(1/(8 pi)) int dk eps(h, k); the integrand kinks at |h| = 1/2."""
    quad = quad or QuadratureSpec()
    res = midpoint_doubling_1d(
        lambda k: [np.sum(dispersion(h, k))], -math.pi, math.pi, quad
    )
    return -res.value / (8.0 * math.pi)


def gse_second_derivative(h: float, quad: QuadratureSpec | None = None) -> float:
    """e0''(h); diverges like log|h -+ 1/2| near the quantum critical fields.

    Refuses |h| within GSE_EXCLUSION of 1/2 where the first integral blows up.
    """
    if abs(abs(h) - 0.5) <= GSE_EXCLUSION:
        raise ValueError("second derivative excluded within 1e-9 of |h| = 1/2")
    quad = quad or QuadratureSpec(tol=1e-9, max_doublings=16)

    def sums(k):
        eps = dispersion(h, k)
        return [np.sum(1.0 / eps), np.sum((2.0 * h + np.cos(k)) ** 2 / eps**3)]

    res = midpoint_doubling_1d(sums, -math.pi, math.pi, quad)
    return (-float(res.values[0]) + float(res.values[1])) / (2.0 * math.pi)
