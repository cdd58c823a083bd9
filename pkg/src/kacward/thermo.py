"""Free energies of the triangular-lattice Ising model and their derivatives.

Everything is built on the decomposition of the momentum-space integrand into
g(beta) + h(beta; k1, k2) with

    g = prod_i cosh(2 beta J_i) + prod_i sinh(2 beta J_i) - sum_i sinh(2 beta J_i)
    h = sum_i sinh(2 beta J_i) (1 - cos k_i),        k3 = k1 + k2.

The infinite-cylinder free energy pairs a k1 integral with the exact shifted
k2 grid (2 pi T_M + pi)/M; the plane uses the full tensor midpoint rule.
Derivatives in beta are evaluated with analytic hyperbolic chain rules -- the
only finite differences in this package live in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .determinants import MomentumPoint
from .lattice import Couplings
from .quadrature import (
    QuadratureSpec,
    QuadResult,
    midpoint_doubling_1d,
    midpoint_doubling_2d,
    midpoint_doubling_2d_lenient,
)

LOG2 = math.log(2.0)

#: Derivative integrals refuse beta closer than this to a detected critical point.
CRITICAL_EXCLUSION = 1e-9


class CriticalProximityError(ValueError):
    """beta is numerically indistinguishable from the critical point."""


@dataclass(frozen=True)
class GHDecomposition:
    """g, h and their first/second beta-derivatives at one momentum point."""

    g: float
    g1: float
    g2: float
    h: float
    h1: float
    h2: float


@dataclass(frozen=True)
class ThermoSample:
    """One free-energy evaluation; f1/f2 present when derivatives were requested."""

    beta: float
    f: float
    f1: float | None
    f2: float | None
    quadrature_error: float


def g_derivatives(beta: float, J: Couplings) -> tuple[float, float, float]:
    """(g, g', g'') at inverse temperature beta for couplings J."""
    a = [2.0 * j for j in J.by_class()]
    c = [math.cosh(beta * ai) for ai in a]
    s = [math.sinh(beta * ai) for ai in a]

    def prod_except(vals, skip):
        out = 1.0
        for idx, v in enumerate(vals):
            if idx not in skip:
                out *= v
        return out

    g = c[0] * c[1] * c[2] + s[0] * s[1] * s[2] - (s[0] + s[1] + s[2])
    g1 = sum(a[i] * s[i] * prod_except(c, {i}) for i in range(3))
    g1 += sum(a[i] * c[i] * prod_except(s, {i}) for i in range(3))
    g1 -= sum(a[i] * c[i] for i in range(3))

    g2 = sum(a[i] ** 2 * c[i] * prod_except(c, {i}) for i in range(3))
    g2 += sum(
        a[i] * s[i] * a[j] * s[j] * prod_except(c, {i, j})
        for i in range(3)
        for j in range(3)
        if j != i
    )
    g2 += sum(a[i] ** 2 * s[i] * prod_except(s, {i}) for i in range(3))
    g2 += sum(
        a[i] * c[i] * a[j] * c[j] * prod_except(s, {i, j})
        for i in range(3)
        for j in range(3)
        if j != i
    )
    g2 -= sum(a[i] ** 2 * s[i] for i in range(3))
    return g, g1, g2


def eval_gh(beta: float, k: MomentumPoint, J: Couplings) -> GHDecomposition:
    """g/h decomposition with analytic beta-derivatives at one momentum point."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    g, g1, g2 = g_derivatives(beta, J)
    a = [2.0 * j for j in J.by_class()]
    c = [math.cosh(beta * ai) for ai in a]
    s = [math.sinh(beta * ai) for ai in a]
    w = [1.0 - math.cos(kk) for kk in (k.k1, k.k2, k.k3)]
    h = sum(s[i] * w[i] for i in range(3))
    h1 = sum(a[i] * c[i] * w[i] for i in range(3))
    h2 = sum(a[i] ** 2 * s[i] * w[i] for i in range(3))
    return GHDecomposition(g, g1, g2, h, h1, h2)


def _sinh_coeffs(beta: float, J: Couplings):
    """(s_i, s'_i, s''_i) arrays entering h and its derivatives."""
    a = np.array([2.0 * j for j in J.by_class()])
    c = np.cosh(beta * a)
    s = np.sinh(beta * a)
    return s, a * c, a * a * s


def _chunked_plane_sums(beta: float, J: Couplings, k1: np.ndarray, k2: np.ndarray,
                        want_value: bool, want_derivs: bool) -> np.ndarray:
    """Grid sums of the requested plane integrands, sharing one g+h evaluation.

    Returns, in order, the sums over the tensor grid of the per-point
    contributions to f (log), then f1 and f2 (already combined with their
    1/(8 pi^2) prefactors and the analytic g-derivatives).
    """
    g, g1, g2 = g_derivatives(beta, J)
    s, sp, spp = _sinh_coeffs(beta, J)
    c1, s1v = np.cos(k1), np.sin(k1)
    c2, s2v = np.cos(k2), np.sin(k2)
    pref = 1.0 / (8.0 * math.pi**2)

    n_out = (1 if want_value else 0) + (2 if want_derivs else 0)
    totals = np.zeros(n_out)
    chunk = max(1, (1 << 21) // max(len(k2), 1))
    for lo in range(0, len(k1), chunk):
        hi = min(lo + chunk, len(k1))
        ck1 = c1[lo:hi, None]
        sk1 = s1v[lo:hi, None]
        w1 = 1.0 - ck1
        w2 = 1.0 - c2[None, :]
        w3 = 1.0 - (ck1 * c2[None, :] - sk1 * s2v[None, :])
        gph = g + s[0] * w1 + s[1] * w2 + s[2] * w3
        out = []
        if want_value:
            out.append(-pref * np.sum(np.log(gph)))
        if want_derivs:
            hp = sp[0] * w1 + sp[1] * w2 + sp[2] * w3
            ratio = (g1 + hp) / gph
            out.append(-pref * np.sum(ratio))
            hpp = spp[0] * w1 + spp[1] * w2 + spp[2] * w3
            out.append(np.sum(-pref * (g2 + hpp) / gph + pref * ratio**2))
        totals += np.array(out)
    return totals


def plane_free_energy(J: Couplings, quad: QuadratureSpec | None = None,
                      beta: float = 1.0, strict: bool = True) -> ThermoSample:
    """Free energy density on the plane: -log2 - (1/8 pi^2) integral of log(g+h).

    The couplings are used as given; pass J.scaled(beta) (or the beta
    argument, which scales internally) for a temperature sweep point.
    """
    quad = quad or QuadratureSpec()
    Jb = J.scaled(beta) if beta != 1.0 else J
    driver = midpoint_doubling_2d if strict else midpoint_doubling_2d_lenient
    res = driver(lambda k1, k2: _chunked_plane_sums(1.0, Jb, k1, k2, True, False), quad)
    return ThermoSample(beta, -LOG2 + res.value, None, None, res.error)


def plane_thermo_sample(beta: float, J: Couplings, quad: QuadratureSpec | None = None,
                        strict: bool = True) -> ThermoSample:
    """f, f', f'' at one beta in a single shared-grid doubling ladder."""
    quad = quad or QuadratureSpec()
    _refuse_near_critical(beta, J)
    driver = midpoint_doubling_2d if strict else midpoint_doubling_2d_lenient
    res = driver(lambda k1, k2: _chunked_plane_sums(beta, J, k1, k2, True, True), quad)
    f = -LOG2 + float(res.values[0])
    return ThermoSample(beta, f, float(res.values[1]), float(res.values[2]),
                        float(res.errors.max()))


def free_energy_derivatives(beta: float, J: Couplings,
                            quad: QuadratureSpec | None = None,
                            strict: bool = True) -> tuple[float, float, float]:
    """(f'(beta), f''(beta), quadrature error) from the analytic integrands.

    Refuses beta within CRITICAL_EXCLUSION of the critical point: the CDCL
    root when J1 = J2 > 0, otherwise a spectral-gap floor (the paper gives no
    criticality criterion for general couplings).
    """
    quad = quad or QuadratureSpec()
    if beta <= 0:
        raise ValueError("beta must be positive")
    _refuse_near_critical(beta, J)
    driver = midpoint_doubling_2d if strict else midpoint_doubling_2d_lenient
    res = driver(lambda k1, k2: _chunked_plane_sums(beta, J, k1, k2, False, True), quad)
    return float(res.values[0]), float(res.values[1]), float(res.errors.max())


def _refuse_near_critical(beta: float, J: Couplings) -> None:
    from . import critical

    if abs(J.J1 - J.J2) < 1e-15 and J.J1 > 0:
        res = critical.beta_c_from_J3(J.J3 / J.J1, with_hypotheses=False)
        if res.beta_c is not None and abs(beta - res.beta_c / J.J1) <= CRITICAL_EXCLUSION:
            raise CriticalProximityError(
                f"beta={beta} is within {CRITICAL_EXCLUSION} of the critical point"
            )
        return
    g, _, _ = g_derivatives(beta, J)
    gap = g + critical.min_h(beta, J)[0]
    scale = max(1.0, math.prod(math.cosh(2 * beta * j) for j in J.by_class()))
    if gap <= 1e-15 * scale:
        raise CriticalProximityError(
            f"spectral gap {gap} at beta={beta} is below the float64 resolution floor"
        )


def cylinder_free_energy(M: int, J: Couplings, quad: QuadratureSpec | None = None,
                         beta: float = 1.0) -> ThermoSample:
    """Infinite-cylinder free energy density f_M (exact shifted k2 sum).

    -log2 - (1/(4 pi M)) * integral dk1 sum_{k2 in (2 pi T_M + pi)/M} log(g+h).
    """
    if M < 2:
        raise ValueError("cylinder needs M >= 2")
    quad = quad or QuadratureSpec()
    Jb = J.scaled(beta)
    s, _, _ = _sinh_coeffs(1.0, Jb)
    g, _, _ = g_derivatives(1.0, Jb)
    k2 = (2.0 * np.pi * np.arange(M) + np.pi) / M
    c2, s2v = np.cos(k2), np.sin(k2)

    def sums(k1):
        c1 = np.cos(k1)[:, None]
        s1v = np.sin(k1)[:, None]
        gph = (g + s[0] * (1.0 - c1) + s[1] * (1.0 - c2[None, :])
               + s[2] * (1.0 - (c1 * c2[None, :] - s1v * s2v[None, :])))
        return [np.sum(np.log(gph))]

    res = midpoint_doubling_1d(sums, -math.pi, math.pi, quad)
    f = -LOG2 - res.value / (4.0 * math.pi * M)
    return ThermoSample(beta, f, None, None, res.error / (4.0 * math.pi * M))


@dataclass(frozen=True)
class LogSingularityFit:
    """Least-squares fit of f'' against log(distance) on both sides of beta_c."""

    slope: float
    intercept: float
    residual: float
    slope_below: float
    slope_above: float
    samples: tuple[tuple[float, float], ...]

    @property
    def consistent_sign(self) -> bool:
        return self.slope_below * self.slope_above > 0


def _lsq_log_fit(ds, vals) -> tuple[float, float, float]:
    """(slope, intercept, rms residual relative to the value spread)."""
    A = np.vstack([np.log(ds), np.ones(len(ds))]).T
    v = np.asarray(vals)
    sol, *_ = np.linalg.lstsq(A, v, rcond=None)
    pred = A @ sol
    spread = float(v.max() - v.min()) or 1.0
    return float(sol[0]), float(sol[1]), float(np.sqrt(np.mean((v - pred) ** 2))) / spread


def log_singularity_fit(J: Couplings, beta_c: float, distances,
                        quad: QuadratureSpec | None = None) -> LogSingularityFit:
    """Fit f''(beta_c +/- d) = A log d + B_side over the given positive distances.

    Each side gets its own intercept (the non-divergent part of f'' is not
    symmetric across beta_c) but the log amplitude must agree in sign; the
    reported slope/intercept come from the shared-slope fit and the residual
    is the worse of the two per-side rms misfits relative to their spreads.
    """
    ds = sorted(float(d) for d in distances)
    if not ds or ds[0] <= 0 or beta_c <= 0:
        raise ValueError("need positive distances and beta_c")
    quad = quad or QuadratureSpec(tol=1e-7)
    below, above, samples = [], [], []
    for d in ds:
        _, f2b, _ = free_energy_derivatives(beta_c - d, J, quad)
        _, f2a, _ = free_energy_derivatives(beta_c + d, J, quad)
        below.append(f2b)
        above.append(f2a)
        samples.append((beta_c - d, f2b))
        samples.append((beta_c + d, f2a))
    slope_b, _, res_b = _lsq_log_fit(ds, below)
    slope_a, _, res_a = _lsq_log_fit(ds, above)
    # Shared slope, one intercept per side.
    logd = np.log(ds)
    n = len(ds)
    A = np.zeros((2 * n, 3))
    A[:n, 0] = logd
    A[n:, 0] = logd
    A[:n, 1] = 1.0
    A[n:, 2] = 1.0
    v = np.array(below + above)
    sol, *_ = np.linalg.lstsq(A, v, rcond=None)
    slope = float(sol[0])
    intercept = float(0.5 * (sol[1] + sol[2]))
    return LogSingularityFit(slope, intercept, max(res_b, res_a),
                             slope_b, slope_a, tuple(samples))


def free_energy_sweep(J: Couplings, betas, quad: QuadratureSpec | None = None,
                      derivatives: bool = True, cylinder_M: int | None = None):
    """ThermoSample rows over a beta sweep, optionally with cylinder columns.

    Returns a list of dict rows ready for tabular output; the sweep is lenient
    about quadrature saturation near criticality and reports the achieved
    error instead of failing.
    """
    quad = quad or QuadratureSpec()
    rows = []
    for beta in betas:
        beta = float(beta)
        if derivatives:
            try:
                ts = plane_thermo_sample(beta, J, quad, strict=False)
            except CriticalProximityError:
                fs = plane_free_energy(J, quad, beta=beta, strict=False)
                ts = ThermoSample(beta, fs.f, math.nan, math.nan, fs.quadrature_error)
        else:
            ts = plane_free_energy(J, quad, beta=beta, strict=False)
        row = {"beta": beta, "f": ts.f, "f1": ts.f1, "f2": ts.f2,
               "quadrature_error": ts.quadrature_error}
        if cylinder_M is not None:
            from . import oracle

            row["f_cylinder"] = cylinder_free_energy(cylinder_M, J, quad, beta=beta).f
            row["f_cylinder_tm"] = oracle.cylinder_free_energy_tm(cylinder_M, J.scaled(beta))
        rows.append(row)
    return rows
