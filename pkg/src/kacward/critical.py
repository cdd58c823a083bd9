"""Critical temperatures: the CDCL equation, its inversion, and hypothesis checks.

With J1 = J2 = 1 the critical inverse temperature solves a(beta) = 0 where

    a(beta) = 1 + tanh^2(beta) tanh(beta J3) - 2 tanh(beta) - tanh(beta J3)
              - tanh^2(beta) - 2 tanh(beta) tanh(beta J3),

equivalently tanh(beta_c) = j^{-1}(J3) for the strictly decreasing

    j(t) = artanh((1 - 2t - t^2) / (1 + 2t - t^2)) / artanh(t),   t in (0, 1),

which maps (0, 1) onto (-1, +infinity): a unique root exists iff J3 > -1.
The link to the free energy is g(beta) = cosh^2(2 beta) cosh(2 beta J3) a(beta)^2,
so g vanishes exactly at the CDCL root, where the log singularity of the
specific heat lives (provided g'' > 0 and h grows quadratically, which
singularity_hypotheses checks numerically).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .determinants import MomentumPoint
from .lattice import Couplings
from . import thermo

BISECTION_TOL = 1e-14
LOG2 = math.log(2.0)
LOG2_HALF = 0.5 * math.log(2.0)


def a_of_beta(beta: float, J3: float) -> float:
    """The CDCL polynomial a(beta) for J1 = J2 = 1, exactly the six printed terms."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    t = math.tanh(beta)
    u = math.tanh(beta * J3)
    return 1.0 + t * t * u - 2.0 * t - u - t * t - 2.0 * t * u


def a_prime_closed_form(beta_c: float, J3: float) -> float:
    """a'(beta_c) = -4 (1 - t^2)(1 + t^2 + 2 t J3) / (1 + 2t - t^2), t = tanh(beta_c).

    Valid at the CDCL root only; nonzero whenever J3 > -1 and t < 1, which is
    what makes g'' > 0 at criticality.
    """
    t = math.tanh(beta_c)
    return -4.0 * (1.0 - t * t) * (1.0 + t * t + 2.0 * t * J3) / (1.0 + 2.0 * t - t * t)


def j_of_t(t: float) -> float:
    """J3 as a function of t = tanh(beta) along the critical line; strictly decreasing."""
    if not 0.0 < t < 1.0:
        raise ValueError("j(t) is defined on 0 < t < 1")
    num = 1.0 - 2.0 * t - t * t
    den = 1.0 + 2.0 * t - t * t
    ratio = num / den
    # For t in (0,1) the ratio stays inside (-1, 1); anything else is a bug.
    assert -1.0 < ratio < 1.0
    return math.atanh(ratio) / math.atanh(t)


@dataclass(frozen=True)
class SingularityHypotheses:
    """Numerical checks of the log-singularity proposition at beta_c."""

    g2: float
    c_lower_bound: float
    sufficient_condition: tuple[bool, bool]
    a_prime: float | None


@dataclass(frozen=True)
class CriticalResult:
    beta_c: float | None
    method: str
    gap_min_location: MomentumPoint | None
    hypothesis_checks: SingularityHypotheses | None


def _softplus(x: float) -> float:
    if x >= 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def _cdcl_gap(beta: float, J3: float) -> float:
    """Strictly decreasing reparametrization of a(beta), stable at any beta.

    With d = 1 - tanh(beta) and d3 = 1 + tanh(beta J3), the six-term a(beta)
    rearranges exactly to 2d(2-d) - d3(2-d^2); both factors are positive, so
    sign(a) = sign(log[2d(2-d)] - log[d3(2-d^2)]).  Using
    log d = log2 - softplus(2 beta) keeps the comparison meaningful out to
    beta in the hundreds (J3 close to -1), where tanh saturates and the
    printed form underflows to exact zeros.
    """
    d = 2.0 / (1.0 + math.exp(min(2.0 * beta, 700.0)))
    return (LOG2 - _softplus(2.0 * beta) + math.log(2.0 - d)
            + _softplus(-2.0 * beta * J3) - math.log(2.0 - d * d))


def beta_c_from_J3(J3: float, with_hypotheses: bool = True) -> CriticalResult:
    """Solve the CDCL equation for J1 = J2 = 1: tanh(beta_c) = j^{-1}(J3).

    Bisection runs on a log-space rearrangement of a(beta) with the same
    unique root as j(t) = J3 (strict monotonicity of j); no critical point
    exists for J3 <= -1, where beta_c diverges like log2 / (2(1+J3)).
    """
    if J3 <= -1.0:
        return CriticalResult(None, "cdcl_inversion", None, None)
    lo = 1e-12
    hi = max(10.0, 1.1 * LOG2_HALF / (1.0 + J3))
    assert _cdcl_gap(lo, J3) > 0.0 and _cdcl_gap(hi, J3) < 0.0
    while hi - lo > BISECTION_TOL * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if _cdcl_gap(mid, J3) > 0.0:
            lo = mid
        else:
            hi = mid
    beta_c = 0.5 * (lo + hi)
    hyp = None
    # Hypothesis checks involve cosh(2 beta_c)^2 cosh(2 beta_c J3); skip them
    # where they would overflow (J3 near -1), the regime the paper treats
    # asymptotically anyway.
    if with_hypotheses and beta_c * (2.0 + abs(J3)) < 300.0:
        hyp = singularity_hypotheses(Couplings(1.0, 1.0, J3), beta_c)
    return CriticalResult(beta_c, "cdcl_inversion", MomentumPoint(0.0, 0.0), hyp)


def min_h(beta: float, J: Couplings) -> tuple[float, MomentumPoint]:
    """Minimum of h(beta; k1, k2) over the momentum torus and its location.

    For J1 = J2 > 0 the closed form applies: with
    alpha = -sinh(2 beta J3)/sinh(2 beta J1), the minimum is 0 at the origin
    when alpha <= 1/2 and 2 sinh(2 beta J1)(1 - alpha - 1/(4 alpha)) otherwise.
    Other couplings fall back to a midpoint grid scan plus coordinate descent.
    """
    if abs(J.J1 - J.J2) < 1e-15 and J.J1 > 0:
        s = math.sinh(2.0 * beta * J.J1)
        alpha = -math.sinh(2.0 * beta * J.J3) / s
        if alpha <= 0.5:
            return 0.0, MomentumPoint(0.0, 0.0)
        # cos((k1+k2)/2) = 1/(2 alpha) at the minimizing ray k1 = k2.
        u = math.acos(1.0 / (2.0 * alpha))
        return 2.0 * s * (1.0 - alpha - 1.0 / (4.0 * alpha)), MomentumPoint(u, u)
    return _min_h_scan(beta, J)


def _h_value(beta: float, J: Couplings, k1, k2):
    s = [math.sinh(2.0 * beta * j) for j in J.by_class()]
    return (s[0] * (1.0 - np.cos(k1)) + s[1] * (1.0 - np.cos(k2))
            + s[2] * (1.0 - np.cos(k1 + k2)))


def _min_h_scan(beta: float, J: Couplings, n: int = 512) -> tuple[float, MomentumPoint]:
    nodes = -math.pi + 2.0 * math.pi * (np.arange(n) + 0.5) / n
    vals = _h_value(beta, J, nodes[:, None], nodes[None, :])
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    k1, k2 = float(nodes[i]), float(nodes[j])
    step = 2.0 * math.pi / n
    best = float(vals[i, j])
    while step > 1e-13:
        moved = False
        for dk1, dk2 in ((step, 0), (-step, 0), (0, step), (0, -step),
                         (step, step), (-step, -step), (step, -step), (-step, step)):
            cand = float(_h_value(beta, J, k1 + dk1, k2 + dk2))
            if cand < best - 1e-18:
                best, k1, k2, moved = cand, k1 + dk1, k2 + dk2, True
                break
        if not moved:
            step /= 2.0
    return best, MomentumPoint(k1, k2)


def singularity_hypotheses(J: Couplings, beta_c: float,
                           grid: int = 512) -> SingularityHypotheses:
    """Check g''(beta_c) > 0 inputs and the quadratic lower bound on h.

    c is the grid minimum of h / (k1^2 + k2^2) over midpoint nodes (origin
    excluded by construction), a resolution-limited lower-bound estimate.
    The sufficient condition is sinh(2 b J_i) + 2 sinh(2 b J3) > 0 for i = 1, 2.
    """
    g, _, g2 = thermo.g_derivatives(beta_c, J)
    if abs(g) > 1e-12 * max(1.0, abs(g2)):
        raise ValueError(f"beta_c={beta_c} is not a root of g (g={g})")
    nodes = -math.pi + 2.0 * math.pi * (np.arange(grid) + 0.5) / grid
    h = _h_value(beta_c, J, nodes[:, None], nodes[None, :])
    ksq = nodes[:, None] ** 2 + nodes[None, :] ** 2
    c = float(np.min(h / ksq))
    s3 = math.sinh(2.0 * beta_c * J.J3)
    cond = (math.sinh(2.0 * beta_c * J.J1) + 2.0 * s3 > 0.0,
            math.sinh(2.0 * beta_c * J.J2) + 2.0 * s3 > 0.0)
    a_prime = None
    if abs(J.J1 - 1.0) < 1e-15 and abs(J.J2 - 1.0) < 1e-15:
        a_prime = a_prime_closed_form(beta_c, J.J3)
    return SingularityHypotheses(g2, c, cond, a_prime)


def phase_diagram_sweep(J3_values) -> list[tuple[float, float | None]]:
    """(J3, beta_c or None) along the J1 = J2 = 1 line; beta_c decreases in J3."""
    return [(float(j3), beta_c_from_J3(float(j3), with_hypotheses=False).beta_c)
            for j3 in J3_values]


def beta_c_gap_scan(J: Couplings, beta_lo: float = 1e-3, beta_hi: float = 5.0,
                    n_scan: int = 400, gap_tol: float = 1e-8) -> CriticalResult:
    """Exploratory criticality scan for general couplings.

    Locates the beta minimizing the spectral gap min_k (g + h) by a coarse
    scan plus golden-section refinement; reports a critical point only if the
    gap closes to gap_tol * scale.  The paper proves the minimum structure
    only for J1 = J2, so this output carries no singularity claim.
    """
    betas = np.linspace(beta_lo, beta_hi, n_scan)
    gaps = []
    for b in betas:
        g, _, _ = thermo.g_derivatives(float(b), J)
        gaps.append(g + min_h(float(b), J)[0])
    i = int(np.argmin(gaps))
    lo = betas[max(0, i - 1)]
    hi = betas[min(n_scan - 1, i + 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0

    def gap(b):
        g, _, _ = thermo.g_derivatives(b, J)
        return g + min_h(b, J)[0]

    x1 = hi - phi * (hi - lo)
    x2 = lo + phi * (hi - lo)
    f1, f2 = gap(x1), gap(x2)
    while hi - lo > 1e-12:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = gap(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = gap(x2)
    beta_star = 0.5 * (lo + hi)
    gap_star = gap(beta_star)
    scale = max(1.0, math.prod(math.cosh(2 * beta_star * j) for j in J.by_class()))
    _, loc = min_h(beta_star, J)
    if gap_star <= gap_tol * scale:
        return CriticalResult(beta_star, "gap_scan", loc, None)
    return CriticalResult(None, "gap_scan", loc, None)
