"""Self-contained identity suite: every formula against an independent oracle.

Each check returns a CheckResult; run_all executes the registry in order with
a seeded generator so reports are replayable.  The suite validates the
implementation, not the literature: where a printed statement fails on part
of its domain (the nonnegative-root form of the square-root identities, and
the shifted-grid cylinder formula at odd M for strongly frustrated
couplings), the corresponding check verifies the true content and counts the
certified violations explicitly in its detail string.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import critical, oracle, quantum, thermo
from .determinants import kacward_partition_pair, product_formula_log_det
from .determinants import assemble_K, assemble_K_tilde, assemble_W, assemble_W_tilde, det_one_minus
from .lattice import Couplings, TorusSpec
from .projection import faithful_projection
from .quadrature import QuadratureSpec
from .quantum import QuantumParams


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _timed(name, fn):
    t0 = time.time()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashed check is a failed check, with the reason
        return CheckResult(name, False, f"exception: {exc!r}", time.time() - t0)
    return CheckResult(name, passed, detail, time.time() - t0)


def kacward_draws(seed: int, n_uniform: int = 16, n_all_negative: int = 4):
    """Seeded coupling triples in [-1.5, 1.5]^3; the tail is forced all-negative."""
    rng = np.random.default_rng(seed)
    draws = [Couplings(*rng.uniform(-1.5, 1.5, 3)) for _ in range(n_uniform)]
    draws += [Couplings(*(-np.abs(rng.uniform(0.1, 1.5, 3)))) for _ in range(n_all_negative)]
    return draws


def check_kacward_vs_oracle(seed: int):
    """det(1-K_i W) = (signed sum)^2 on every draw; nonneg root = signed sum and
    the two-projection sum rule on every branch-positive draw."""
    spec = TorusSpec(3, 3)
    p1 = faithful_projection(spec, "G1")
    p2 = faithful_projection(spec, "G2")
    worst_sq = worst_lit = worst_geo = 0.0
    n_pos = n_flip = 0
    for J in kacward_draws(seed):
        zt, s1, s2, oh = oracle.even_subgraph_sums(spec, J, p1, p2)
        q1, q2 = kacward_partition_pair(spec, J)
        for q, s in ((q1, s1), (q2, s2)):
            worst_sq = max(worst_sq, abs(q * q - s * s) / (s * s))
        if s1 > 0 and s2 > 0:
            n_pos += 1
            worst_lit = max(worst_lit, abs(q1 - s1) / s1, abs(q2 - s2) / s2)
            rhs = 2.0 * (zt - oh)
            worst_geo = max(worst_geo, abs((q1 + q2) - rhs) / abs(rhs))
        else:
            n_flip += 1
    passed = worst_sq < 1e-10 and worst_lit < 1e-10 and worst_geo < 1e-10 and n_pos >= 5
    detail = (f"det=signed^2 worst rel {worst_sq:.1e} on 20 draws; literal root identity "
              f"worst {worst_lit:.1e} and handle-sum rule worst {worst_geo:.1e} on "
              f"{n_pos} branch-positive draws ({n_flip} draws flip a branch, see notes)")
    return passed, detail


def check_lemma_translinv_and_dets(seed: int):
    """Direct LU det = modified-matrix det = Fourier product on small tori."""
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for L in (2, 3, 4):
        for M in (2, 3, 4):
            spec = TorusSpec(L, M)
            for _ in range(3):
                J = Couplings(*rng.uniform(-1.5, 1.5, 3))
                w = assemble_W(spec, J)
                Kt = assemble_K_tilde(spec)
                for variant in ("G1", "G2"):
                    d_direct = det_one_minus(assemble_K(spec, variant) * w[None, :])
                    wt = assemble_W_tilde(spec, J, variant)
                    d_mod = det_one_minus(Kt * wt[None, :])
                    log_prod = product_formula_log_det(spec, J, variant)
                    scale = max(1.0, abs(d_direct.value))
                    worst = max(worst, abs(d_direct.value - d_mod.value) / scale)
                    if d_direct.value.real > 0:
                        worst = max(worst, abs(math.log(d_direct.value.real) - log_prod)
                                    / max(1.0, abs(log_prod)))
    return worst < 1e-9, f"worst relative deviation {worst:.1e} over 2..4 squared sweep"


def check_cylinder_vs_transfer_matrix(seed: int):
    """Cylinder formula vs -(1/M) log lambda_max, domain aware.

    Agreement at 1e-8 wherever the printed theorem holds; every violation must
    be a certified instance of the known odd-M frustrated-holonomy defect
    (transfer matrix re-verified against brute force in that case).
    """
    rng = np.random.default_rng(seed + 2)
    quad = QuadratureSpec()
    n_ok = 0
    violations = []
    worst_ok = 0.0
    for _ in range(10):
        J = Couplings(*rng.uniform(-1.5, 1.5, 3))
        for M in range(2, 9):
            f_kw = thermo.cylinder_free_energy(M, J, quad).f
            f_tm = oracle.cylinder_free_energy_tm(M, J)
            gap = abs(f_kw - f_tm)
            if gap <= 1e-8:
                n_ok += 1
                worst_ok = max(worst_ok, gap)
                continue
            # Certify the defect: odd M, and the transfer matrix agrees with
            # brute force on the largest torus that fits the 24-site budget.
            if M % 2 == 0 or gap <= 1e-6:
                return False, (f"unexplained mismatch {gap:.2e} at M={M}, "
                               f"J={J.by_class()}")
            L0 = max(3, 18 // M)
            zb = oracle.brute_force_Z(TorusSpec(L0, M), J)
            zt = oracle.torus_Z_tm(L0, M, J)
            if abs(zb - zt) / zb > 1e-10:
                return False, f"transfer matrix disagrees with brute force at M={M}"
            violations.append((M, gap))
    detail = (f"{n_ok} cases agree at 1e-8 (worst {worst_ok:.1e}); "
              f"{len(violations)} certified odd-M frustrated-holonomy counterexamples "
              f"to the printed theorem (see notes)")
    return True, detail


def check_trotter_convergence():
    p = QuantumParams(2.0, 0.5)
    f_exact = quantum.quantum_free_energy(p)
    errs = [abs(quantum.trotter_free_energy(p, n) - f_exact) for n in (16, 32, 64)]
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    ok = 1.6 <= r1 <= 2.4 and 1.6 <= r2 <= 2.4
    return ok, f"error ratios {r1:.3f}, {r2:.3f} (expected about 2 for O(1/n))"


def check_sum_identity(seed: int):
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for _ in range(20):
        M = int(rng.integers(2, 12))
        J2 = float(rng.uniform(0.05, 1.5))
        lhs, rhs = quantum.sum_identity_check(M, J2)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst < 1e-12, f"worst relative mismatch {worst:.1e} over 20 (M, J2) pairs"


def check_critical_points(seed: int):
    r1 = critical.beta_c_from_J3(1.0, with_hypotheses=False)
    r0 = critical.beta_c_from_J3(0.0, with_hypotheses=False)
    e1 = abs(r1.beta_c - 0.25 * math.log(3.0))
    e0 = abs(r0.beta_c - math.atanh(math.sqrt(2.0) - 1.0))
    absent = critical.beta_c_from_J3(-1.0).beta_c is None
    rng = np.random.default_rng(seed + 4)
    worst = 0.0
    for _ in range(1000):
        b = float(rng.uniform(0.05, 2.0))
        j3 = float(rng.uniform(-2.0, 2.0))
        g, _, _ = thermo.g_derivatives(b, Couplings(1.0, 1.0, j3))
        pref = math.cosh(b) ** 4 * math.cosh(b * j3) ** 2
        rhs = pref * critical.a_of_beta(b, j3) ** 2
        # g vanishes on the critical line, so "relative" uses the magnitude of
        # its terms (both sides are evaluated from the same rounded inputs).
        scale = (math.cosh(2 * b) ** 2 * math.cosh(2 * b * j3)
                 + math.sinh(2 * b) ** 2 * abs(math.sinh(2 * b * j3))
                 + 2 * math.sinh(2 * b) + abs(math.sinh(2 * b * j3)))
        worst = max(worst, abs(g - rhs) / scale)
    ok = e1 < 1e-10 and e0 < 1e-10 and absent and worst < 1e-12
    return ok, (f"beta_c(1) err {e1:.1e}, beta_c(0) err {e0:.1e}, absent at J3=-1: "
                f"{absent}; g = cosh^4(b) cosh^2(bJ3) a^2 worst rel {worst:.1e}")


def check_positivity(seed: int):
    rng = np.random.default_rng(seed + 5)
    worst = 0.0
    for _ in range(10_000):
        b = float(rng.uniform(0.01, 3.0))
        J = Couplings(*rng.uniform(-1.5, 1.5, 3))
        g, _, _ = thermo.g_derivatives(b, J)
        h = float(critical._h_value(b, J, rng.uniform(-math.pi, math.pi),
                                    rng.uniform(-math.pi, math.pi)))
        scale = max(1.0, math.prod(math.cosh(2 * b * j) for j in J.by_class()))
        worst = min(worst, (g + h) / scale)
    return worst >= -1e-12, f"min (g+h)/scale = {worst:.2e} over 1e4 samples"


def check_quantum_formula():
    worst = 0.0
    for beta in (0.5, 2.0, 10.0):
        f = quantum.quantum_free_energy(QuantumParams(beta, 0.0))
        worst = max(worst, abs(f + math.log(2.0 * math.cosh(beta / 4.0)) / beta))
    p = QuantumParams(2.0, 0.3)
    gap = abs(quantum.quantum_free_energy(p) - quantum.exact_diag_free_energy(14, p))
    ok = worst < 1e-10 and gap < 1e-4
    return ok, f"h=0 closed form worst {worst:.1e}; |formula - ED(L=14)| = {gap:.1e}"


def check_cylinder_plane_convergence(seed: int):
    rng = np.random.default_rng(seed + 6)
    quad = QuadratureSpec(tol=1e-9)
    ok = True
    worst_margin = math.inf
    for _ in range(5):
        J = Couplings(*rng.uniform(-1.5, 1.5, 3))
        f_plane = thermo.plane_free_energy(J, quad).f
        jmax = max(abs(j) for j in J.by_class())
        for M in (8, 16, 32, 64):
            bound = 4.0 * jmax / M + 2e-8
            gap = abs(f_plane - thermo.cylinder_free_energy(M, J, quad).f)
            worst_margin = min(worst_margin, bound - gap)
            ok = ok and gap <= bound
    return ok, f"smallest bound margin {worst_margin:.2e} over 5 draws, M in 8..64"


def check_log_singularity():
    J = Couplings(1.0, 1.0, 1.0)
    beta_c = 0.25 * math.log(3.0)
    fit = thermo.log_singularity_fit(J, beta_c, (0.02, 0.01, 0.005, 0.0025))
    ok = fit.consistent_sign and abs(fit.slope) > 0.01 and fit.residual < 0.05
    return ok, (f"slope {fit.slope:.3f} (below {fit.slope_below:.3f} / above "
                f"{fit.slope_above:.3f}), residual {fit.residual:.2%}")


def check_ground_state():
    e0_0 = quantum.ground_state_energy(0.0)
    e0_h = quantum.ground_state_energy(0.5)
    ds = (1e-2, 1e-3, 1e-4)
    slopes = []
    for side in (1.0, -1.0):
        vals = [quantum.gse_second_derivative(0.5 + side * d) for d in ds]
        slopes.append(float(np.polyfit(np.log(ds), vals, 1)[0]))
    target = 1.0 / math.pi
    ok = (abs(e0_0 + 0.25) < 1e-9 and abs(e0_h + 1.0 / math.pi) < 1e-9
          and all(abs(s - target) / target < 0.15 for s in slopes))
    return ok, (f"e0(0) err {abs(e0_0 + 0.25):.1e}, e0(1/2) err "
                f"{abs(e0_h + 1.0 / math.pi):.1e}; log slopes {slopes[0]:.3f}/"
                f"{slopes[1]:.3f} vs 1/pi = {target:.3f} (printed 1/2pi fails, see notes)")


def run_all(seed: int = 0) -> list[CheckResult]:
    checks = [
        ("kacward_identity_vs_oracle", lambda: check_kacward_vs_oracle(seed)),
        ("lemma_translation_invariance_and_product", lambda: check_lemma_translinv_and_dets(seed)),
        ("cylinder_formula_vs_transfer_matrix", lambda: check_cylinder_vs_transfer_matrix(seed)),
        ("trotter_convergence", check_trotter_convergence),
        ("momentum_sum_identity", lambda: check_sum_identity(seed)),
        ("critical_points_cdcl", lambda: check_critical_points(seed)),
        ("integrand_positivity", lambda: check_positivity(seed)),
        ("quantum_free_energy_vs_ed", check_quantum_formula),
        ("cylinder_to_plane_convergence", lambda: check_cylinder_plane_convergence(seed)),
        ("specific_heat_log_singularity", check_log_singularity),
        ("ground_state_energy_and_kink", check_ground_state),
    ]
    return [_timed(name, fn) for name, fn in checks]
