"""Command-line interface: sweeps, critical points, quantum chain, verification.

Subcommands
-----------
free-energy   beta sweep of f, f', f'' on the plane (optionally cylinder columns)
cylinder      M sweep comparing the momentum formula with the transfer matrix
critical      critical line beta_c(J3) with singularity diagnostics
quantum       transverse-field chain free energy and ground-state columns
verify        run the full identity suite; nonzero exit on any failure

Ranges are start:stop:steps with inclusive endpoints (steps >= 1); a bare
number is a single value.  CSV output uses 17 significant digits and carries
one timestamped comment line unless --reproducible is given.  Exit codes:
0 success, 1 verification failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, critical, oracle, quantum, thermo, verify
from .lattice import Couplings
from .quadrature import QuadratureError, QuadratureSpec
from .quantum import QuantumParams

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def parse_range(text: str, integer: bool = False):
    """start:stop:steps inclusive, or a single number."""
    parts = text.split(":")
    if len(parts) == 1:
        val = float(parts[0])
        return [int(val) if integer else val]
    if len(parts) != 3:
        raise ConfigError(f"range must be start:stop:steps, got {text!r}")
    start, stop = float(parts[0]), float(parts[1])
    steps = int(parts[2])
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    if steps > 1 and not start < stop:
        raise ConfigError("range needs start < stop")
    vals = np.linspace(start, stop, steps)
    if integer:
        out = [int(round(v)) for v in vals]
        return sorted(set(out))
    return [float(v) for v in vals]


def parse_couplings(text: str) -> Couplings:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError("--J takes three comma-separated values, e.g. 1,1,1")
    return Couplings(*(float(p) for p in parts))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(x)


def emit(rows, columns, args, command, extra_meta=None) -> None:
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        if args.format == "json":
            meta = {"command": command, "version": __version__,
                    "config": {k: v for k, v in vars(args).items()
                               if k not in ("func", "output")}}
            if not args.reproducible:
                meta["timestamp"] = datetime.now(timezone.utc).isoformat()
            if extra_meta:
                meta.update(extra_meta)
            json.dump({"meta": meta, "rows": rows}, out, indent=1, default=str)
            out.write("\n")
        else:
            if not args.reproducible:
                out.write(f"# kacward {command} {datetime.now(timezone.utc).isoformat()}\n")
            out.write(",".join(columns) + "\n")
            for row in rows:
                out.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")
    finally:
        if args.output:
            out.close()


def _emit_with_failure(rows, columns, args, command, exc) -> int:
    """Flush whatever was computed, append an error record, exit 3."""
    rows.append({columns[0]: None, "error": str(exc)})
    emit(rows, columns + ["error"], args, command, extra_meta={"error": str(exc)})
    print(f"numerical failure: {exc}", file=sys.stderr)
    return EXIT_NUMERICAL


def cmd_free_energy(args) -> int:
    J = parse_couplings(args.J)
    betas = parse_range(args.beta)
    quad = QuadratureSpec(tol=args.tol)
    columns = ["beta", "f", "f1", "f2", "quadrature_error"]
    if args.cylinder_M is not None:
        columns += ["f_cylinder", "f_cylinder_tm"]
    rows = []
    try:
        for beta in betas:
            rows.extend(thermo.free_energy_sweep(J, [beta], quad, derivatives=True,
                                                 cylinder_M=args.cylinder_M))
    except QuadratureError as exc:
        return _emit_with_failure(rows, columns, args, "free-energy", exc)
    emit(rows, columns, args, "free-energy")
    return EXIT_OK


def cmd_cylinder(args) -> int:
    J = parse_couplings(args.J)
    Ms = parse_range(args.M, integer=True)
    quad = QuadratureSpec(tol=args.tol)
    columns = ["M", "f_cylinder", "f_cylinder_tm", "abs_diff"]
    rows = []
    try:
        for M in Ms:
            if M < 2:
                raise ConfigError("cylinder M must be >= 2")
            f_kw = thermo.cylinder_free_energy(M, J, quad, beta=args.beta).f
            f_tm = None
            if M <= oracle.MAX_TRANSFER_M:
                f_tm = oracle.cylinder_free_energy_tm(M, J.scaled(args.beta))
            rows.append({"M": M, "f_cylinder": f_kw, "f_cylinder_tm": f_tm,
                         "abs_diff": None if f_tm is None else abs(f_kw - f_tm)})
    except QuadratureError as exc:
        return _emit_with_failure(rows, columns, args, "cylinder", exc)
    emit(rows, columns, args, "cylinder")
    return EXIT_OK


def cmd_critical(args) -> int:
    rows = []
    for j3 in parse_range(args.J3):
        res = critical.beta_c_from_J3(j3)
        row = {"J3": j3, "beta_c": res.beta_c, "g2": None, "c": None}
        if res.hypothesis_checks is not None:
            row["g2"] = res.hypothesis_checks.g2
            row["c"] = res.hypothesis_checks.c_lower_bound
        rows.append(row)
    emit(rows, ["J3", "beta_c", "g2", "c"], args, "critical")
    return EXIT_OK


def cmd_quantum(args) -> int:
    betas = parse_range(args.beta)
    hs = parse_range(args.h)
    quad = QuadratureSpec(tol=args.tol)
    columns = ["beta", "h", "f_qu", "e0", "e0_second_derivative"]
    if args.trotter_n is not None:
        columns.append("f_trotter")
    rows = []
    try:
        for beta in betas:
            for h in hs:
                p = QuantumParams(beta, h)
                row = {"beta": beta, "h": h,
                       "f_qu": quantum.quantum_free_energy(p, quad),
                       "e0": quantum.ground_state_energy(h),
                       "e0_second_derivative": None}
                if abs(abs(h) - 0.5) > quantum.GSE_EXCLUSION:
                    row["e0_second_derivative"] = quantum.gse_second_derivative(h)
                if args.trotter_n is not None and h > 0 and args.trotter_n > 0.5 * beta * h:
                    row["f_trotter"] = quantum.trotter_free_energy(p, args.trotter_n, quad)
                rows.append(row)
    except QuadratureError as exc:
        return _emit_with_failure(rows, columns, args, "quantum", exc)
    emit(rows, columns, args, "quantum")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_all(args.seed)
    rows = [{"check": r.name, "passed": r.passed, "seconds": round(r.seconds, 2),
             "detail": r.detail} for r in results]
    if args.format == "json" or args.output:
        emit(rows, ["check", "passed", "seconds", "detail"], args, "verify",
             extra_meta={"seed": args.seed})
    if args.format != "json" and not args.output:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"[{status}] {r.name} ({r.seconds:.1f}s): {r.detail}")
        total = sum(r.seconds for r in results)
        n_fail = sum(not r.passed for r in results)
        print(f"{len(results) - n_fail}/{len(results)} checks passed "
              f"in {total:.1f}s (seed {args.seed})")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kacward",
        description="Exact triangular-lattice Ising and transverse-field chain "
                    "thermodynamics via Kac-Ward determinants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=1e-10,
                       help="quadrature tolerance, in (0, 1e-2]")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default=None, help="write to file instead of stdout")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized verification draws")
        p.add_argument("--reproducible", action="store_true",
                       help="suppress the timestamped header line")

    p = sub.add_parser("free-energy", help="beta sweep of f, f', f''")
    p.add_argument("--J", required=True, help="couplings J1,J2,J3")
    p.add_argument("--beta", required=True, help="beta range start:stop:steps")
    p.add_argument("--cylinder-M", dest="cylinder_M", type=int, default=None,
                   help="add cylinder and transfer-matrix columns at this M")
    common(p)
    p.set_defaults(func=cmd_free_energy)

    p = sub.add_parser("cylinder", help="cylinder formula vs transfer matrix over M")
    p.add_argument("--J", required=True)
    p.add_argument("--M", required=True, help="M range start:stop:steps (integers)")
    p.add_argument("--beta", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_cylinder)

    p = sub.add_parser("critical", help="critical line beta_c(J3) for J1=J2=1")
    p.add_argument("--J3", required=True, help="J3 range start:stop:steps")
    common(p)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("quantum", help="transverse-field chain free energy")
    p.add_argument("--beta", required=True, help="beta value or range")
    p.add_argument("--h", required=True, help="field value or range")
    p.add_argument("--trotter-n", dest="trotter_n", type=int, default=None,
                   help="add a Trotter-route column with n slices")
    common(p)
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("verify", help="run the identity suite")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
