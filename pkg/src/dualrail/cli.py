"""Command-line entry point.

Exit codes: 0 success, 2 usage or input validation error, 3 circuit parse or
validation error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

from . import circuits, protocols, reports, verify
from .rails import LeakageError, LogicalAmplitudes

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INTERNAL = 4


class UsageError(Exception):
    pass


def _parse_amplitudes(text: str, what: str) -> LogicalAmplitudes:
    """Read ``a0_re,a0_im,a1_re,a1_im`` into a normalized qubit.

    Inputs must normalize within 1e-6; deviations above 1e-12 are rescaled
    with a warning on stderr.
    """
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError(f"{what}: expected four comma-separated reals, got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"{what}: malformed number in {text!r}")
    q = LogicalAmplitudes(complex(values[0], values[1]), complex(values[2], values[3]))
    norm = math.sqrt(q.norm_squared())
    if norm == 0.0:
        raise UsageError(f"{what}: amplitudes are all zero")
    if abs(norm - 1.0) > 1e-6:
        raise UsageError(f"{what}: amplitudes are not normalized (norm {norm!r})")
    if abs(norm - 1.0) > 1e-12:
        print(f"warning: renormalizing {what} (norm deviation {abs(norm-1.0):.2e})", file=sys.stderr)
    return q.normalized()


def _parse_bloch(text: str, what: str) -> LogicalAmplitudes:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{what}: expected theta,phi, got {text!r}")
    try:
        theta, phi = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"{what}: malformed number in {text!r}")
    return LogicalAmplitudes.from_bloch(theta, phi)


def _qubit_option(args: argparse.Namespace, name: str) -> LogicalAmplitudes:
    bloch = getattr(args, f"{name}_bloch")
    if bloch is not None:
        return _parse_bloch(bloch, name)
    return _parse_amplitudes(getattr(args, name), name)


def _qubit_json(q: LogicalAmplitudes) -> list[list[float]]:
    return [[q.a0.real, q.a0.imag], [q.a1.real, q.a1.imag]]


def _add_qubit_args(parser: argparse.ArgumentParser, name: str, default: str) -> None:
    parser.add_argument(
        f"--{name}",
        default=default,
        metavar="RE,IM,RE,IM",
        help=f"{name} qubit as a0_re,a0_im,a1_re,a1_im (default {default})",
    )
    parser.add_argument(
        f"--{name}-bloch",
        default=None,
        metavar="THETA,PHI",
        help=f"{name} qubit as Bloch angles; overrides --{name}",
    )


_SQRT_HALF = "0.7071067811865476"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualrail",
        description="Exact simulator for heralded dual-rail conditional sign-flip gates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("csign-destructive", help="run the control-consuming gate")
    _add_qubit_args(p, "control", "0,0,1,0")
    _add_qubit_args(p, "target", f"{_SQRT_HALF},0,{_SQRT_HALF},0")
    p.add_argument("--policy", choices=protocols.POLICIES, default="strict")
    p.add_argument("--json", action="store_true", help="emit the schema'd JSON report")
    p.set_defaults(func=cmd_csign_destructive)

    p = sub.add_parser("csign-nondestructive", help="run the encoder-backed gate")
    _add_qubit_args(p, "control", "0,0,1,0")
    _add_qubit_args(p, "target", f"{_SQRT_HALF},0,{_SQRT_HALF},0")
    p.add_argument("--policy", choices=protocols.POLICIES, default="strict")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_csign_nondestructive)

    p = sub.add_parser("encoder", help="copy a qubit's basis states onto n qubits")
    _add_qubit_args(p, "input", f"{_SQRT_HALF},0,{_SQRT_HALF},0")
    p.add_argument("--n", type=int, default=2, help="number of encoded copies (>= 2)")
    p.add_argument("--policy", choices=protocols.POLICIES, default="strict")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_encoder)

    p = sub.add_parser("run", help="execute a .loc circuit file")
    p.add_argument("path", help="circuit file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the randomized invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=50)
    p.set_defaults(func=cmd_verify)

    return parser


def _emit(report: reports.RunReport, as_json: bool) -> None:
    sys.stdout.write(report.to_json() if as_json else report.to_table())


def cmd_csign_destructive(args: argparse.Namespace) -> int:
    control = _qubit_option(args, "control")
    target = _qubit_option(args, "target")
    start = time.perf_counter()
    result = protocols.run_destructive_csign(control, target, args.policy)
    duration = time.perf_counter() - start
    inputs = {
        "control": _qubit_json(control),
        "target": _qubit_json(target),
        "policy": args.policy,
    }
    _emit(reports.from_gate_run(result, "csign-destructive", inputs, duration), args.json)
    return EXIT_OK


def cmd_csign_nondestructive(args: argparse.Namespace) -> int:
    control = _qubit_option(args, "control")
    target = _qubit_option(args, "target")
    start = time.perf_counter()
    result = protocols.run_nondestructive_csign(control, target, args.policy)
    duration = time.perf_counter() - start
    inputs = {
        "control": _qubit_json(control),
        "target": _qubit_json(target),
        "policy": args.policy,
    }
    _emit(reports.from_gate_run(result, "csign-nondestructive", inputs, duration), args.json)
    return EXIT_OK


def cmd_encoder(args: argparse.Namespace) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    qubit = _qubit_option(args, "input")
    start = time.perf_counter()
    result = protocols.run_quantum_encoder(qubit, args.n, args.policy)
    duration = time.perf_counter() - start
    inputs = {"input": _qubit_json(qubit), "n": args.n, "policy": args.policy}
    _emit(reports.from_gate_run(result, "encoder", inputs, duration), args.json)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        ir = circuits.load(args.path)
    except OSError as exc:
        print(f"error: cannot read {args.path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    result = circuits.execute(ir)
    duration = time.perf_counter() - start
    _emit(reports.from_circuit_run(result, "run", {"path": args.path}, duration), args.json)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    report = verify.run_verification(args.seed, args.samples)
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.all_passed else EXIT_INTERNAL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (circuits.ParseError, circuits.CircuitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (LeakageError, protocols.SimulationInvariantError) as exc:
        # LeakageError subclasses ValueError, so this arm must come first.
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
