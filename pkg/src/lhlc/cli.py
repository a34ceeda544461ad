"""Command-line entry point: ``lhlc <subcommand> ...``.

Exit codes: 0 ok, 1 check failed, 2 usage or input error, 3 promise
violated, 4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .circuit import CircuitError, Circuit, pad_and_normalize, parse_circuit
from .history import build_history_state, history_energy
from .operators import (
    ConvergenceError,
    OperatorError,
    locality_audit,
    parse_hamiltonian,
    serialize_hamiltonian,
)
from .oracle import Decision, brute_force_max_acceptance, decide_instance
from .reduction import (
    ReductionError,
    ReductionParams,
    assemble,
    auto_penalties,
    clock_width,
)
from .spectrum import min_eigenvalue, projection_lemma_check, random_lemma_instance
from .verify import (
    EXIT_FAIL,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_PROMISE,
    EXIT_USAGE,
    fmt,
    format_report,
    verify_instance,
)

PENALTY_FLAGS = {"J_in": "in", "J_prop": "prop", "J_clock": "clock", "J1": "prop1", "J2": "prop2"}


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_circuit(path: str) -> Circuit:
    return parse_circuit(_read(path))


def _read_header(text: str) -> dict[str, str]:
    header = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        key, sep, val = line[1:].partition("=")
        if sep:
            header[key.strip()] = val.strip()
    return header


def _explicit_penalties(args) -> dict[str, float]:
    return {g: getattr(args, flag) for flag, g in PENALTY_FLAGS.items() if getattr(args, flag) is not None}


def _check_L(args) -> None:
    if args.locality == "two" and args.L is None:
        raise UsageError("--locality two requires --L")


def _table(rows: list[tuple[str, str]]) -> list[str]:
    width = max(len(k) for k, _ in rows)
    return [f"{k:<{width}}  {v}" for k, v in rows]


# ---------------------------------------------------------------------------
# subcommands

def cmd_compile(args) -> int:
    _check_L(args)
    c = _load_circuit(args.circuit)
    explicit = _explicit_penalties(args)
    if args.auto_penalties and explicit:
        raise UsageError("--auto-penalties cannot be combined with explicit penalties")
    if args.locality == "two":
        c = pad_and_normalize(c, args.L)
    base = ReductionParams(locality=args.locality, L=args.L, epsilon=args.eps)
    auto = args.auto_penalties or not explicit
    params = auto_penalties(c, base).params if auto else base.with_penalties(explicit)
    h, th = assemble(c, params)

    header = {
        "locality": params.locality,
        "clock_encoding": params.clock_encoding,
        "L": params.L if params.L is not None else "-",
        "epsilon": repr(params.epsilon),
        "T": c.T,
        "n_x": c.n_x,
        "m_x": c.m_x,
        "penalties": "auto" if auto else "explicit",
    }
    groups = ("in", "prop", "clock") if params.locality != "two" else ("in", "prop1", "prop2", "clock")
    for g in groups:
        header[f"J_{g}"] = repr(params.coefficient(g))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(serialize_hamiltonian(h, header))

    kmax, hist = locality_audit(h)
    rows = [
        ("output", args.out),
        ("locality", f"{params.locality} ({params.clock_encoding} clock)"),
        ("T", str(c.T)),
        ("system qubits", str(h.system_size)),
        ("terms M", str(len(h))),
        ("terms per label", ", ".join(f"{g}={len(h.select(g))}" for g in h.group_names())),
        ("max locality", str(kmax)),
        ("histogram", ", ".join(f"k={k}: {n}" for k, n in hist.items())),
    ]
    rows += [(f"J_{g}", fmt(params.coefficient(g)) + (" (auto)" if auto else "")) for g in groups]
    rows += [("thresholds", f"a = {fmt(th.a)}   b = {fmt(th.b)}")]
    print("\n".join(_table(rows)))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    h = parse_hamiltonian(_read(args.hamiltonian))
    try:
        r = min_eigenvalue(h, method=args.method)
    except ConvergenceError as exc:
        print(f"lambda_min = n/a\nerror      = {exc}")
        return EXIT_NUMERIC
    print(f"lambda_min = {fmt(r.lambda_min)}")
    print(f"method     = {r.method}")
    print(f"residual   = {fmt(r.residual)}")
    print(f"dim        = {r.dim}")
    print(f"blocks     = {r.blocks}")
    return EXIT_OK


def _history_circuit(c: Circuit, header: dict[str, str], n_sys: int, encoding: str | None):
    """Apply the padding recorded in the header and settle the clock encoding."""
    if header.get("locality") == "two" and header.get("L", "-") != "-":
        c = pad_and_normalize(c, int(header["L"]))
    encoding = encoding or header.get("clock_encoding")
    if encoding is None:
        fits = [e for e in ("binary", "unary") if c.n_qubits + clock_width(c.T, e) == n_sys]
        if len(fits) != 1:
            raise UsageError("cannot infer the clock encoding; pass --encoding")
        encoding = fits[0]
    return c, encoding


def cmd_history(args) -> int:
    c = _load_circuit(args.circuit)
    text = _read(args.against)
    h = parse_hamiltonian(text)
    c, encoding = _history_circuit(c, _read_header(text), h.system_size, args.encoding)
    hs = build_history_state(c, args.witness, encoding)
    total, breakdown = history_energy(hs, h)
    rows = [("label", "energy")] + [(k, fmt(v)) for k, v in breakdown.items()] + [("total", fmt(total))]
    print(f"witness {args.witness}   {encoding} clock   T = {c.T}")
    print("\n".join(_table(rows)))
    return EXIT_OK


def cmd_oracle(args) -> int:
    c = _load_circuit(args.circuit)
    best, arg = brute_force_max_acceptance(c)
    decision = decide_instance(c, args.eps)
    print("\n".join(_table([
        ("max acceptance", fmt(best)),
        ("argmax witness", arg),
        ("epsilon", fmt(args.eps)),
        ("decision", decision.value),
    ])))
    return EXIT_PROMISE if decision is Decision.PROMISE_VIOLATED else EXIT_OK


def cmd_verify(args) -> int:
    _check_L(args)
    c = _load_circuit(args.circuit)
    explicit = _explicit_penalties(args) or None
    r = verify_instance(c, args.locality, args.eps, args.L, penalties=explicit, method=args.method)
    print(format_report(r))
    return r.exit_code


def cmd_check_projection(args) -> int:
    n = int(round(math.log2(args.dim))) if args.dim > 1 else 0
    if args.dim < 2 or 2 ** n != args.dim:
        raise UsageError("--dim must be a power of two >= 2")
    rng = np.random.default_rng(args.seed)
    head = f"{'trial':>5}  {'lambda(H1+H2)':>24}  {'lambda(H1|S2)':>24}  {'lower bound':>24}  upper  lower"
    print(head)
    passed = 0
    for i in range(args.trials):
        h1, h2 = random_lemma_instance(rng, n, h1_norm=args.h1_norm, penalty=args.penalty)
        rep = projection_lemma_check(h1, h2)
        lower = {None: "n/a", True: "PASS", False: "FAIL"}[rep.lower_ok]
        print(f"{i:>5}  {fmt(rep.lambda_full):>24}  {fmt(rep.lambda_restricted):>24}  "
              f"{fmt(rep.lower_bound):>24}  {'PASS' if rep.upper_ok else 'FAIL':<5}  {lower}")
        passed += rep.passed
    print(f"{passed}/{args.trials} pass")
    return EXIT_OK if passed == args.trials else EXIT_FAIL


# ---------------------------------------------------------------------------

def _add_reduction_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("circuit")
    p.add_argument("--locality", choices=("log", "five", "two"), default="log")
    p.add_argument("--L", type=int, help="CPHASE spacing, required for --locality two")
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--J-in", dest="J_in", type=float)
    p.add_argument("--J-prop", dest="J_prop", type=float)
    p.add_argument("--J-clock", dest="J_clock", type=float)
    p.add_argument("--J1", dest="J1", type=float)
    p.add_argument("--J2", dest="J2", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lhlc", description="Circuit-to-Hamiltonian compiler and spectral verifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a circuit into a Hamiltonian file")
    _add_reduction_args(p)
    p.add_argument("--auto-penalties", action="store_true",
                   help="choose penalties by the projection-lemma rule (default when none are given)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("spectrum", help="smallest eigenvalue of a Hamiltonian file")
    p.add_argument("hamiltonian")
    p.add_argument("--method", choices=("auto", "dense", "iterative"), default="auto")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("history", help="energy of a history state against a Hamiltonian file")
    p.add_argument("circuit")
    p.add_argument("--witness", required=True)
    p.add_argument("--against", required=True, metavar="HAMILTONIAN")
    p.add_argument("--encoding", choices=("binary", "unary"))
    p.set_defaults(func=cmd_history)

    p = sub.add_parser("oracle", help="brute-force maximum acceptance and decision")
    p.add_argument("circuit")
    p.add_argument("--eps", type=float, default=0.01)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="oracle decision vs. spectrum, end to end")
    _add_reduction_args(p)
    p.add_argument("--method", choices=("auto", "dense", "iterative"), default="auto")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check-projection", help="projection-lemma inequalities on random instances")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--penalty", type=float, default=10.0)
    p.add_argument("--h1-norm", dest="h1_norm", type=float, default=0.25)
    p.set_defaults(func=cmd_check_projection)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, CircuitError, ReductionError, OperatorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
