"""Command-line front end.

Exit status is 0 on success, 1 when validation, evaluation or a comparison
fails, and 2 on usage errors (bad flags, unreadable files).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import circuit as C
from . import engine as G
from . import oracle
from .errors import OdeAlgebraError
from .stdlib import FAMILIES
from .syntax import HEADER as PROGRAM_HEADER
from .syntax import format_program, parse_program

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _header(text: str) -> str:
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith((";", "#")):
            return line
    return ""


def _load_program(path: str) -> G.Program:
    return parse_program(_read(path))


def _load_circuit(path: str) -> C.Circuit:
    return C.parse_circuit(_read(path))


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def cmd_eval(args) -> int:
    p = _load_program(args.program)
    diags = G.validate(p)
    if diags:
        for d in diags:
            print(d, file=sys.stderr)
        return EXIT_FAIL
    name = args.name or p.entry
    if name not in p:
        raise UsageError(f"no definition named {name!r}")
    if args.trace:
        if not isinstance(p.defs[name].body, G.Schema):
            raise UsageError(f"{name} is not a schema instance; --trace needs one")
        trace = G.run_recurrence(p, name, args.args)
        for pt in trace.points:
            print(f"u={pt.u} at={pt.at} f={pt.value}")
        print(trace.final)
        return EXIT_OK
    print(G.eval_program(p, name, args.args))
    return EXIT_OK


def cmd_check(args) -> int:
    text = _read(args.file)
    if _header(text) == PROGRAM_HEADER:
        diags = G.validate(parse_program(text))
    elif _header(text) == C.HEADER:
        diags = C.validate_nf(C.parse_circuit(text))
    else:
        raise UsageError(f"{args.file}: unknown file format header {_header(text)!r}")
    for d in diags:
        print(d)
    if not diags:
        print("ok")
    return EXIT_FAIL if diags else EXIT_OK


def cmd_gen(args) -> int:
    fam = FAMILIES.get(args.family)
    if fam is None:
        raise UsageError(f"unknown family {args.family!r}; known: {', '.join(sorted(FAMILIES))}")
    if fam.parameter is not None:
        value = getattr(args, fam.parameter, None)
        if value is None:
            raise UsageError(f"family {fam.name} needs --{fam.parameter}")
        p = fam.builder(value)
    else:
        p = fam.builder()
    _write(format_program(p), args.output)
    return EXIT_OK


def _sidecar(path: str | None, lines: list[str]) -> None:
    if path is not None:
        Path(path + ".prov").write_text("\n".join(lines) + "\n")


def cmd_compile(args) -> int:
    from .xlate import algebra_to_circuit, circuit_to_algebra

    if args.direction == "to-circuit":
        if args.width is None:
            raise UsageError("to-circuit needs --width")
        p = _load_program(args.input)
        G.check(p)
        low = algebra_to_circuit(p, args.width, entry=args.entry)
        _write(C.format_circuit(low.circuit), args.output)
        _sidecar(args.output, [f"gate {g}: {src}" for g, src in sorted(low.provenance.items())])
        if args.verify:
            ev = p.evaluator()
            name = args.entry or p.entry
            got = low.evaluate_all()
            want = [ev(name, x) for x in range(1 << (args.width * low.arity))] if low.arity == 1 else None
            if want is None:
                raise UsageError("--verify supports unary programs only")
            agree = sum(a == b for a, b in zip(got, want))
            print(f"agrees on {agree}/{len(want)} inputs", file=sys.stderr)
            return EXIT_OK if agree == len(want) else EXIT_FAIL
        return EXIT_OK
    c = _load_circuit(args.input)
    compiled = circuit_to_algebra(c)
    _write(format_program(compiled.program), args.output)
    _sidecar(args.output, [f"{name}: {what}" for name, what in compiled.provenance.items()])
    if args.verify:
        want = [int(v) for v in C.eval_all(c)]
        got = compiled.evaluate_all()
        agree = sum(a == b for a, b in zip(got, want))
        print(f"agrees on {agree}/{len(want)} inputs", file=sys.stderr)
        return EXIT_OK if agree == len(want) else EXIT_FAIL
    return EXIT_OK


def _evaluatable(spec: str, entry: str | None):
    """A reference like ``popcount-mod:3``, a program file or a circuit file."""
    if not Path(spec).exists():
        try:
            return oracle.reference(spec)
        except (KeyError, ValueError) as exc:
            raise UsageError(f"{spec}: neither a file nor a reference ({exc})") from exc
    text = _read(spec)
    if _header(text) == C.HEADER:
        c = C.parse_circuit(text)
        return lambda x: C.eval_int(c, x)
    p = parse_program(text)
    G.check(p)
    ev = p.evaluator()
    name = entry or p.entry
    return lambda x: ev(name, x)


def cmd_diff(args) -> int:
    fa = _evaluatable(args.lhs, args.entry)
    fb = _evaluatable(args.rhs, args.entry)
    domain = oracle.Domain(args.min, args.max, args.samples, args.seed)
    report = oracle.diff(fa, fb, domain, workers=args.workers, labels=(args.lhs, args.rhs))
    print(report.text())
    if args.record:
        Path(args.record).write_text(report.record() + "\n")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_roundtrip(args) -> int:
    from .xlate import roundtrip_check

    c = _load_circuit(args.circuit)
    try:
        report = roundtrip_check(c, max_width=args.max_width)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="odealg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a program definition")
    e.add_argument("program")
    e.add_argument("name", nargs="?", help="definition to call (default: the entry)")
    e.add_argument("args", nargs="*", type=int)
    e.add_argument("--trace", action="store_true", help="print the schema trace points")
    e.set_defaults(run=cmd_eval)

    c = sub.add_parser("check", help="validate a program or a normal-form circuit")
    c.add_argument("file")
    c.set_defaults(run=cmd_check)

    g = sub.add_parser("gen", help="write a standard-library program")
    g.add_argument("family", help=", ".join(sorted(FAMILIES)))
    g.add_argument("--n", type=int, help="modulus for the counting families")
    g.add_argument("-o", "--output")
    g.set_defaults(run=cmd_gen)

    k = sub.add_parser("compile", help="translate between programs and circuits")
    k.add_argument("direction", choices=["to-circuit", "to-algebra"])
    k.add_argument("input")
    k.add_argument("--width", type=int, help="bits per argument (to-circuit)")
    k.add_argument("--entry", help="definition to lower (default: the entry)")
    k.add_argument("-o", "--output", help="output file; a provenance sidecar OUTPUT.prov is written")
    k.add_argument("--verify", action="store_true", help="compare exhaustively with the source")
    k.set_defaults(run=cmd_compile)

    d = sub.add_parser("diff", help="compare two functions on a range of inputs")
    d.add_argument("lhs", help="program file, circuit file, or reference such as popcount-mod:3")
    d.add_argument("rhs")
    d.add_argument("--min", type=int, default=0)
    d.add_argument("--max", type=int, default=1 << 10, help="exclusive upper bound")
    d.add_argument("--samples", type=int, help="test a seeded uniform sample of this size")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--workers", type=int, default=1)
    d.add_argument("--entry")
    d.add_argument("--record", help="also write the machine-readable record here")
    d.set_defaults(run=cmd_diff)

    r = sub.add_parser("roundtrip", help="circuit -> program -> circuit, checked exhaustively")
    r.add_argument("circuit")
    r.add_argument("--max-width", type=int, default=12)
    r.set_defaults(run=cmd_roundtrip)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"odealg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OdeAlgebraError as exc:
        print(f"odealg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
