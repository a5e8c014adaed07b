"""Command-line interface: ``pseudoae {synth,run,verify,sweep,demo-line}``.

Exit codes: 0 success, 1 verification or reconstruction failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

from . import __version__
from .netcore import (
    InvalidSpec,
    Network,
    NetworkSpec,
    ScaledInteger,
    forward,
    load_network,
    network_to_dict,
    render_value,
    synthesize,
    synthesize_line_demo,
)
from .softfloat import FloatFormat, Rounding, to_fraction
from .verify import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    Domain,
    capacity_sweep,
    sweep_csv,
    verify_exhaustive,
    verify_sampled,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

LAYER_TITLES = (
    "L1 inputs",
    "L2 code (inputs packed by radix powers)",
    "L3 add bias r^(P-1+(k-1)m): low blocks truncated",
    "L4 subtract bias: low blocks zeroed",
    "L5 subtract neuron k+1: block k isolated",
    "L6 shift right by r^((k-1)m)",
)


class ConfigError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def parse_range(text: str) -> list[int]:
    """``"1..4"`` (inclusive), ``"9,23"`` or ``"5"``."""
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
            values = list(range(lo, hi + 1))
        else:
            values = [int(t) for t in text.split(",")]
    except ValueError:
        raise ConfigError(f"malformed range {text!r}") from None
    if not values:
        raise ConfigError(f"empty range {text!r}")
    return values


def _format_from_args(args: argparse.Namespace) -> FloatFormat:
    radix = args.radix
    if args.precision is not None:
        precision = args.precision
    elif args.z is not None:
        if radix != 2:
            raise ConfigError("--z is only valid for radix 2; use --precision")
        precision = args.z + 1
    elif radix == 2:
        precision = 24
    else:
        raise ConfigError("--precision is required when radix is not 2")
    try:
        return FloatFormat(radix, precision, Rounding(args.rounding))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _spec_from_args(args: argparse.Namespace) -> NetworkSpec:
    if args.n is None or args.m is None:
        raise ConfigError("--n and --m are required")
    try:
        return NetworkSpec(args.n, args.m, _format_from_args(args))
    except InvalidSpec as exc:
        raise ConfigError(str(exc)) from None


def _emit(out: TextIO, doc: dict[str, Any]) -> None:
    out.write(json.dumps(doc, indent=2) + "\n")


def _spec_line(fmt: FloatFormat, spec: NetworkSpec | None) -> str:
    head = f"n={spec.n} m={spec.m} " if spec else ""
    z = f" (z={fmt.z})" if fmt.z is not None else ""
    return f"{head}radix={fmt.radix} P={fmt.precision_digits}{z} rounding={fmt.rounding.value}"


def _capacity_text(spec: NetworkSpec) -> str:
    if spec.capacity_safe:
        return f"capacity-safe: yes ({spec.packed_digits} ≤ {spec.precision})"
    return f"capacity-safe: no ({spec.packed_digits} > {spec.precision})"


def cmd_synth(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    spec = _spec_from_args(args)
    net = synthesize(spec)
    doc = network_to_dict(net)
    shapes = [f"{layer.in_size}->{layer.out_size}" for layer in net.layers]
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    summary = {
        "layers": shapes,
        "capacity_safe": spec.capacity_safe,
        "packed_digits": spec.packed_digits,
        "precision": spec.precision,
        "warnings": spec.warnings(),
    }
    if args.format == "structured":
        _emit(out, {"command": "synth", "out": args.out, "summary": summary,
                    "network": None if args.out else doc})
        return EXIT_OK
    report = err if not args.out else out
    if not args.out:
        out.write(json.dumps(doc, indent=1) + "\n")
    report.write(f"network: {_spec_line(spec.format, spec)}\n")
    report.write(f"weight layers: {len(shapes)} ({', '.join(shapes)})\n")
    report.write(_capacity_text(spec) + "\n")
    for warning in spec.warnings():
        report.write(f"warning: {warning}\n")
    if args.out:
        report.write(f"wrote {args.out}\n")
    return EXIT_OK


def _trace_lines(net: Network, trace_values, fmt: FloatFormat) -> list[str]:
    rendered = [[render_value(v, fmt, net.group) for v in layer] for layer in trace_values]
    width = max(len(s) for layer in rendered for s in layer)
    titles = LAYER_TITLES if net.spec is not None and len(rendered) == 6 else None
    lines = []
    for i, layer in enumerate(rendered):
        lines.append(titles[i] if titles else f"L{i + 1}")
        for k, text in enumerate(layer):
            label = f"k={k + 1}" if len(layer) > 1 else "   "
            lines.append(f"  {label:<5} {text.rjust(width)}")
    return lines


def _number(v) -> int | str:
    f = to_fraction(v)
    return f.numerator if f.denominator == 1 else str(f)


def cmd_run(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    if args.net:
        try:
            net = load_network(args.net)
        except (OSError, InvalidSpec, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load network: {exc}") from None
    else:
        net = synthesize(_spec_from_args(args))
    if args.inputs is None:
        raise ConfigError("--inputs is required")
    inputs = _int_list(args.inputs)
    if len(inputs) != net.in_size:
        raise ConfigError(f"expected {net.in_size} inputs, got {len(inputs)}")
    if net.spec is not None and any(x < 0 for x in inputs):
        raise ConfigError("inputs must be nonnegative")
    outputs, trace = forward(net, inputs)
    values = [_number(v) for v in outputs]
    mismatched = [k for k, (x, y) in enumerate(zip(inputs, values)) if x != y]
    if args.format == "structured":
        _emit(out, {
            "command": "run",
            "spec": net.spec.to_dict() if net.spec else None,
            "inputs": inputs,
            "outputs": values,
            "match": not mismatched,
            "trace": trace.to_dict() if args.trace else None,
        })
    else:
        out.write(_spec_line(net.format, net.spec) + "\n")
        if args.trace:
            out.write("\n".join(_trace_lines(net, trace.values, net.format)) + "\n")
        out.write(f"outputs: {','.join(map(str, values))}\n")
        if mismatched:
            detail = ", ".join(f"k={k + 1} expected {inputs[k]} got {values[k]}" for k in mismatched)
            out.write(f"reconstruction: MISMATCH ({detail})\n")
        else:
            out.write("reconstruction: exact\n")
    return EXIT_FAIL if mismatched else EXIT_OK


def cmd_verify(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    spec = _spec_from_args(args)
    domain = Domain(args.domain)
    if args.mode == "exhaustive":
        try:
            report = verify_exhaustive(spec, domain, args.budget)
        except BudgetExceeded as exc:
            raise ConfigError(f"{exc}; use --mode sampled or raise --budget") from None
    else:
        if args.count < 1:
            raise ConfigError("--count must be >= 1")
        report = verify_sampled(spec, args.count, args.seed, domain)
    if args.format == "structured":
        _emit(out, {"command": "verify", "report": report.to_dict()})
    else:
        out.write(report.summary() + "\n")
    return EXIT_FAIL if report.failures else EXIT_OK


def cmd_sweep(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    n_values = parse_range(args.n)
    m_values = parse_range(args.m)
    if args.precision is not None:
        precisions = parse_range(args.precision)
    else:
        if args.radix != 2:
            raise ConfigError("--precision is required when radix is not 2")
        precisions = [z + 1 for z in parse_range(args.z or "23")]
    roundings = args.rounding.split(",")
    try:
        roundings = [Rounding(r) for r in roundings]
        rows = capacity_sweep(
            n_values, m_values, precisions, roundings, args.radix,
            budget=args.budget, sample_count=args.count, seed=args.seed,
        )
    except (ValueError, InvalidSpec) as exc:
        raise ConfigError(str(exc)) from None
    if args.format == "structured":
        doc = {
            "command": "sweep",
            "rows": [
                {
                    "n": r.n, "m": r.m, "radix": r.radix, "precision": r.precision,
                    "rounding": r.rounding.value, "capacity_safe": r.capacity_safe,
                    "method": r.method, "cases": r.cases,
                    "pass_fraction": str(r.pass_fraction),
                }
                for r in rows
            ],
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = sweep_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_demo_line(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    point = _int_list(args.point)
    if len(point) != 2:
        raise ConfigError("--point takes two integers x,y")
    if args.z is None and args.precision is None:
        fmt = FloatFormat.binary32()
    else:
        fmt = _format_from_args(args)
    try:
        net = synthesize_line_demo(ScaledInteger(args.a), ScaledInteger(args.b), fmt)
    except InvalidSpec as exc:
        raise ConfigError(str(exc)) from None
    outputs, _ = forward(net, point)
    values = [_number(v) for v in outputs]
    match = values == point
    if args.format == "structured":
        _emit(out, {"command": "demo-line", "a": args.a, "b": args.b,
                    "input": point, "output": values, "match": match})
    else:
        line = f"({point[0]},{point[1]}) → ({values[0]},{values[1]})"
        if not match:
            line += f"  mismatch: point is not on y = {args.a}x + {args.b}"
        out.write(line + "\n")
    return EXIT_OK if match else EXIT_FAIL


def _add_format_args(p: argparse.ArgumentParser, radix_default: int | None = 2) -> None:
    p.add_argument("--radix", type=int, default=radix_default)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--z", type=int, help="stored mantissa bits (radix 2 only); P = z+1")
    group.add_argument("--precision", type=int, help="significant radix digits P")
    p.add_argument("--rounding", choices=[r.value for r in Rounding], default="trunc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudoae",
        description="Synthesize, run and verify the digit-packing pseudo-autoencoder.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "structured"], default="text")

    spec = argparse.ArgumentParser(add_help=False)
    spec.add_argument("--n", type=int)
    spec.add_argument("--m", type=int)
    _add_format_args(spec)

    p = sub.add_parser("synth", parents=[common, spec], help="write a network document")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", parents=[common, spec], help="run one tuple through the network")
    p.add_argument("--net", help="network document from `synth`")
    p.add_argument("--inputs", help="comma-separated integers")
    p.add_argument("--trace", action="store_true", help="print every layer")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", parents=[common, spec], help="round-trip verification")
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--domain", choices=[d.value for d in Domain], default="leading-zero")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="capacity sweep as CSV")
    p.add_argument("--n", required=True, help="range, e.g. 1..4")
    p.add_argument("--m", required=True, help="range, e.g. 2..6")
    p.add_argument("--radix", type=int, default=2)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--z", help="list or range of mantissa widths (radix 2)")
    group.add_argument("--precision", help="list or range of P values")
    p.add_argument("--rounding", default="trunc", help="comma list of trunc,rne")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--count", type=int, default=10_000, help="samples for cells over budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo-line", parents=[common], help="line autoencoder y = a*x + b")
    p.add_argument("--a", type=int, default=2)
    p.add_argument("--b", type=int, default=5)
    p.add_argument("--point", required=True, help="x,y")
    _add_format_args(p)
    p.set_defaults(func=cmd_demo_line)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args, out, err)
    except ConfigError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
