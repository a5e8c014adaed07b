"""Synthesis and execution of the hand-built packing autoencoder.

The network has six neuron layers (five weight layers)::

    L1 (n)  inputs
    L2 (1)  code: x_k * r**((k-1)m) summed into one value
    L3 (n)  code + r**(P-1+(k-1)m); finite precision drops the low blocks
    L4 (n)  minus the same bias, leaving the code with low blocks zeroed
    L5 (n)  L4[k] - L4[k+1] isolates block k (last row passes through)
    L6 (n)  times r**-((k-1)m) moves block k back to the units position

Every layer is a dense matrix with identity activation. Weights and biases
are stored as exact :class:`ScaledInteger` values and converted to floats of
the run's format at execution time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from .softfloat import (
    FloatFormat,
    FloatValue,
    NotAnInteger,
    Rounding,
    add,
    from_integer,
    make,
    mul,
    neg,
    render_digits,
    to_fraction,
)

__all__ = [
    "DOCUMENT_KIND",
    "InvalidSpec",
    "Layer",
    "Network",
    "NetworkSpec",
    "ScaledInteger",
    "ShapeMismatch",
    "TraceReport",
    "decode",
    "dump_network",
    "encode",
    "forward",
    "load_network",
    "network_from_dict",
    "network_to_dict",
    "run_values",
    "synthesize",
    "synthesize_line_demo",
]

DOCUMENT_KIND = "pseudoae-network"
DOCUMENT_VERSION = 1


class InvalidSpec(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class NetworkSpec:
    """Synthesis parameters: ``n`` inputs of ``m`` digits in ``format``."""

    n: int
    m: int
    format: FloatFormat = field(default_factory=FloatFormat)

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidSpec(f"n must be an integer >= 1, got {self.n!r}")
        if not isinstance(self.m, int) or self.m < 2:
            raise InvalidSpec(f"m must be an integer >= 2, got {self.m!r}")

    @classmethod
    def binary(cls, n: int, m: int, z: int = 23, rounding: Rounding | str = Rounding.TRUNCATE) -> NetworkSpec:
        try:
            fmt = FloatFormat.binary(z, rounding)
        except ValueError as exc:
            raise InvalidSpec(str(exc)) from exc
        return cls(n, m, fmt)

    @property
    def radix(self) -> int:
        return self.format.radix

    @property
    def precision(self) -> int:
        return self.format.precision_digits

    @property
    def packed_digits(self) -> int:
        return self.n * self.m

    @property
    def capacity_safe(self) -> bool:
        """Whether the packed code fits the significand (``n*m <= P``)."""
        return self.n * self.m <= self.format.precision_digits

    def warnings(self) -> list[str]:
        out = []
        if not self.capacity_safe:
            out.append(
                f"capacity-unsafe: n*m = {self.packed_digits} > P = {self.precision}"
            )
        if self.m > self.precision:
            out.append(f"m = {self.m} exceeds P = {self.precision}: inputs themselves are rounded")
        return out

    def with_rounding(self, rounding: Rounding | str) -> NetworkSpec:
        fmt = FloatFormat(self.radix, self.precision, Rounding(rounding))
        return NetworkSpec(self.n, self.m, fmt)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "radix": self.radix,
            "precision": self.precision,
            "rounding": self.format.rounding.value,
        }


@dataclass(frozen=True)
class ScaledInteger:
    """Exact ``coefficient * radix**exponent``; the radix comes from context."""

    coefficient: int
    exponent: int = 0

    def to_float(self, fmt: FloatFormat) -> FloatValue:
        """Convert without rounding; raises :class:`InvalidSpec` if inexact."""
        c = self.coefficient
        value = make(c < 0, abs(c), self.exponent, fmt)
        if to_fraction(value) != self.to_fraction(fmt.radix):
            raise InvalidSpec(f"{self} is not exactly representable in {fmt}")
        return value

    def to_fraction(self, radix: int) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.coefficient * radix**self.exponent)
        return Fraction(self.coefficient, radix**-self.exponent)

    @classmethod
    def from_float(cls, v: FloatValue) -> ScaledInteger:
        return cls(-v.significand if v.negative else v.significand, v.exponent)

    def normalized(self, radix: int) -> ScaledInteger:
        """Same value with trailing zero digits moved into the exponent."""
        c, e = self.coefficient, self.exponent
        if c == 0:
            return ScaledInteger(0, 0)
        while c % radix == 0:
            c //= radix
            e += 1
        return ScaledInteger(c, e)

    def to_dict(self) -> dict[str, int]:
        return {"coefficient": self.coefficient, "exponent": self.exponent}

    def __str__(self) -> str:
        return f"{self.coefficient}*r^{self.exponent}" if self.exponent else str(self.coefficient)


_ZERO_W = ScaledInteger(0)
_ONE_W = ScaledInteger(1)


@dataclass(frozen=True)
class Layer:
    weights: tuple[tuple[ScaledInteger, ...], ...]
    biases: tuple[ScaledInteger, ...]
    activation: str = "identity"

    def __post_init__(self) -> None:
        if self.activation != "identity":
            raise InvalidSpec(f"unsupported activation {self.activation!r}")
        if len(self.weights) != len(self.biases):
            raise InvalidSpec("weights rows and biases differ in length")
        widths = {len(row) for row in self.weights}
        if len(widths) > 1:
            raise InvalidSpec("ragged weight matrix")

    @property
    def out_size(self) -> int:
        return len(self.biases)

    @property
    def in_size(self) -> int:
        return len(self.weights[0]) if self.weights else 0


@dataclass(frozen=True)
class Network:
    """Dense identity-activation network.

    Neuron layers are numbered from 0 (the inputs); ``layers[i]`` produces
    neuron layer ``i + 1``. ``code_layer_index`` names the bottleneck neuron
    layer. ``spec`` is ``None`` for networks not built by :func:`synthesize`.
    """

    format: FloatFormat
    layers: tuple[Layer, ...]
    code_layer_index: int
    spec: NetworkSpec | None = None

    def __post_init__(self) -> None:
        if not self.layers:
            raise InvalidSpec("network has no layers")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_size != nxt.in_size:
                raise InvalidSpec(
                    f"layer shapes do not compose: {prev.out_size} -> {nxt.in_size}"
                )
        if not 0 < self.code_layer_index <= len(self.layers):
            raise InvalidSpec(f"code_layer_index {self.code_layer_index} out of range")
        if self.spec is not None:
            n = self.spec.n
            if self.widths != [n, 1, n, n, n, n] or self.code_layer_index != 1:
                raise InvalidSpec(f"layer widths {self.widths} do not match the spec (n={n})")
            if self.spec.format != self.format:
                raise InvalidSpec("spec format and network format differ")
        # Convert weights once; raises if any entry is inexact in the format.
        compiled = tuple(_compile(layer, self.format) for layer in self.layers)
        object.__setattr__(self, "_compiled", compiled)

    @property
    def in_size(self) -> int:
        return self.layers[0].in_size

    @property
    def widths(self) -> list[int]:
        return [self.in_size] + [layer.out_size for layer in self.layers]

    @property
    def group(self) -> int:
        """Digit grouping for trace rendering."""
        return self.spec.m if self.spec is not None else 4

    def with_format(self, fmt: FloatFormat) -> Network:
        spec = NetworkSpec(self.spec.n, self.spec.m, fmt) if self.spec else None
        return Network(fmt, self.layers, self.code_layer_index, spec)


_Compiled = tuple[tuple[tuple[tuple[int, object], ...], FloatValue | None], ...]

# Weights of +-1 skip the multiply: every neuron value is already in format,
# so mul(x, 1) == x and mul(x, -1) == neg(x) exactly.
_UNIT = "unit"
_NEG_UNIT = "neg-unit"


def _compile(layer: Layer, fmt: FloatFormat) -> _Compiled:
    """Per row: nonzero (column, weight) pairs and the bias (None when zero)."""
    rows = []
    for weights, bias in zip(layer.weights, layer.biases):
        terms = []
        for j, w in enumerate(weights):
            if w.coefficient == 0:
                continue
            value = w.to_float(fmt)
            if value.significand == 1 and value.exponent == 0:
                terms.append((j, _NEG_UNIT if value.negative else _UNIT))
            else:
                terms.append((j, value))
        terms = tuple(terms)
        rows.append((terms, bias.to_float(fmt) if bias.coefficient else None))
    return tuple(rows)


def synthesize(spec: NetworkSpec) -> Network:
    """Build the packing autoencoder for ``spec``.

    Capacity-unsafe specs are accepted so their failures can be observed.
    """
    n, m, p = spec.n, spec.m, spec.precision
    shift = [(k - 1) * m for k in range(1, n + 1)]

    pack = Layer(
        weights=(tuple(ScaledInteger(1, s) for s in shift),),
        biases=(_ZERO_W,),
    )
    add_bias = Layer(
        weights=tuple((_ONE_W,) for _ in range(n)),
        biases=tuple(ScaledInteger(1, p - 1 + s) for s in shift),
    )
    remove_bias = Layer(
        weights=_diagonal(n, [_ONE_W] * n),
        biases=tuple(ScaledInteger(-1, p - 1 + s) for s in shift),
    )
    isolate = Layer(
        weights=tuple(
            tuple(
                _ONE_W if j == k else ScaledInteger(-1) if j == k + 1 else _ZERO_W
                for j in range(n)
            )
            for k in range(n)
        ),
        biases=(_ZERO_W,) * n,
    )
    unshift = Layer(
        weights=_diagonal(n, [ScaledInteger(1, -s) for s in shift]),
        biases=(_ZERO_W,) * n,
    )
    return Network(
        spec.format,
        (pack, add_bias, remove_bias, isolate, unshift),
        code_layer_index=1,
        spec=spec,
    )


def _diagonal(n: int, entries: Sequence[ScaledInteger]) -> tuple[tuple[ScaledInteger, ...], ...]:
    return tuple(
        tuple(entries[k] if j == k else _ZERO_W for j in range(n)) for k in range(n)
    )


def synthesize_line_demo(
    a: ScaledInteger | int,
    b: ScaledInteger | int,
    fmt: FloatFormat | None = None,
) -> Network:
    """2 -> 1 -> 2 network reconstructing points on ``y = a*x + b`` from ``x``."""
    fmt = fmt or FloatFormat.binary32()
    a = a if isinstance(a, ScaledInteger) else ScaledInteger(a)
    b = b if isinstance(b, ScaledInteger) else ScaledInteger(b)
    encoder = Layer(weights=((_ONE_W, _ZERO_W),), biases=(_ZERO_W,))
    decoder = Layer(weights=((_ONE_W,), (a,)), biases=(_ZERO_W, b))
    return Network(fmt, (encoder, decoder), code_layer_index=1)


@dataclass(frozen=True)
class TraceReport:
    """Values of every neuron layer of one forward pass, inputs first."""

    values: tuple[tuple[FloatValue, ...], ...]
    format: FloatFormat
    group: int
    spec: NetworkSpec | None = None

    @property
    def outputs(self) -> tuple[FloatValue, ...]:
        return self.values[-1]

    def digits(self) -> list[list[str]]:
        return [[render_value(v, self.format, self.group) for v in layer] for layer in self.values]

    def to_dict(self) -> dict[str, Any]:
        return {
            "spec": self.spec.to_dict() if self.spec else None,
            "layers": [
                [
                    {"value": _value_text(v), "digits": render_value(v, self.format, self.group)}
                    for v in layer
                ]
                for layer in self.values
            ],
        }


def _value_text(v: FloatValue) -> str:
    return str(to_fraction(v))


def render_value(v: FloatValue, fmt: FloatFormat, group: int) -> str:
    """Digit rendering tolerant of negative and fractional values."""
    try:
        if v.negative:
            return "-" + render_digits(v._replace(negative=False), fmt, group)
        return render_digits(v, fmt, group)
    except (NotAnInteger, ValueError):
        return str(to_fraction(v))


def _run(
    compiled: Iterable[_Compiled], values: list[FloatValue], fmt: FloatFormat, keep: bool
) -> list[list[FloatValue]]:
    trace = [values] if keep else []
    zero = from_integer(0, fmt)
    for rows in compiled:
        out = []
        for terms, bias in rows:
            acc = None
            for j, w in terms:
                if w is _UNIT:
                    term = values[j]
                elif w is _NEG_UNIT:
                    term = neg(values[j])
                else:
                    term = mul(w, values[j], fmt)
                acc = term if acc is None else add(acc, term, fmt)
            if bias is not None:
                acc = bias if acc is None else add(acc, bias, fmt)
            out.append(zero if acc is None else acc)
        values = out
        if keep:
            trace.append(values)
    if not keep:
        trace.append(values)
    return trace


def _embed(net: Network, inputs: Sequence[int]) -> list[FloatValue]:
    if len(inputs) != net.in_size:
        raise ShapeMismatch(f"expected {net.in_size} inputs, got {len(inputs)}")
    return [from_integer(int(x), net.format) for x in inputs]


def forward(net: Network, inputs: Sequence[int]) -> tuple[tuple[FloatValue, ...], TraceReport]:
    """Run all layers; each neuron sums its weighted inputs in ascending index
    order, then adds its bias, rounding after every multiply and add."""
    layers = _run(net._compiled, _embed(net, inputs), net.format, keep=True)
    trace = TraceReport(tuple(tuple(layer) for layer in layers), net.format, net.group, net.spec)
    return trace.outputs, trace


def run_values(net: Network, inputs: Sequence[int]) -> list[list[FloatValue]]:
    """Like :func:`forward` but returns plain per-layer lists (no report)."""
    return _run(net._compiled, _embed(net, inputs), net.format, keep=True)


def encode(net: Network, inputs: Sequence[int]) -> FloatValue:
    layers = net._compiled[: net.code_layer_index]
    (code,) = _run(layers, _embed(net, inputs), net.format, keep=False)[-1]
    return code


def decode(net: Network, code: FloatValue) -> tuple[FloatValue, ...]:
    layers = net._compiled[net.code_layer_index :]
    return tuple(_run(layers, [code], net.format, keep=False)[-1])


def network_to_dict(net: Network) -> dict[str, Any]:
    fmt = net.format
    return {
        "kind": DOCUMENT_KIND,
        "version": DOCUMENT_VERSION,
        "spec": net.spec.to_dict() if net.spec else None,
        "format": {
            "radix": fmt.radix,
            "precision": fmt.precision_digits,
            "rounding": fmt.rounding.value,
        },
        "code_layer_index": net.code_layer_index,
        "layers": [
            {
                "activation": layer.activation,
                "weights": [[w.to_dict() for w in row] for row in layer.weights],
                "biases": [b.to_dict() for b in layer.biases],
            }
            for layer in net.layers
        ],
    }


def _scaled(obj: Any) -> ScaledInteger:
    c, e = obj["coefficient"], obj["exponent"]
    if not isinstance(c, int) or not isinstance(e, int) or isinstance(c, bool):
        raise InvalidSpec(f"weight entries must be integers, got {obj!r}")
    return ScaledInteger(c, e)


def network_from_dict(doc: dict[str, Any]) -> Network:
    if doc.get("kind") != DOCUMENT_KIND:
        raise InvalidSpec(f"not a {DOCUMENT_KIND} document")
    if doc.get("version") != DOCUMENT_VERSION:
        raise InvalidSpec(f"unsupported document version {doc.get('version')!r}")
    try:
        f = doc["format"]
        fmt = FloatFormat(f["radix"], f["precision"], Rounding(f["rounding"]))
        spec = None
        if doc.get("spec") is not None:
            s = doc["spec"]
            spec = NetworkSpec(s["n"], s["m"], FloatFormat(s["radix"], s["precision"], Rounding(s["rounding"])))
            if spec.format != fmt:
                raise InvalidSpec("spec and format disagree")
        layers = tuple(
            Layer(
                weights=tuple(tuple(_scaled(w) for w in row) for row in layer["weights"]),
                biases=tuple(_scaled(b) for b in layer["biases"]),
                activation=layer.get("activation", "identity"),
            )
            for layer in doc["layers"]
        )
        return Network(fmt, layers, doc["code_layer_index"], spec)
    except (KeyError, TypeError) as exc:
        raise InvalidSpec(f"malformed network document: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, InvalidSpec):
            raise
        raise InvalidSpec(str(exc)) from exc


def dump_network(net: Network, path: str | Path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=1) + "\n", encoding="utf-8")


def load_network(path: str | Path) -> Network:
    return network_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
