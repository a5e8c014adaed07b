"""Exact-integer oracles and round-trip verification of synthesized networks.

Input domains:

* ``leading-zero``: every ``x_k < r**(m-1)``, so each m-digit block starts
  with a zero digit.
* ``full``: every ``x_k < r**m``.

Exhaustive runs enumerate tuples in ``itertools.product`` order (``x_1``
varies slowest). Sampled runs draw each tuple as
``[rng.randrange(bound) for _ in range(n)]`` from ``random.Random(seed)``
(Mersenne Twister), which is stable across platforms and Python versions.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Sequence

from .netcore import Network, NetworkSpec, encode, run_values, synthesize
from .softfloat import FloatFormat, FloatValue, Rounding, to_fraction

__all__ = [
    "BudgetExceeded",
    "Counterexample",
    "DEFAULT_BUDGET",
    "Divergence",
    "Domain",
    "SWEEP_HEADER",
    "SweepRow",
    "VerifyReport",
    "capacity_sweep",
    "case_count",
    "oracle_layers",
    "oracle_pack",
    "oracle_unpack",
    "rounding_divergence",
    "sweep_csv",
    "verify_exhaustive",
    "verify_sampled",
]

DEFAULT_BUDGET = 10**7
SWEEP_HEADER = (
    "n", "m", "radix", "precision", "rounding", "capacity_safe", "method", "cases", "pass_fraction",
)


class BudgetExceeded(RuntimeError):
    def __init__(self, cases: int, budget: int) -> None:
        super().__init__(f"domain has {cases} cases, budget is {budget}")
        self.cases = cases
        self.budget = budget


class Domain(str, enum.Enum):
    LEADING_ZERO = "leading-zero"
    FULL = "full"

    def bound(self, spec: NetworkSpec) -> int:
        """Exclusive upper bound on each input."""
        digits = spec.m - 1 if self is Domain.LEADING_ZERO else spec.m
        return spec.radix**digits


def case_count(spec: NetworkSpec, domain: Domain | str) -> int:
    return Domain(domain).bound(spec) ** spec.n


def oracle_pack(xs: Sequence[int], spec: NetworkSpec) -> int:
    """Concatenate the blocks: ``sum(x_k * r**((k-1)m))``."""
    if len(xs) != spec.n:
        raise ValueError(f"expected {spec.n} values, got {len(xs)}")
    r, m = spec.radix, spec.m
    return sum(x * r ** (k * m) for k, x in enumerate(xs))


def oracle_unpack(c: int, spec: NetworkSpec) -> list[int]:
    block = spec.radix**spec.m
    out = []
    for _ in range(spec.n):
        c, x = divmod(c, block)
        out.append(x)
    return out


def oracle_layers(xs: Sequence[int], spec: NetworkSpec) -> list[list[int]]:
    """Ideal (infinitely precise truncation) value of every neuron layer.

    L3 keeps ``c`` with its lowest ``(k-1)m`` digits zeroed plus the bias,
    L4 drops the bias, L5 takes adjacent differences, L6 shifts back.
    """
    r, m, n, p = spec.radix, spec.m, spec.n, spec.precision
    c = oracle_pack(xs, spec)
    scale = [r ** (k * m) for k in range(n)]
    zero_low = [c // s * s for s in scale]
    bias = [r ** (p - 1) * s for s in scale]
    l5 = [zero_low[k] - zero_low[k + 1] for k in range(n - 1)] + [zero_low[-1]]
    return [
        list(xs),
        [c],
        [z + b for z, b in zip(zero_low, bias)],
        zero_low,
        l5,
        [v // s for v, s in zip(l5, scale)],
    ]


def _value(v: FloatValue) -> int | Fraction:
    f = to_fraction(v)
    return f.numerator if f.denominator == 1 else f


def _jsonable(v: int | Fraction) -> int | str:
    return v if isinstance(v, int) else str(v)


@dataclass(frozen=True)
class Counterexample:
    inputs: tuple[int, ...]
    expected: tuple[int, ...]
    actual: tuple[int | Fraction, ...]
    diverging_layer: int | None
    diverging_neuron: int | None = None
    packed: int | None = None

    @property
    def layer_name(self) -> str:
        return "none" if self.diverging_layer is None else f"L{self.diverging_layer + 1}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "inputs": list(self.inputs),
            "expected": list(self.expected),
            "actual": [_jsonable(v) for v in self.actual],
            "diverging_layer": self.layer_name,
            "diverging_neuron": self.diverging_neuron,
            "packed": self.packed,
        }


@dataclass(frozen=True)
class VerifyReport:
    spec: NetworkSpec
    domain: Domain
    mode: str
    total_cases: int
    failures: int
    first_counterexample: Counterexample | None = None
    count: int | None = None
    seed: int | None = None

    @property
    def passed(self) -> int:
        return self.total_cases - self.failures

    @property
    def pass_fraction(self) -> Fraction:
        return Fraction(self.passed, self.total_cases) if self.total_cases else Fraction(1)

    def to_dict(self) -> dict[str, Any]:
        mode: dict[str, Any] = {"kind": self.mode}
        if self.mode == "sampled":
            mode.update(count=self.count, seed=self.seed)
        return {
            "spec": self.spec.to_dict(),
            "domain": self.domain.value,
            "mode": mode,
            "total_cases": self.total_cases,
            "failures": self.failures,
            "first_counterexample": (
                self.first_counterexample.to_dict() if self.first_counterexample else None
            ),
        }

    def summary(self) -> str:
        s = self.spec
        lines = [
            f"spec: n={s.n} m={s.m} radix={s.radix} precision={s.precision} "
            f"rounding={s.format.rounding.value}",
            f"domain: {self.domain.value}, mode: {self.mode}"
            + (f" (count={self.count}, seed={self.seed})" if self.mode == "sampled" else ""),
            f"{self.passed}/{self.total_cases} pass",
        ]
        cx = self.first_counterexample
        if cx is not None:
            lines += [
                f"failures: {self.failures}",
                "first counterexample:",
                f"  inputs:   {','.join(map(str, cx.inputs))}",
                f"  expected: {','.join(map(str, cx.expected))}",
                f"  actual:   {','.join(map(str, cx.actual))}",
                f"  packed:   {cx.packed}",
                f"  diverging layer: {cx.layer_name}"
                + (f" (k={cx.diverging_neuron + 1})" if cx.diverging_neuron is not None else ""),
            ]
        return "\n".join(lines)


def _first_divergence(
    actual: Sequence[Sequence[FloatValue]], ideal: Sequence[Sequence[int]]
) -> tuple[int, int] | tuple[None, None]:
    for i, (got, want) in enumerate(zip(actual, ideal)):
        for k, (g, w) in enumerate(zip(got, want)):
            if to_fraction(g) != w:
                return i, k
    return None, None


def _equals_int(v: FloatValue, x: int) -> bool:
    if v.negative:
        return False
    if v.exponent >= 0:
        return v.significand * v.radix**v.exponent == x
    return v.significand == x * v.radix**-v.exponent


def _check(net: Network, spec: NetworkSpec, xs: tuple[int, ...]) -> Counterexample | None:
    layers = run_values(net, xs)
    outputs = layers[-1]
    packed = oracle_pack(xs, spec)
    ok = all(_equals_int(v, x) for v, x in zip(outputs, xs))
    if ok:
        ok = _equals_int(encode(net, xs), packed)
    if ok:
        return None
    layer, neuron = _first_divergence(layers, oracle_layers(xs, spec))
    return Counterexample(
        inputs=xs,
        expected=xs,
        actual=tuple(_value(v) for v in outputs),
        diverging_layer=layer,
        diverging_neuron=neuron,
        packed=packed,
    )


def _verify(net: Network, spec: NetworkSpec, tuples: Iterable[tuple[int, ...]]) -> tuple[int, int, Counterexample | None]:
    total = failures = 0
    first = None
    for xs in tuples:
        total += 1
        cx = _check(net, spec, xs)
        if cx is not None:
            failures += 1
            if first is None:
                first = cx
    return total, failures, first


def _enumerate(spec: NetworkSpec, domain: Domain) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(domain.bound(spec)), repeat=spec.n)


def _sample(spec: NetworkSpec, domain: Domain, count: int, seed: int) -> Iterator[tuple[int, ...]]:
    rng = random.Random(seed)
    bound = domain.bound(spec)
    for _ in range(count):
        yield tuple(rng.randrange(bound) for _ in range(spec.n))


def verify_exhaustive(
    spec: NetworkSpec,
    domain: Domain | str = Domain.LEADING_ZERO,
    budget: int = DEFAULT_BUDGET,
) -> VerifyReport:
    """Round-trip every tuple in the domain through the synthesized network."""
    domain = Domain(domain)
    cases = case_count(spec, domain)
    if cases > budget:
        raise BudgetExceeded(cases, budget)
    net = synthesize(spec)
    total, failures, first = _verify(net, spec, _enumerate(spec, domain))
    return VerifyReport(spec, domain, "exhaustive", total, failures, first)


def verify_sampled(
    spec: NetworkSpec,
    count: int,
    seed: int,
    domain: Domain | str = Domain.LEADING_ZERO,
) -> VerifyReport:
    if count < 1:
        raise ValueError("count must be >= 1")
    domain = Domain(domain)
    net = synthesize(spec)
    total, failures, first = _verify(net, spec, _sample(spec, domain, count, seed))
    return VerifyReport(spec, domain, "sampled", total, failures, first, count=count, seed=seed)


@dataclass(frozen=True)
class Divergence:
    """First place where truncation and nearest-even traces disagree."""

    inputs: tuple[int, ...]
    layer: int
    neuron: int
    truncated: FloatValue
    nearest_even: FloatValue

    @property
    def layer_name(self) -> str:
        return f"L{self.layer + 1}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "inputs": list(self.inputs),
            "layer": self.layer_name,
            "neuron": self.neuron + 1,
            "trunc": _jsonable(_value(self.truncated)),
            "rne": _jsonable(_value(self.nearest_even)),
        }


def rounding_divergence(
    spec: NetworkSpec,
    domain: Domain | str = Domain.FULL,
    budget: int = DEFAULT_BUDGET,
) -> Divergence | None:
    """Search the domain, in enumeration order, for a tuple whose traces
    under the two rounding modes differ."""
    if spec.radix != 2:
        raise ValueError("rounding divergence needs radix 2")
    domain = Domain(domain)
    cases = case_count(spec, domain)
    if cases > budget:
        raise BudgetExceeded(cases, budget)
    trunc = synthesize(spec.with_rounding(Rounding.TRUNCATE))
    rne = synthesize(spec.with_rounding(Rounding.NEAREST_EVEN))
    for xs in _enumerate(spec, domain):
        a = run_values(trunc, xs)
        b = run_values(rne, xs)
        if a == b:
            continue
        for i, (la, lb) in enumerate(zip(a, b)):
            for k, (va, vb) in enumerate(zip(la, lb)):
                if va != vb:
                    return Divergence(xs, i, k, va, vb)
    return None


@dataclass(frozen=True)
class SweepRow:
    n: int
    m: int
    radix: int
    precision: int
    rounding: Rounding
    capacity_safe: bool
    method: str
    cases: int
    pass_fraction: Fraction

    def csv_fields(self) -> list[str]:
        return [
            str(self.n),
            str(self.m),
            str(self.radix),
            str(self.precision),
            self.rounding.value,
            "true" if self.capacity_safe else "false",
            self.method,
            str(self.cases),
            repr(float(self.pass_fraction)),
        ]


def capacity_sweep(
    n_values: Iterable[int],
    m_values: Iterable[int],
    precisions: Iterable[int],
    roundings: Iterable[Rounding | str],
    radix: int = 2,
    budget: int = DEFAULT_BUDGET,
    sample_count: int = 10_000,
    seed: int = 0,
) -> list[SweepRow]:
    """Round-trip rate over the leading-zero domain for each grid cell.

    Cells whose domain exceeds ``budget`` fall back to ``sample_count``
    seeded samples; the row's ``method`` records which was used.
    """
    n_values, m_values = list(n_values), list(m_values)
    precisions = list(precisions)
    roundings = [Rounding(r) for r in roundings]
    if not (n_values and m_values and precisions and roundings):
        raise ValueError("sweep ranges must be nonempty")
    rows = []
    for n, m, p, rounding in itertools.product(n_values, m_values, precisions, roundings):
        spec = NetworkSpec(n, m, FloatFormat(radix, p, rounding))
        if case_count(spec, Domain.LEADING_ZERO) <= budget:
            report = verify_exhaustive(spec, Domain.LEADING_ZERO, budget)
        else:
            report = verify_sampled(spec, sample_count, seed, Domain.LEADING_ZERO)
        rows.append(
            SweepRow(
                n, m, radix, p, rounding, spec.capacity_safe, report.mode,
                report.total_cases, report.pass_fraction,
            )
        )
    return rows


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()
