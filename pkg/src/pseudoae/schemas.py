"""JSON Schemas for the network document and ``--format structured`` output."""

from __future__ import annotations

_INT = {"type": "integer"}
_NUMBER_TEXT = {"type": ["integer", "string"]}  # exact rationals render as "p/q"

_SPEC = {
    "type": "object",
    "required": ["n", "m", "radix", "precision", "rounding"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 2},
        "radix": {"type": "integer", "minimum": 2},
        "precision": {"type": "integer", "minimum": 1},
        "rounding": {"enum": ["trunc", "rne"]},
    },
    "additionalProperties": False,
}

_SCALED = {
    "type": "object",
    "required": ["coefficient", "exponent"],
    "properties": {"coefficient": _INT, "exponent": _INT},
    "additionalProperties": False,
}

NETWORK = {
    "type": "object",
    "required": ["kind", "version", "spec", "format", "code_layer_index", "layers"],
    "properties": {
        "kind": {"const": "pseudoae-network"},
        "version": {"const": 1},
        "spec": {"oneOf": [_SPEC, {"type": "null"}]},
        "format": {
            "type": "object",
            "required": ["radix", "precision", "rounding"],
            "properties": {
                "radix": {"type": "integer", "minimum": 2},
                "precision": {"type": "integer", "minimum": 1},
                "rounding": {"enum": ["trunc", "rne"]},
            },
            "additionalProperties": False,
        },
        "code_layer_index": {"type": "integer", "minimum": 1},
        "layers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["activation", "weights", "biases"],
                "properties": {
                    "activation": {"const": "identity"},
                    "weights": {"type": "array", "items": {"type": "array", "items": _SCALED}},
                    "biases": {"type": "array", "items": _SCALED},
                },
            },
        },
    },
}

_COUNTEREXAMPLE = {
    "type": "object",
    "required": ["inputs", "expected", "actual", "diverging_layer", "diverging_neuron", "packed"],
    "properties": {
        "inputs": {"type": "array", "items": _INT},
        "expected": {"type": "array", "items": _INT},
        "actual": {"type": "array", "items": _NUMBER_TEXT},
        "diverging_layer": {"type": "string", "pattern": "^(L[0-9]+|none)$"},
        "diverging_neuron": {"type": ["integer", "null"]},
        "packed": {"type": ["integer", "null"]},
    },
}

VERIFY_REPORT = {
    "type": "object",
    "required": ["spec", "domain", "mode", "total_cases", "failures", "first_counterexample"],
    "properties": {
        "spec": _SPEC,
        "domain": {"enum": ["leading-zero", "full"]},
        "mode": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["exhaustive", "sampled"]},
                "count": _INT,
                "seed": _INT,
            },
        },
        "total_cases": {"type": "integer", "minimum": 0},
        "failures": {"type": "integer", "minimum": 0},
        "first_counterexample": {"oneOf": [_COUNTEREXAMPLE, {"type": "null"}]},
    },
}

_TRACE = {
    "type": "object",
    "required": ["spec", "layers"],
    "properties": {
        "spec": {"oneOf": [_SPEC, {"type": "null"}]},
        "layers": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["value", "digits"],
                    "properties": {"value": {"type": "string"}, "digits": {"type": "string"}},
                },
            },
        },
    },
}

SYNTH = {
    "type": "object",
    "required": ["command", "out", "summary", "network"],
    "properties": {
        "command": {"const": "synth"},
        "out": {"type": ["string", "null"]},
        "summary": {
            "type": "object",
            "required": ["layers", "capacity_safe", "packed_digits", "precision", "warnings"],
            "properties": {
                "layers": {"type": "array", "items": {"type": "string"}},
                "capacity_safe": {"type": "boolean"},
                "packed_digits": _INT,
                "precision": _INT,
                "warnings": {"type": "array", "items": {"type": "string"}},
            },
        },
        "network": {"oneOf": [NETWORK, {"type": "null"}]},
    },
}

RUN = {
    "type": "object",
    "required": ["command", "spec", "inputs", "outputs", "match", "trace"],
    "properties": {
        "command": {"const": "run"},
        "spec": {"oneOf": [_SPEC, {"type": "null"}]},
        "inputs": {"type": "array", "items": _INT},
        "outputs": {"type": "array", "items": _NUMBER_TEXT},
        "match": {"type": "boolean"},
        "trace": {"oneOf": [_TRACE, {"type": "null"}]},
    },
}

VERIFY = {
    "type": "object",
    "required": ["command", "report"],
    "properties": {"command": {"const": "verify"}, "report": VERIFY_REPORT},
}

SWEEP = {
    "type": "object",
    "required": ["command", "rows"],
    "properties": {
        "command": {"const": "sweep"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "n", "m", "radix", "precision", "rounding",
                    "capacity_safe", "method", "cases", "pass_fraction",
                ],
                "properties": {
                    "rounding": {"enum": ["trunc", "rne"]},
                    "capacity_safe": {"type": "boolean"},
                    "method": {"enum": ["exhaustive", "sampled"]},
                    "pass_fraction": {"type": "string", "pattern": "^[0-9]+(/[0-9]+)?$"},
                },
            },
        },
    },
}

DEMO_LINE = {
    "type": "object",
    "required": ["command", "a", "b", "input", "output", "match"],
    "properties": {
        "command": {"const": "demo-line"},
        "a": _INT,
        "b": _INT,
        "input": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
        "output": {"type": "array", "items": _NUMBER_TEXT, "minItems": 2, "maxItems": 2},
        "match": {"type": "boolean"},
    },
}

COMMANDS = {"synth": SYNTH, "run": RUN, "verify": VERIFY, "sweep": SWEEP, "demo-line": DEMO_LINE}
