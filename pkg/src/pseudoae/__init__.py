"""Hand-synthesized autoencoder that packs integers into one float.

An n-tuple of m-digit integers is concatenated into a single bottleneck
neuron and recovered by letting finite-precision addition truncate the
unwanted digits. The float engine is configurable (radix, precision,
rounding) so that mechanism can be tested explicitly.
"""

__version__ = "0.1.0"

from .netcore import (
    InvalidSpec,
    Layer,
    Network,
    NetworkSpec,
    ScaledInteger,
    ShapeMismatch,
    TraceReport,
    decode,
    encode,
    forward,
    load_network,
    synthesize,
    synthesize_line_demo,
)
from .softfloat import FloatFormat, FloatValue, NotAnInteger, Rounding

__all__ = [
    "FloatFormat",
    "FloatValue",
    "InvalidSpec",
    "Layer",
    "Network",
    "NetworkSpec",
    "NotAnInteger",
    "Rounding",
    "ScaledInteger",
    "ShapeMismatch",
    "TraceReport",
    "decode",
    "encode",
    "forward",
    "load_network",
    "synthesize",
    "synthesize_line_demo",
]
