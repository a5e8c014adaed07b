import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import pack, simulate
from pseudoae.netcore import (
    InvalidSpec,
    Layer,
    Network,
    NetworkSpec,
    ScaledInteger,
    ShapeMismatch,
    decode,
    dump_network,
    encode,
    forward,
    load_network,
    network_from_dict,
    network_to_dict,
    synthesize,
    synthesize_line_demo,
)
from pseudoae.softfloat import FloatFormat, Rounding, from_integer, to_fraction, to_integer

WORKED = NetworkSpec.binary(3, 3, z=9)


def ints(values):
    return [to_integer(v) for v in values]


@pytest.fixture(scope="module")
def worked_net():
    return synthesize(WORKED)


@st.composite
def safe_specs(draw, radixes=(2,)):
    radix = draw(st.sampled_from(radixes))
    n = draw(st.integers(1, 5))
    m = draw(st.integers(2, 6))
    precision = draw(st.integers(n * m, n * m + 4))
    roundings = [Rounding.TRUNCATE, Rounding.NEAREST_EVEN] if radix == 2 else [Rounding.TRUNCATE]
    rounding = draw(st.sampled_from(roundings))
    return NetworkSpec(n, m, FloatFormat(radix, precision, rounding))


@st.composite
def safe_spec_and_inputs(draw, radixes=(2,)):
    spec = draw(safe_specs(radixes))
    bound = spec.radix ** (spec.m - 1)
    xs = draw(st.lists(st.integers(0, bound - 1), min_size=spec.n, max_size=spec.n))
    return spec, xs


class TestNetworkSpec:
    @pytest.mark.parametrize("n,m", [(0, 3), (3, 1), (-1, 2)])
    def test_invalid(self, n, m):
        with pytest.raises(InvalidSpec):
            NetworkSpec.binary(n, m, 9)

    def test_capacity_flag(self):
        assert WORKED.capacity_safe
        unsafe = NetworkSpec.binary(8, 4, 23)
        assert not unsafe.capacity_safe
        assert unsafe.packed_digits == 32 and unsafe.precision == 24
        assert unsafe.warnings()

    def test_warns_when_inputs_exceed_precision(self):
        spec = NetworkSpec.binary(1, 8, z=4)
        assert any("exceeds" in w for w in spec.warnings())


class TestSynthesize:
    def test_worked_example_k2_weights(self, worked_net):
        pack_l, add_l, remove_l, isolate_l, unshift_l = worked_net.layers
        assert pack_l.weights[0][1] == ScaledInteger(1, 3)
        assert add_l.biases[1] == ScaledInteger(1, 12)
        assert remove_l.biases[1] == ScaledInteger(-1, 12)
        assert unshift_l.weights[1][1] == ScaledInteger(1, -3)
        assert isolate_l.weights[1] == (ScaledInteger(0), ScaledInteger(1), ScaledInteger(-1))

    def test_shapes(self, worked_net):
        assert worked_net.widths == [3, 1, 3, 3, 3, 3]
        assert worked_net.code_layer_index == 1
        assert all(layer.activation == "identity" for layer in worked_net.layers)

    def test_last_isolation_row_passes_through(self, worked_net):
        assert worked_net.layers[3].weights[2] == (ScaledInteger(0), ScaledInteger(0), ScaledInteger(1))

    def test_degenerate_single_input(self):
        net = synthesize(NetworkSpec.binary(1, 2, 23))
        assert net.widths == [1, 1, 1, 1, 1, 1]
        assert net.layers[0].weights == ((ScaledInteger(1, 0),),)
        assert net.layers[3].weights == ((ScaledInteger(1),),)

    def test_accepts_capacity_unsafe(self):
        net = synthesize(NetworkSpec.binary(8, 4, 23))
        assert net.widths == [8, 1, 8, 8, 8, 8]

    @settings(max_examples=50)
    @given(safe_specs(radixes=(2, 3, 10)))
    def test_weights_round_trip_exactly(self, spec):
        net = synthesize(spec)
        for layer in net.layers:
            for entry in itertools.chain(itertools.chain.from_iterable(layer.weights), layer.biases):
                back = ScaledInteger.from_float(entry.to_float(spec.format))
                assert back == entry.normalized(spec.radix)
                assert back.to_fraction(spec.radix) == entry.to_fraction(spec.radix)


class TestForward:
    def test_worked_trace(self, worked_net):
        outputs, trace = forward(worked_net, [3, 2, 3])
        assert ints(outputs) == [3, 2, 3]
        assert trace.digits()[1] == ["011 010 011"]
        layers = [ints(layer) for layer in trace.values]
        assert [layer[1] for layer in layers[2:]] == [4304, 208, 16, 2]

    def test_zero_fixed_point(self, worked_net):
        outputs, trace = forward(worked_net, [0, 0, 0])
        assert ints(outputs) == [0, 0, 0]
        # L3 holds the bare biases; every other layer is zero
        assert ints(trace.values[2]) == [2**9, 2**12, 2**15]
        for i, layer in enumerate(trace.values):
            if i != 2:
                assert all(v.is_zero for v in layer)

    def test_rne_violating_leading_zero_fails(self):
        net = synthesize(NetworkSpec.binary(3, 3, 9, Rounding.NEAREST_EVEN))
        outputs, trace = forward(net, [5, 2, 3])
        # layer values from oracles.simulate([5,2,3], 3, 3, 2, 10, "rne")
        assert ints(outputs) == [-3, 3, 3]
        assert to_integer(trace.values[2][1]) == 4312

    def test_shape_mismatch(self, worked_net):
        with pytest.raises(ShapeMismatch):
            forward(worked_net, [1, 2])

    @settings(max_examples=150, deadline=None)
    @given(safe_spec_and_inputs(radixes=(2, 3, 5, 10)))
    def test_round_trip_theorem(self, args):
        spec, xs = args
        outputs, _ = forward(synthesize(spec), xs)
        assert ints(outputs) == xs

    @settings(max_examples=100, deadline=None)
    @given(safe_spec_and_inputs())
    def test_rounding_invariance_under_leading_zero(self, args):
        spec, xs = args
        _, a = forward(synthesize(spec.with_rounding("trunc")), xs)
        _, b = forward(synthesize(spec.with_rounding("rne")), xs)
        assert a.values == b.values

    @settings(max_examples=100, deadline=None)
    @given(safe_spec_and_inputs(radixes=(2, 3)))
    def test_l4_law(self, args):
        spec = args[0].with_rounding("trunc")
        xs = args[1]
        _, trace = forward(synthesize(spec), xs)
        c = pack(xs, spec.m, spec.radix)
        for k, v in enumerate(trace.values[3]):
            block = spec.radix ** (k * spec.m)
            assert to_integer(v) == c // block * block

    def test_matches_independent_simulation_in_failure_regimes(self):
        # capacity-unsafe and full-range inputs: every layer must agree with
        # the recipe recomputed on rationals with the reference rounding
        for z, mode in [(9, "trunc"), (9, "rne"), (6, "trunc")]:
            spec = NetworkSpec.binary(3, 3, z, mode)
            net = synthesize(spec)
            for xs in itertools.product(range(8), repeat=3):
                _, trace = forward(net, xs)
                got = [[to_fraction(v) for v in layer] for layer in trace.values]
                assert got == simulate(xs, 3, 3, 2, z + 1, mode), xs


class TestEncodeDecode:
    def test_encode_worked_example(self, worked_net):
        assert to_integer(encode(worked_net, [3, 2, 3])) == 211

    def test_encode_single_nonzero(self):
        spec = NetworkSpec.binary(4, 3, 23)
        net = synthesize(spec)
        for x in range(8):
            assert to_integer(encode(net, [x, 0, 0, 0])) == x

    def test_encode_two_blocks(self):
        net = synthesize(NetworkSpec.binary(2, 3, 9))
        assert to_integer(encode(net, [3, 3])) == 27

    def test_decode(self, worked_net):
        f = WORKED.format
        assert ints(decode(worked_net, from_integer(211, f))) == [3, 2, 3]
        assert ints(decode(worked_net, from_integer(0, f))) == [0, 0, 0]
        assert ints(decode(worked_net, from_integer(100, f))) == [4, 4, 1]

    @settings(max_examples=100, deadline=None)
    @given(safe_spec_and_inputs(radixes=(2, 3, 10)))
    def test_code_equals_pack_oracle(self, args):
        spec, xs = args
        assert to_integer(encode(synthesize(spec), xs)) == pack(xs, spec.m, spec.radix)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 4), st.integers(2, 4), st.integers(3, 12), st.data())
    def test_composability_any_regime(self, n, m, z, data):
        spec = NetworkSpec.binary(n, m, z, data.draw(st.sampled_from(["trunc", "rne"])))
        xs = data.draw(st.lists(st.integers(0, 2**m - 1), min_size=n, max_size=n))
        net = synthesize(spec)
        outputs, _ = forward(net, xs)
        assert decode(net, encode(net, xs)) == outputs


class TestLineDemo:
    def test_known_point(self):
        net = synthesize_line_demo(2, 5)
        assert ints(forward(net, [1, 7])[0]) == [1, 7]

    def test_intercept(self):
        assert ints(forward(synthesize_line_demo(2, 5), [0, 5])[0]) == [0, 5]

    def test_other_line(self):
        assert ints(forward(synthesize_line_demo(3, 1), [2, 7])[0]) == [2, 7]

    def test_off_line_point_projects(self):
        assert ints(forward(synthesize_line_demo(2, 5), [1, 8])[0]) == [1, 7]

    def test_shape(self):
        assert synthesize_line_demo(2, 5).widths == [2, 1, 2]

    def test_unrepresentable_coefficient(self):
        with pytest.raises(InvalidSpec):
            synthesize_line_demo(ScaledInteger(2**30 + 1), 5)

    def test_fractional_slope(self):
        net = synthesize_line_demo(ScaledInteger(1, -1), 3)
        assert ints(forward(net, [4, 5])[0]) == [4, 5]


class TestSerialization:
    def test_round_trip_in_memory(self, worked_net):
        doc = network_to_dict(worked_net)
        assert network_from_dict(doc) == worked_net
        json.dumps(doc)  # plain JSON, integers only

    def test_no_floats_in_document(self, worked_net):
        def walk(obj):
            if isinstance(obj, dict):
                for v in obj.values():
                    walk(v)
            elif isinstance(obj, list):
                for v in obj:
                    walk(v)
            else:
                assert not isinstance(obj, float)

        walk(network_to_dict(worked_net))

    def test_file_round_trip(self, tmp_path, worked_net):
        path = tmp_path / "net.json"
        dump_network(worked_net, path)
        loaded = load_network(path)
        assert loaded == worked_net
        assert forward(loaded, [3, 2, 3])[1] == forward(worked_net, [3, 2, 3])[1]

    def test_huge_exponents_survive(self, tmp_path):
        spec = NetworkSpec(4, 40, FloatFormat(10, 200))
        net = synthesize(spec)
        path = tmp_path / "big.json"
        dump_network(net, path)
        assert load_network(path) == net

    def test_line_demo_round_trip(self):
        net = synthesize_line_demo(2, 5)
        assert network_from_dict(network_to_dict(net)) == net

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.update(kind="other"),
            lambda d: d.update(version=99),
            lambda d: d["layers"][0]["weights"][0][0].update(coefficient=1.5),
            lambda d: d["layers"][0].update(activation="relu"),
            lambda d: d.pop("format"),
            lambda d: d["layers"].pop(2),
        ],
    )
    def test_rejects_malformed(self, worked_net, mutate):
        doc = network_to_dict(worked_net)
        mutate(doc)
        with pytest.raises(InvalidSpec):
            network_from_dict(doc)


class TestNetworkValidation:
    def test_shapes_must_compose(self):
        a = Layer(weights=((ScaledInteger(1), ScaledInteger(1)),), biases=(ScaledInteger(0),))
        with pytest.raises(InvalidSpec):
            Network(FloatFormat(), (a, a), code_layer_index=1)

    def test_ragged_matrix(self):
        with pytest.raises(InvalidSpec):
            Layer(weights=((ScaledInteger(1),), (ScaledInteger(1), ScaledInteger(0))), biases=(ScaledInteger(0),) * 2)
