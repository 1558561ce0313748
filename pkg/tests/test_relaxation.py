import itertools

import pytest

from wmlab.machine import ReadAccess, WriteAccess
from wmlab.relaxation import (
    CANONICAL_ORDER,
    PRODUCTS,
    Feature,
    InvalidModel,
    Layer,
    MemoryModel,
    UnknownFeature,
    UnknownProduct,
    access_shapes,
    all_layer_stacks,
    all_products,
    base_may_swap,
    compose,
    is_cross_thread_open,
    layer_may_swap,
    may_swap,
    named_product,
    parse_features,
    product_model,
    stack_may_swap,
)

W1v = WriteAccess(1, "v", 1, 0)
W1w = WriteAccess(1, "w", 1, 1)
R1v = ReadAccess(1, "v", 2)
R1w = ReadAccess(1, "w", 3)
R2v = ReadAccess(2, "v", 4)

SHAPES = access_shapes()
PAIRS = [(a, b) for a in SHAPES for b in SHAPES if a is not b]


def test_base_may_swap():
    assert base_may_swap(W1v, R1w) is False
    assert base_may_swap(W1v, R2v) is True
    assert base_may_swap(R1w, R1w) is False


def test_wr_layer():
    assert layer_may_swap(Layer.WR, W1v, R1w, base_may_swap) is True
    assert layer_may_swap(Layer.WR, W1v, R1v, base_may_swap) is False
    assert layer_may_swap(Layer.WR, R1v, W1w, base_may_swap) is False
    assert layer_may_swap(Layer.WR, W1v, W1w, base_may_swap) is False


def test_wrown_layer():
    assert layer_may_swap(Layer.WROWN, W1v, R1v, base_may_swap) is True
    assert layer_may_swap(Layer.WROWN, W1v, R1w, base_may_swap) is False


@pytest.mark.parametrize(
    "layer, a, b, b_same",
    [
        (Layer.WW, WriteAccess(0, "x", 1, 0), WriteAccess(0, "y", 1, 1), WriteAccess(0, "x", 2, 1)),
        (Layer.RR, ReadAccess(0, "x", 0), ReadAccess(0, "y", 1), ReadAccess(0, "x", 1)),
        (Layer.RW, ReadAccess(0, "x", 0), WriteAccess(0, "y", 1, 1), WriteAccess(0, "x", 1, 1)),
    ],
)
def test_analogous_layers_relax_distinct_locations_only(layer, a, b, b_same):
    assert layer_may_swap(layer, a, b, base_may_swap) is True
    assert layer_may_swap(layer, a, b_same, base_may_swap) is False


def test_layers_delegate_unmatched_shapes():
    calls = []

    def original(a, b):
        calls.append((a, b))
        return "sentinel"

    assert layer_may_swap(Layer.WW, R1v, R1w, original) == "sentinel"
    assert layer_may_swap(Layer.WROWN, R1v, W1v, original) == "sentinel"
    assert len(calls) == 2


def test_sc_equals_base():
    sc = product_model("SC")
    assert all(may_swap(sc, a, b) == base_may_swap(a, b) for a, b in PAIRS)


def test_tso_chaining():
    tso = product_model("TSO")
    assert tso.layers == (Layer.WR, Layer.WROWN)
    assert may_swap(tso, W1v, R1v) is True
    assert may_swap(tso, W1v, W1w) is False


def test_compose():
    sc = compose(set())
    assert sc.layers == () and sc.read_early is False
    tso = compose({Feature.WR, Feature.READ_EARLY})
    assert tso.layers == (Layer.WR, Layer.WROWN) and tso.read_early
    pso = compose({Feature.WR, Feature.WW, Feature.READ_EARLY})
    assert pso.layers == (Layer.WW, Layer.WR, Layer.WROWN) and pso.read_early
    everything = compose(set(Feature))
    assert everything.layers == CANONICAL_ORDER


def test_named_products():
    assert named_product("IBM370") == {Feature.WR}
    assert named_product("SC") == set()
    assert named_product("PSO") == {Feature.WR, Feature.WW, Feature.READ_EARLY}
    assert named_product("tso") == {Feature.WR, Feature.READ_EARLY}
    with pytest.raises(UnknownProduct, match="unknown product XYZ"):
        named_product("XYZ")


def test_parse_features():
    assert parse_features("WR, ww,readearly") == {Feature.WR, Feature.WW, Feature.READ_EARLY}
    assert parse_features("") == frozenset()
    with pytest.raises(UnknownFeature):
        parse_features("WR,XX")


@pytest.mark.parametrize(
    "layers, read_early",
    [
        ((Layer.WROWN, Layer.WR), True),
        ((Layer.WR, Layer.WR), False),
        ((Layer.WR,), True),
        ((Layer.WROWN,), False),
    ],
)
def test_invalid_models_rejected(layers, read_early):
    with pytest.raises(InvalidModel):
        MemoryModel(layers, read_early)


def test_all_layer_stacks_are_valid_and_cover_compose():
    stacks = all_layer_stacks()
    assert len({(m.layers, m.read_early) for m in stacks}) == len(stacks)
    for features in itertools.chain.from_iterable(
        itertools.combinations(list(Feature), k) for k in range(6)
    ):
        composed = compose(features)
        assert any(m.layers == composed.layers for m in stacks)


@pytest.mark.parametrize("model", all_layer_stacks(), ids=lambda m: "/".join(l.value for l in m.layers) or "SC")
def test_cross_thread_openness(model):
    assert is_cross_thread_open(model)
    for a, b in PAIRS:
        if a.tid != b.tid:
            assert model.may_swap(a, b)


def test_openness_guard_detects_closed_predicate():
    class Closed(MemoryModel):
        def may_swap(self, a, b):
            return False

    assert not is_cross_thread_open(Closed())


def test_monotone_relaxation():
    for model in all_layer_stacks():
        for extra in Layer:
            if extra in model.layers:
                continue
            bigger = (extra,) + model.layers
            for a, b in PAIRS:
                if stack_may_swap(model.layers, a, b):
                    assert stack_may_swap(bigger, a, b)


@pytest.mark.parametrize("model", all_products(), ids=str)
def test_same_location_writes_never_swap(model):
    for loc in ("x", "y"):
        a, b = WriteAccess(0, loc, 1, 0), WriteAccess(0, loc, 2, 1)
        assert not model.may_swap(a, b)


def test_composition_commutativity():
    free = [Layer.RW, Layer.RR, Layer.WW, Layer.WR]
    for size in range(1, 5):
        for subset in itertools.combinations(free, size):
            for with_own in (False, True):
                tables = set()
                for order in itertools.permutations(subset):
                    layers = order + ((Layer.WROWN,) if with_own else ())
                    tables.add(tuple(stack_may_swap(layers, a, b) for a, b in PAIRS))
                assert len(tables) == 1, subset


def test_product_catalog_names():
    assert list(PRODUCTS) == ["SC", "IBM370", "TSO", "PSO"]
    assert [m.label for m in all_products()] == ["SC", "IBM370", "TSO", "PSO"]
    assert compose({Feature.WW}).label == "custom(WW)"
