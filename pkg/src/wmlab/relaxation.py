"""Memory models as stacks of relaxation layers.

Every model starts from the sequentially consistent swap predicate, which
lets an access overtake another only if they belong to different threads.
Each layer wraps the predicate below it (its ``original``) and may accept
additional pairs, never reject ones the inner predicate accepts.

Features are what users pick; layers are what gets stacked. ``ReadEarly``
turns on store forwarding and brings in the ``WROwn`` layer so that a read
can overtake its own thread's pending write to the same location.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .machine import AccessEvent, ReadAccess, WriteAccess

SwapPredicate = Callable[[AccessEvent, AccessEvent], bool]


class UnknownProduct(ValueError):
    pass


class UnknownFeature(ValueError):
    pass


class InvalidModel(ValueError):
    pass


class Feature(enum.Enum):
    WR = "WR"
    WW = "WW"
    RR = "RR"
    RW = "RW"
    READ_EARLY = "ReadEarly"

    @classmethod
    def parse(cls, name: str) -> Feature:
        for feature in cls:
            if feature.value.lower() == name.strip().lower():
                return feature
        known = ", ".join(f.value for f in cls)
        raise UnknownFeature(f"unknown feature {name.strip()!r} (known: {known})")


class Layer(enum.Enum):
    WROWN = "WROwn"
    WR = "WR"
    WW = "WW"
    RR = "RR"
    RW = "RW"


# Outermost first. Only WR-outside-WROwn is a real constraint.
CANONICAL_ORDER = (Layer.RW, Layer.RR, Layer.WW, Layer.WR, Layer.WROWN)

_FEATURE_LAYER = {
    Feature.WR: Layer.WR,
    Feature.WW: Layer.WW,
    Feature.RR: Layer.RR,
    Feature.RW: Layer.RW,
    Feature.READ_EARLY: Layer.WROWN,
}

# Which (first, second) access shape each program-order relaxation targets.
_RELAXED_SHAPE = {
    Layer.WR: (WriteAccess, ReadAccess),
    Layer.WW: (WriteAccess, WriteAccess),
    Layer.RR: (ReadAccess, ReadAccess),
    Layer.RW: (ReadAccess, WriteAccess),
}


def base_may_swap(a: AccessEvent, b: AccessEvent) -> bool:
    """May ``b`` execute before ``a`` under sequential consistency."""
    return a.tid != b.tid


def layer_may_swap(
    layer: Layer, a: AccessEvent, b: AccessEvent, original: SwapPredicate
) -> bool:
    if layer is Layer.WROWN:
        if isinstance(a, WriteAccess) and isinstance(b, ReadAccess) and a.loc == b.loc:
            return True
        return original(a, b)
    first, second = _RELAXED_SHAPE[layer]
    if isinstance(a, first) and isinstance(b, second):
        return original(a, b) or a.loc != b.loc
    return original(a, b)


@functools.lru_cache(maxsize=None)
def _stack_predicate(layers: tuple[Layer, ...]) -> SwapPredicate:
    predicate: SwapPredicate = base_may_swap
    for layer in reversed(layers):
        predicate = functools.partial(_wrapped, layer, predicate)
    return predicate


def _wrapped(layer: Layer, original: SwapPredicate, a: AccessEvent, b: AccessEvent) -> bool:
    return layer_may_swap(layer, a, b, original)


@dataclass(frozen=True)
class MemoryModel:
    """An ordered layer stack (outermost first) plus the forwarding flag."""

    layers: tuple[Layer, ...] = ()
    read_early: bool = False
    name: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        problems = model_problems(self.layers, self.read_early)
        if problems:
            raise InvalidModel("; ".join(problems))

    def may_swap(self, a: AccessEvent, b: AccessEvent) -> bool:
        return _stack_predicate(self.layers)(a, b)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        features = [layer.value for layer in self.layers if layer is not Layer.WROWN]
        if self.read_early:
            features.append(Feature.READ_EARLY.value)
        return "custom(" + ",".join(features) + ")"

    def __str__(self) -> str:
        return self.label


def model_problems(layers: Iterable[Layer], read_early: bool) -> list[str]:
    layers = list(layers)
    problems = []
    seen = set()
    for layer in layers:
        if layer in seen:
            problems.append(f"layer {layer.value} appears twice")
        seen.add(layer)
    if read_early and Layer.WROWN not in seen:
        problems.append("ReadEarly requires the WROwn layer")
    if Layer.WROWN in seen and not read_early:
        problems.append("WROwn layer is only available together with ReadEarly")
    if Layer.WR in seen and Layer.WROWN in seen:
        if layers.index(Layer.WR) > layers.index(Layer.WROWN):
            problems.append("WR must be stacked outside WROwn")
    return problems


def may_swap(model: MemoryModel, a: AccessEvent, b: AccessEvent) -> bool:
    return model.may_swap(a, b)


def compose(features: Iterable[Feature], name: Optional[str] = None) -> MemoryModel:
    wanted = {_FEATURE_LAYER[f] for f in features}
    layers = tuple(layer for layer in CANONICAL_ORDER if layer in wanted)
    return MemoryModel(layers, Layer.WROWN in wanted, name)


PRODUCTS: dict[str, frozenset[Feature]] = {
    "SC": frozenset(),
    "IBM370": frozenset({Feature.WR}),
    "TSO": frozenset({Feature.WR, Feature.READ_EARLY}),
    "PSO": frozenset({Feature.WR, Feature.WW, Feature.READ_EARLY}),
}


def named_product(name: str) -> frozenset[Feature]:
    try:
        return PRODUCTS[name.strip().upper()]
    except KeyError:
        known = ", ".join(PRODUCTS)
        raise UnknownProduct(f"unknown product {name} (known: {known})") from None


def product_model(name: str) -> MemoryModel:
    features = named_product(name)
    return compose(features, name=name.strip().upper())


def parse_features(spec: str) -> frozenset[Feature]:
    """Parse a comma separated feature list such as ``"WR,WW,ReadEarly"``."""
    return frozenset(Feature.parse(part) for part in spec.split(",") if part.strip())


def all_products() -> list[MemoryModel]:
    return [product_model(name) for name in PRODUCTS]


def all_layer_stacks() -> list[MemoryModel]:
    """Every valid model over the five layers, in every legal stacking order."""
    models = []
    for size in range(len(CANONICAL_ORDER) + 1):
        for layers in itertools.permutations(CANONICAL_ORDER, size):
            read_early = Layer.WROWN in layers
            if not model_problems(layers, read_early):
                models.append(MemoryModel(layers, read_early))
    return models


def stack_may_swap(layers: Iterable[Layer], a: AccessEvent, b: AccessEvent) -> bool:
    """Swap predicate of a bare layer stack, without model validation."""
    return _stack_predicate(tuple(layers))(a, b)


def access_shapes(threads: int = 2, locations: tuple[str, ...] = ("x", "y")) -> list[AccessEvent]:
    """One read and one write per (thread, location); enough to probe a predicate."""
    shapes: list[AccessEvent] = []
    for tid in range(threads):
        for loc in locations:
            shapes.append(ReadAccess(tid, loc, len(shapes)))
            shapes.append(WriteAccess(tid, loc, 1, len(shapes)))
    return shapes


def is_cross_thread_open(model: MemoryModel) -> bool:
    """True if accesses of different threads may always overtake each other.

    The explorer relies on this to enqueue whole programs up front.
    """
    shapes = access_shapes()
    return all(
        model.may_swap(a, b) for a in shapes for b in shapes if a.tid != b.tid
    )
