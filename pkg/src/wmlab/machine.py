"""Operational memory machine.

The machine holds a queue of pending accesses. Each step picks one queue
position that the memory model allows to run ahead of everything queued
before it, executes it against memory and removes it from the queue.

All operations are pure: they take a :class:`MachineState` and return a new
one, so the explorer can branch by simply keeping references to old states.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import TYPE_CHECKING, Mapping, Optional, Sequence, Union

if TYPE_CHECKING:
    from .relaxation import MemoryModel

ThreadId = int
LocationId = str
Value = int
AccessId = int


class MachineError(Exception):
    """Base class for errors raised by the machine."""


class MissingLocation(MachineError, KeyError):
    """A read hit a location that was never initialized."""

    def __str__(self) -> str:
        return f"location {self.args[0]} not initialized"


class IllegalSchedule(MachineError):
    """execute_at was asked to run a position the model does not allow."""


@dataclass(frozen=True, slots=True)
class WriteAccess:
    tid: ThreadId
    loc: LocationId
    value: Value
    id: AccessId

    def __str__(self) -> str:
        return f"W(T{self.tid},{self.loc},{self.value},#{self.id})"


@dataclass(frozen=True, slots=True)
class ReadAccess:
    tid: ThreadId
    loc: LocationId
    id: AccessId

    def __str__(self) -> str:
        return f"R(T{self.tid},{self.loc},#{self.id})"


AccessEvent = Union[WriteAccess, ReadAccess]


def _frozen(mapping: Mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True)
class MachineState:
    queue: tuple[AccessEvent, ...] = ()
    counter: int = 0
    memory: Mapping[LocationId, Value] = field(default_factory=dict)
    read_results: Mapping[AccessId, Value] = field(default_factory=dict)
    executed_ids: frozenset[AccessId] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "queue", tuple(self.queue))
        object.__setattr__(self, "memory", _frozen(self.memory))
        object.__setattr__(self, "read_results", _frozen(self.read_results))
        object.__setattr__(self, "executed_ids", frozenset(self.executed_ids))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MachineState):
            return NotImplemented
        return (
            self.queue == other.queue
            and self.counter == other.counter
            and dict(self.memory) == dict(other.memory)
            and dict(self.read_results) == dict(other.read_results)
            and self.executed_ids == other.executed_ids
        )

    __hash__ = None  # type: ignore[assignment]


class ViolationKind(enum.Enum):
    DUPLICATE_ID = "DuplicateId"
    ID_GE_COUNTER = "IdGeCounter"
    EXECUTED_IN_QUEUE = "ExecutedInQueue"
    RESULT_WITHOUT_EXECUTION = "ResultWithoutExecution"
    # Raised by the explorer, never by check_invariants.
    HEAD_BLOCKED = "HeadBlocked"
    WRONG_DEPTH = "WrongDepth"


@dataclass(frozen=True)
class InvariantViolation:
    kind: ViolationKind
    detail: str

    def __str__(self) -> str:
        return f"{self.kind.value}: {self.detail}"


def new_machine(initial_memory: Mapping[LocationId, Value]) -> MachineState:
    return MachineState(memory=initial_memory)


def _enqueue(state: MachineState, access: AccessEvent) -> MachineState:
    return replace(state, queue=state.queue + (access,), counter=state.counter + 1)


def enqueue_write(
    state: MachineState, tid: ThreadId, loc: LocationId, val: Value
) -> tuple[MachineState, AccessId]:
    """Append a write to the right end of the queue; returns the fresh id."""
    aid = state.counter
    return _enqueue(state, WriteAccess(tid, loc, val, aid)), aid


def enqueue_read(
    state: MachineState, tid: ThreadId, loc: LocationId
) -> tuple[MachineState, AccessId]:
    aid = state.counter
    return _enqueue(state, ReadAccess(tid, loc, aid)), aid


def allowed_positions(state: MachineState, model: MemoryModel) -> list[int]:
    """Queue indices whose access may overtake every access queued before it.

    The head (index 0) is always included for a non-empty queue.
    """
    queue = state.queue
    swap = model.may_swap
    return [
        i
        for i, later in enumerate(queue)
        if all(swap(earlier, later) for earlier in queue[:i])
    ]


def latest_pending_write(
    queue_prefix: Sequence[AccessEvent], tid: ThreadId, loc: LocationId
) -> Optional[Value]:
    for access in reversed(queue_prefix):
        if isinstance(access, WriteAccess) and access.tid == tid and access.loc == loc:
            return access.value
    return None


def value_for_read(
    state: MachineState,
    model: MemoryModel,
    tid: ThreadId,
    loc: LocationId,
    pos: int,
) -> Value:
    """Value observed by the read at queue position ``pos``.

    With read-early enabled, the newest own write to ``loc`` still sitting
    in the queue ahead of ``pos`` is forwarded; otherwise memory is read.
    """
    if model.read_early:
        forwarded = latest_pending_write(state.queue[:pos], tid, loc)
        if forwarded is not None:
            return forwarded
    try:
        return state.memory[loc]
    except KeyError:
        raise MissingLocation(loc) from None


def execute_at(state: MachineState, model: MemoryModel, pos: int) -> MachineState:
    if pos not in allowed_positions(state, model):
        raise IllegalSchedule(
            f"position {pos} not schedulable; allowed {allowed_positions(state, model)}"
        )
    access = state.queue[pos]
    queue = state.queue[:pos] + state.queue[pos + 1 :]
    executed = state.executed_ids | {access.id}
    if isinstance(access, WriteAccess):
        memory = dict(state.memory)
        memory[access.loc] = access.value
        return replace(state, queue=queue, memory=memory, executed_ids=executed)
    value = value_for_read(state, model, access.tid, access.loc, pos)
    results = dict(state.read_results)
    results[access.id] = value
    return replace(state, queue=queue, read_results=results, executed_ids=executed)


def is_quiescent(state: MachineState) -> bool:
    return not state.queue


def check_invariants(state: MachineState) -> list[InvariantViolation]:
    """One violation record per broken state invariant (empty when healthy)."""
    violations = []
    ids = [access.id for access in state.queue]

    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        violations.append(
            InvariantViolation(ViolationKind.DUPLICATE_ID, f"ids {dupes} queued twice")
        )
    too_big = sorted(i for i in ids if i >= state.counter)
    if too_big:
        violations.append(
            InvariantViolation(
                ViolationKind.ID_GE_COUNTER,
                f"ids {too_big} not below counter {state.counter}",
            )
        )
    stale = sorted(set(ids) & state.executed_ids)
    if stale:
        violations.append(
            InvariantViolation(
                ViolationKind.EXECUTED_IN_QUEUE, f"executed ids {stale} still queued"
            )
        )
    orphans = sorted(set(state.read_results) - state.executed_ids)
    if orphans:
        violations.append(
            InvariantViolation(
                ViolationKind.RESULT_WITHOUT_EXECUTION,
                f"read results for unexecuted ids {orphans}",
            )
        )
    return violations
