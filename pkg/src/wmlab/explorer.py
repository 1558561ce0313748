"""Exhaustive state-space exploration of litmus tests.

:func:`explore` loads every instruction of a test into the machine queue up
front (thread 0 first, in program order) and then branches over every
allowed queue position until the queue drains. This is sound because every
model built from the defined layers lets accesses of different threads
overtake each other freely, so the cross-thread enqueue order is irrelevant.

:func:`interleaving_oracle` is a separate, queue-free reference semantics for
sequential consistency used to cross-check the machine.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import machine
from .litmus import (
    Assertion,
    AssertionKind,
    Atom,
    LitmusTest,
    RegEquals,
    RegisterId,
    WriteInstr,
)
from .machine import (
    AccessId,
    InvariantViolation,
    LocationId,
    MachineState,
    ThreadId,
    Value,
    ViolationKind,
)
from .relaxation import MemoryModel, is_cross_thread_open

RegisterKey = tuple[ThreadId, RegisterId]
RegisterFile = dict[RegisterKey, Value]
PendingBinding = dict[AccessId, RegisterKey]


class ExplorerError(Exception):
    pass


@dataclass(frozen=True, order=True)
class Outcome:
    """A final state. Both fields are sorted tuples so outcomes order canonically."""

    registers: tuple[tuple[RegisterKey, Value], ...]
    memory: tuple[tuple[LocationId, Value], ...]

    @classmethod
    def make(cls, registers: Mapping[RegisterKey, Value], memory: Mapping[LocationId, Value]) -> Outcome:
        return cls(tuple(sorted(registers.items())), tuple(sorted(memory.items())))

    def register(self, tid: ThreadId, reg: RegisterId) -> Value:
        return dict(self.registers)[(tid, reg)]

    def satisfies(self, clause: Iterable[Atom]) -> bool:
        regs = dict(self.registers)
        mem = dict(self.memory)
        for atom in clause:
            if isinstance(atom, RegEquals):
                if regs.get((atom.tid, atom.reg)) != atom.val:
                    return False
            elif mem.get(atom.loc) != atom.val:
                return False
        return True

    def describe(self, test: Optional[LitmusTest] = None) -> str:
        def thread(tid: ThreadId) -> str:
            return test.thread_name(tid) if test else f"T{tid}"

        parts = [f"{thread(tid)}:{reg}={val}" for (tid, reg), val in self.registers]
        parts += [f"{loc}={val}" for loc, val in self.memory]
        return " ".join(parts)


OutcomeSet = tuple[Outcome, ...]


def canonical(outcomes: Iterable[Outcome]) -> OutcomeSet:
    return tuple(sorted(set(outcomes)))


@dataclass(frozen=True)
class Exhaustive:
    pass


@dataclass(frozen=True)
class RandomWalk:
    seed: int
    samples: int


@dataclass(frozen=True)
class ExploreConfig:
    max_states: int = 1_000_000
    dedup: bool = True
    mode: Union[Exhaustive, RandomWalk] = Exhaustive()

    def __post_init__(self) -> None:
        if self.max_states <= 0:
            raise ValueError("max_states must be positive")


@dataclass
class ExploreReport:
    outcomes: OutcomeSet
    states_visited: int = 0
    dedup_hits: int = 0
    limit_exhausted: bool = False
    invariant_violations: list[InvariantViolation] = field(default_factory=list)
    exhaustive: bool = True

    @property
    def complete(self) -> bool:
        """True when ``outcomes`` is known to be the full reachable set."""
        return self.exhaustive and not self.limit_exhausted


def initial_state(test: LitmusTest) -> tuple[MachineState, RegisterFile, PendingBinding]:
    return enqueue_program(test, [t.tid for t in test.threads for _ in t.body])


def enqueue_program(
    test: LitmusTest, order: Sequence[ThreadId]
) -> tuple[MachineState, RegisterFile, PendingBinding]:
    """Load the test into a fresh machine, taking the next instruction of
    ``order[k]`` at step ``k``. ``order`` must name each thread exactly as
    many times as it has instructions."""
    state = machine.new_machine(test.init)
    registers: RegisterFile = {}
    binding: PendingBinding = {}
    for thread in test.threads:
        for reg in thread.registers():
            registers[(thread.tid, reg)] = 0
    pcs = [0] * len(test.threads)
    for tid in order:
        instr = test.threads[tid].body[pcs[tid]]
        pcs[tid] += 1
        if isinstance(instr, WriteInstr):
            state, _ = machine.enqueue_write(state, tid, instr.loc, instr.val)
        else:
            state, aid = machine.enqueue_read(state, tid, instr.loc)
            binding[aid] = (tid, instr.dst)
    if any(pc != len(t.body) for pc, t in zip(pcs, test.threads)):
        raise ExplorerError("enqueue order does not cover every instruction exactly once")
    return state, registers, binding


def outcome_of(state: MachineState, registers: RegisterFile, binding: PendingBinding) -> Outcome:
    regs = dict(registers)
    for aid, key in binding.items():
        regs[key] = state.read_results[aid]
    return Outcome.make(regs, state.memory)


def _dedup_key(state: MachineState) -> tuple:
    return (
        state.executed_ids,
        frozenset(state.memory.items()),
        frozenset(state.read_results.items()),
    )


def _check_state(state: MachineState, allowed: list[int], depth: int, total: int) -> list[InvariantViolation]:
    found = machine.check_invariants(state)
    if state.queue and (not allowed or allowed[0] != 0):
        found.append(
            InvariantViolation(ViolationKind.HEAD_BLOCKED, f"queue head not schedulable at depth {depth}")
        )
    if machine.is_quiescent(state) and depth != total:
        found.append(
            InvariantViolation(ViolationKind.WRONG_DEPTH, f"queue drained after {depth} steps, expected {total}")
        )
    return found


def explore(
    test: LitmusTest,
    model: MemoryModel,
    config: ExploreConfig = ExploreConfig(),
    order: Optional[Sequence[ThreadId]] = None,
) -> ExploreReport:
    """Enumerate every final state reachable under ``model``.

    ``order`` optionally replaces the default thread-by-thread enqueue
    order (see :func:`enqueue_program`); the outcome set must not depend
    on it.
    """
    if not is_cross_thread_open(model):
        raise ExplorerError(f"model {model} restricts cross-thread reordering; up-front enqueue is unsound")
    if isinstance(config.mode, RandomWalk):
        return _random_report(test, model, config)

    if order is None:
        start, registers, binding = initial_state(test)
    else:
        start, registers, binding = enqueue_program(test, order)
    total = test.instruction_count
    outcomes: set[Outcome] = set()
    violations: list[InvariantViolation] = []
    seen: set = set()
    visited = hits = 0
    stack = [(start, 0)]
    exhausted = False

    while stack:
        state, depth = stack.pop()
        if config.dedup:
            key = _dedup_key(state)
            if key in seen:
                hits += 1
                continue
            seen.add(key)
        if visited >= config.max_states:
            exhausted = True
            break
        visited += 1
        allowed = machine.allowed_positions(state, model)
        violations.extend(_check_state(state, allowed, depth, total))
        if machine.is_quiescent(state):
            outcomes.add(outcome_of(state, registers, binding))
            continue
        # Reversed so the lowest position is expanded first.
        for pos in reversed(allowed):
            stack.append((machine.execute_at(state, model, pos), depth + 1))

    return ExploreReport(
        outcomes=canonical(outcomes),
        states_visited=visited,
        dedup_hits=hits,
        limit_exhausted=exhausted,
        invariant_violations=violations,
    )


def _random_report(test: LitmusTest, model: MemoryModel, config: ExploreConfig) -> ExploreReport:
    mode = config.mode
    assert isinstance(mode, RandomWalk)
    outcomes, visited, exhausted, violations = _walk(test, model, mode.seed, mode.samples, config.max_states)
    return ExploreReport(
        outcomes=outcomes,
        states_visited=visited,
        limit_exhausted=exhausted,
        invariant_violations=violations,
        exhaustive=False,
    )


def _walk(test, model, seed, samples, max_states):
    rng = random.Random(seed)
    start, registers, binding = initial_state(test)
    total = test.instruction_count
    outcomes = set()
    violations: list[InvariantViolation] = []
    visited = 0
    for _ in range(samples):
        state, depth = start, 0
        while True:
            if visited >= max_states:
                return canonical(outcomes), visited, True, violations
            visited += 1
            allowed = machine.allowed_positions(state, model)
            violations.extend(_check_state(state, allowed, depth, total))
            if machine.is_quiescent(state):
                break
            state = machine.execute_at(state, model, rng.choice(allowed))
            depth += 1
        outcomes.add(outcome_of(state, registers, binding))
    return canonical(outcomes), visited, False, violations


def random_walk(test: LitmusTest, model: MemoryModel, seed: int, samples: int) -> OutcomeSet:
    """Outcomes of ``samples`` uniformly random complete schedules."""
    if samples < 0:
        raise ValueError("samples must be non-negative")
    return _walk(test, model, seed, samples, float("inf"))[0]


def interleaving_oracle(test: LitmusTest) -> OutcomeSet:
    """All SC outcomes, by running thread programs directly against memory.

    Any thread with instructions left may take the next step, and each
    instruction is atomic. States already expanded are skipped, which keeps
    the enumeration small without changing the result.
    """
    threads = [t.body for t in test.threads]
    regs0 = tuple(sorted(((t.tid, r), 0) for t in test.threads for r in t.registers()))
    start = (tuple(0 for _ in threads), tuple(sorted(test.init.items())), regs0)
    outcomes = set()
    seen = set()
    todo = [start]
    while todo:
        node = todo.pop()
        if node in seen:
            continue
        seen.add(node)
        pcs, mem, regs = node
        moved = False
        for tid, body in enumerate(threads):
            if pcs[tid] == len(body):
                continue
            moved = True
            instr = body[pcs[tid]]
            memory = dict(mem)
            registers = dict(regs)
            if isinstance(instr, WriteInstr):
                memory[instr.loc] = instr.val
            else:
                registers[(tid, instr.dst)] = memory[instr.loc]
            next_pcs = pcs[:tid] + (pcs[tid] + 1,) + pcs[tid + 1 :]
            todo.append((next_pcs, tuple(sorted(memory.items())), tuple(sorted(registers.items()))))
        if not moved:
            outcomes.add(Outcome(regs, mem))
    return canonical(outcomes)


class Verdict(enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    UNKNOWN = "Unknown"


def evaluate_assertion(assertion: Assertion, outcomes: Iterable[Outcome], complete: bool = True) -> Verdict:
    hits = [o.satisfies(assertion.clause) for o in outcomes]
    if assertion.kind is AssertionKind.EXISTS:
        if any(hits):
            return Verdict.PASS
    elif assertion.kind is AssertionKind.FORBIDDEN:
        if any(hits):
            return Verdict.FAIL
    elif not all(hits):
        return Verdict.FAIL
    if not complete:
        return Verdict.UNKNOWN
    return Verdict.FAIL if assertion.kind is AssertionKind.EXISTS else Verdict.PASS


def evaluate_assertions(report: ExploreReport, test: LitmusTest) -> list[tuple[Assertion, Verdict]]:
    return [(a, evaluate_assertion(a, report.outcomes, report.complete)) for a in test.assertions]


@dataclass
class ComparisonRow:
    model: MemoryModel
    outcome_count: int
    witnesses: tuple[bool, ...]
    states_visited: int
    report: ExploreReport


def compare_models(
    test: LitmusTest, models: Sequence[MemoryModel], config: ExploreConfig = ExploreConfig()
) -> list[ComparisonRow]:
    rows = []
    for model in models:
        report = explore(test, model, config)
        witnesses = tuple(any(o.satisfies(a.clause) for o in report.outcomes) for a in test.assertions)
        rows.append(ComparisonRow(model, len(report.outcomes), witnesses, report.states_visited, report))
    return rows
