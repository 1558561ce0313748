"""Litmus tests: straight-line thread programs plus final-state assertions.

Text format, one statement per line, ``#`` starts a comment::

    name SB
    init v=0 w=0
    thread T0:
      write v 1
      read w -> r1
    thread T1:
      write w 1
      read v -> r2
    exists T0:r1=0 /\\ T1:r2=0

Threads get ids 0, 1, ... in order of appearance and are referred to by
name inside assertions. Registers are single-assignment and start at 0.
Every location used anywhere must be given an initial value.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .machine import LocationId, ThreadId, Value

RegisterId = str

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_INT = r"[+-]?[0-9]{1,4000}"
_IDENT_RE = re.compile(rf"{_IDENT}\Z")


@dataclass(frozen=True)
class WriteInstr:
    loc: LocationId
    val: Value

    def __str__(self) -> str:
        return f"write {self.loc} {self.val}"


@dataclass(frozen=True)
class ReadInstr:
    loc: LocationId
    dst: RegisterId

    def __str__(self) -> str:
        return f"read {self.loc} -> {self.dst}"


Instruction = Union[WriteInstr, ReadInstr]


@dataclass(frozen=True)
class ThreadProgram:
    tid: ThreadId
    body: tuple[Instruction, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "body", tuple(self.body))
        if not self.name:
            object.__setattr__(self, "name", f"T{self.tid}")

    def registers(self) -> list[RegisterId]:
        return [instr.dst for instr in self.body if isinstance(instr, ReadInstr)]


@dataclass(frozen=True)
class RegEquals:
    tid: ThreadId
    reg: RegisterId
    val: Value


@dataclass(frozen=True)
class MemEquals:
    loc: LocationId
    val: Value


Atom = Union[RegEquals, MemEquals]


class AssertionKind(enum.Enum):
    EXISTS = "exists"
    FORBIDDEN = "forbidden"
    ALWAYS = "always"


@dataclass(frozen=True)
class Assertion:
    kind: AssertionKind
    clause: tuple[Atom, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "clause", tuple(self.clause))


@dataclass(frozen=True)
class LitmusTest:
    name: str
    init: Mapping[LocationId, Value] = field(default_factory=dict)
    threads: tuple[ThreadProgram, ...] = ()
    assertions: tuple[Assertion, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "init", dict(self.init))
        object.__setattr__(self, "threads", tuple(self.threads))
        object.__setattr__(self, "assertions", tuple(self.assertions))

    @property
    def instruction_count(self) -> int:
        return sum(len(t.body) for t in self.threads)

    def thread_name(self, tid: ThreadId) -> str:
        return self.threads[tid].name

    def describe_atom(self, atom: Atom) -> str:
        if isinstance(atom, RegEquals):
            return f"{self.thread_name(atom.tid)}:{atom.reg}={atom.val}"
        return f"{atom.loc}={atom.val}"

    def describe_clause(self, clause: Sequence[Atom]) -> str:
        return r" /\ ".join(self.describe_atom(atom) for atom in clause)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationError:
    kind: str
    message: str

    def __str__(self) -> str:
        return self.message


def validate(test: LitmusTest) -> list[ValidationError]:
    errors = []

    def err(kind: str, message: str) -> None:
        errors.append(ValidationError(kind, message))

    if not _IDENT_RE.match(test.name or ""):
        err("BadIdentifier", f"test name {test.name!r} is not an identifier")
    for loc in test.init:
        if not _IDENT_RE.match(loc):
            err("BadIdentifier", f"location name {loc!r} is not an identifier")

    seen_names = set()
    for index, thread in enumerate(test.threads):
        if thread.tid != index:
            err("BadThreadId", f"thread {thread.name} has id {thread.tid}, expected {index}")
        if not _IDENT_RE.match(thread.name):
            err("BadIdentifier", f"thread name {thread.name!r} is not an identifier")
        if thread.name in seen_names:
            err("DuplicateThread", f"thread {thread.name} declared twice")
        seen_names.add(thread.name)
        regs = set()
        for instr in thread.body:
            if instr.loc not in test.init:
                err("UninitializedLocation", f"location {instr.loc} not initialized")
            if isinstance(instr, ReadInstr):
                if not _IDENT_RE.match(instr.dst):
                    err("BadIdentifier", f"register name {instr.dst!r} is not an identifier")
                if instr.dst in regs:
                    err(
                        "DuplicateRegister",
                        f"register {instr.dst} assigned twice in thread {thread.name}",
                    )
                regs.add(instr.dst)

    for assertion in test.assertions:
        if not assertion.clause:
            err("EmptyClause", f"{assertion.kind.value} assertion has no atoms")
        for atom in assertion.clause:
            if isinstance(atom, MemEquals):
                if atom.loc not in test.init:
                    err("UninitializedLocation", f"location {atom.loc} not initialized")
            elif not 0 <= atom.tid < len(test.threads):
                err("UnknownThread", f"assertion refers to unknown thread id {atom.tid}")
            elif atom.reg not in test.threads[atom.tid].registers():
                err(
                    "UnknownRegister",
                    f"register {atom.reg} of thread {test.threads[atom.tid].name} never assigned",
                )
    return errors


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class LitmusSyntaxError(ValueError):
    """Raised by :func:`parse_litmus`; ``errors`` holds every problem found."""

    def __init__(self, errors: Sequence[ParseError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


_NAME_RE = re.compile(rf"name\s+({_IDENT})\Z")
_INIT_ITEM_RE = re.compile(rf"\s*({_IDENT})\s*=\s*({_INT})(?=\s|\Z)")
_THREAD_RE = re.compile(rf"thread\s+({_IDENT})\s*:\Z")
_WRITE_RE = re.compile(rf"write\s+({_IDENT})\s+({_INT})\Z")
_READ_RE = re.compile(rf"read\s+({_IDENT})\s*->\s*({_IDENT})\Z")
_ASSERT_RE = re.compile(r"(exists|forbidden|always)(?:\s+(.*))?\Z", re.S)
_ATOM_RE = re.compile(rf"(?:({_IDENT})\s*:\s*)?({_IDENT})\s*=\s*({_INT})\Z")


@dataclass
class _PendingAtom:
    thread: Optional[str]
    name: str
    val: int
    line: int
    column: int


def parse_litmus(text: Union[str, bytes]) -> LitmusTest:
    """Parse litmus source; raises :class:`LitmusSyntaxError` on bad input."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LitmusSyntaxError([ParseError(1, exc.start + 1, "input is not valid UTF-8")])

    errors: list[ParseError] = []
    name: Optional[str] = None
    init: dict[str, int] = {}
    init_lines: dict[str, int] = {}
    threads: list[tuple[str, list[tuple[Instruction, int, int]]]] = []
    raw_assertions: list[tuple[AssertionKind, list[_PendingAtom]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        col = len(line) - len(stripped) + 1

        def error(message: str, column: int = col) -> None:
            errors.append(ParseError(lineno, column, message))

        keyword = stripped.split(None, 1)[0]
        if keyword == "name":
            m = _NAME_RE.match(stripped)
            if not m:
                error("expected 'name <identifier>'")
            elif name is not None:
                error("duplicate name declaration")
            else:
                name = m.group(1)
        elif keyword == "init":
            rest = stripped[4:]
            pos = 0
            while rest[pos:].strip():
                m = _INIT_ITEM_RE.match(rest, pos)
                if not m:
                    bad = len(rest[pos:]) - len(rest[pos:].lstrip())
                    error("expected '<location>=<integer>'", col + 4 + pos + bad)
                    break
                loc, val = m.group(1), int(m.group(2))
                if loc in init:
                    error(f"location {loc} initialized twice", col + 4 + m.start(1))
                else:
                    init[loc] = val
                    init_lines[loc] = lineno
                pos = m.end()
        elif keyword == "thread":
            m = _THREAD_RE.match(stripped)
            if not m:
                error("expected 'thread <identifier>:'")
            else:
                tname = m.group(1)
                if any(existing == tname for existing, _ in threads):
                    error(f"thread {tname} declared twice")
                threads.append((tname, []))
        elif keyword in ("write", "read"):
            m = (_WRITE_RE if keyword == "write" else _READ_RE).match(stripped)
            if not m:
                form = "write <location> <integer>" if keyword == "write" else "read <location> -> <register>"
                error(f"expected '{form}'")
            elif not threads:
                error("instruction outside of a thread")
            else:
                instr: Instruction
                if keyword == "write":
                    instr = WriteInstr(m.group(1), int(m.group(2)))
                else:
                    instr = ReadInstr(m.group(1), m.group(2))
                threads[-1][1].append((instr, lineno, col))
        elif keyword in ("exists", "forbidden", "always"):
            m = _ASSERT_RE.match(stripped)
            body = (m.group(2) or "") if m else ""
            if not body.strip():
                error(f"{keyword} needs at least one atom")
                continue
            atoms = []
            offset = col + len(stripped) - len(body)
            for part in body.split("/\\"):
                atom_col = offset + len(part) - len(part.lstrip())
                am = _ATOM_RE.match(part.strip())
                if not am:
                    error("expected atom '<thread>:<register>=<integer>' or '<location>=<integer>'", atom_col)
                else:
                    atoms.append(_PendingAtom(am.group(1), am.group(2), int(am.group(3)), lineno, atom_col))
                offset += len(part) + 2
            raw_assertions.append((AssertionKind(keyword), atoms))
        else:
            error(f"unknown statement {keyword!r}")

    if name is None:
        errors.append(ParseError(1, 1, "missing 'name' declaration"))

    programs = []
    tids = {}
    for tid, (tname, body) in enumerate(threads):
        tids.setdefault(tname, tid)
        regs: set[str] = set()
        for instr, lineno, col in body:
            if instr.loc not in init:
                errors.append(ParseError(lineno, col, f"location {instr.loc} not initialized"))
            if isinstance(instr, ReadInstr):
                if instr.dst in regs:
                    errors.append(
                        ParseError(lineno, col, f"register {instr.dst} assigned twice in thread {tname}")
                    )
                regs.add(instr.dst)
        programs.append(ThreadProgram(tid, tuple(i for i, _, _ in body), tname))

    assertions = []
    for kind, pending in raw_assertions:
        clause: list[Atom] = []
        for atom in pending:
            if atom.thread is None:
                if atom.name not in init:
                    errors.append(ParseError(atom.line, atom.column, f"location {atom.name} not initialized"))
                clause.append(MemEquals(atom.name, atom.val))
            elif atom.thread not in tids:
                errors.append(ParseError(atom.line, atom.column, f"unknown thread {atom.thread}"))
            else:
                tid = tids[atom.thread]
                if atom.name not in programs[tid].registers():
                    errors.append(
                        ParseError(
                            atom.line,
                            atom.column,
                            f"register {atom.name} of thread {atom.thread} never assigned",
                        )
                    )
                clause.append(RegEquals(tid, atom.name, atom.val))
        assertions.append(Assertion(kind, tuple(clause)))

    if errors:
        raise LitmusSyntaxError(sorted(errors, key=lambda e: (e.line, e.column)))

    test = LitmusTest(name or "", init, tuple(programs), tuple(assertions))
    leftover = validate(test)
    if leftover:
        raise LitmusSyntaxError([ParseError(1, 1, str(e)) for e in leftover])
    return test


def load_litmus(path) -> LitmusTest:
    with open(path, "rb") as fh:
        return parse_litmus(fh.read())


# --------------------------------------------------------------------------
# formatting
# --------------------------------------------------------------------------


def format_litmus(test: LitmusTest) -> str:
    lines = [f"name {test.name}"]
    lines.append(" ".join(["init"] + [f"{loc}={val}" for loc, val in test.init.items()]))
    for thread in test.threads:
        lines.append(f"thread {thread.name}:")
        lines.extend(f"  {instr}" for instr in thread.body)
    for assertion in test.assertions:
        lines.append(f"{assertion.kind.value} {test.describe_clause(assertion.clause)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# generation
# --------------------------------------------------------------------------


def random_test(
    rng: random.Random,
    max_threads: int = 3,
    max_instructions: int = 2,
    locations: Sequence[LocationId] = ("x", "y"),
    values: Sequence[Value] = (1, 2),
    name: str = "random",
) -> LitmusTest:
    """A random valid test without assertions, for differential testing."""
    threads = []
    for tid in range(rng.randint(1, max_threads)):
        body: list[Instruction] = []
        for k in range(rng.randint(0, max_instructions)):
            loc = rng.choice(locations)
            if rng.random() < 0.5:
                body.append(WriteInstr(loc, rng.choice(values)))
            else:
                body.append(ReadInstr(loc, f"r{k}"))
        threads.append(ThreadProgram(tid, tuple(body)))
    return LitmusTest(name, {loc: 0 for loc in locations}, tuple(threads))
