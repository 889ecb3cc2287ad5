"""Pulse-sequence representation, its text format, and experiment templates.

A :class:`PulseSequence` is an ordered tuple of :class:`Segment`. Each
segment carries ideal markers (applied instantaneously at its start) and a
set of continuous drives active for its duration.

Text format, one instruction per line, ``#`` starts a comment::

    name <text>                      sequence name (optional)
    bind <key> <value>               swept-parameter binding (optional)
    prep <spin> <state>              |0> |+1> |-1> |B> |D>
    rot <spin> <axis> <angle> [phase <rad>]
    dephase <spin> <m1> <m2>
    read <spin> <P0|P+1|P-1|PB|PD>
    wait <us>
    segment <us>
      drive <spin> <plus|minus> <rabi MHz> [det <MHz>] [phase <rad>]
    end

Rotation axes are ``x|y|z`` followed by a subspace: ``+`` (|0>,|+1>),
``-`` (|0>,|-1>), ``dq`` (|0>,|B>) or ``pm`` (|-1>,|+1>), e.g. ``x+``,
``ydq``, ``zpm``. Markers attach to the next ``wait``/``segment``; trailing
markers form a final zero-length segment.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Union

from .model import SPINS, TRANSITIONS, DriveSpec

__all__ = [
    "Dephase",
    "Prep",
    "PulseSequence",
    "Read",
    "Rot",
    "Segment",
    "SequenceParseError",
    "make_deer",
    "make_ramsey",
    "make_spinlock",
    "parse_sequence",
    "render_sequence",
]

STATES = ("0", "+1", "-1", "B", "D")
READOUTS = ("P0", "P+1", "P-1", "PB", "PD")
SUBSPACES = {"+": "plus", "-": "minus", "dq": "dq", "pm": "pm"}
HALF_PI = math.pi / 2


class SequenceParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        loc = f"line {line}, column {column}: " if line else ""
        super().__init__(loc + message)


def _norm_state(s: str) -> str:
    key = s.strip().strip("|").rstrip(">").rstrip("⟩")
    if key in ("1", "+1"):
        key = "+1"
    if key not in STATES:
        raise ValueError(f"unknown state {s!r}")
    return key


def _norm_m(s: str) -> str:
    key = _norm_state(s)
    if key not in ("0", "+1", "-1"):
        raise ValueError(f"dephase needs m in {{0, +1, -1}}, got {s!r}")
    return key


@dataclass(frozen=True)
class Prep:
    spin: str
    state: str

    def __post_init__(self):
        _check_spin(self.spin)
        object.__setattr__(self, "state", _norm_state(self.state))


@dataclass(frozen=True)
class Rot:
    """Ideal rotation exp(-i angle/2 * sigma) inside a two-level subspace."""

    spin: str
    axis: str
    angle: float
    phase: float = 0.0

    def __post_init__(self):
        _check_spin(self.spin)
        self.components()

    def components(self) -> tuple[str, str]:
        """(``x``/``y``/``z``, subspace name)."""
        a = self.axis
        if len(a) < 2 or a[0] not in "xyz" or a[1:] not in SUBSPACES:
            raise ValueError(f"unknown rotation axis {a!r}")
        return a[0], SUBSPACES[a[1:]]


@dataclass(frozen=True)
class Dephase:
    spin: str
    m1: str
    m2: str

    def __post_init__(self):
        _check_spin(self.spin)
        object.__setattr__(self, "m1", _norm_m(self.m1))
        object.__setattr__(self, "m2", _norm_m(self.m2))
        if self.m1 == self.m2:
            raise ValueError("dephase needs two distinct levels")


@dataclass(frozen=True)
class Read:
    spin: str
    projector: str

    def __post_init__(self):
        _check_spin(self.spin)
        if self.projector not in READOUTS:
            raise ValueError(f"unknown readout projector {self.projector!r}")


Marker = Union[Prep, Rot, Dephase, Read]


def _check_spin(spin: str) -> None:
    if spin not in SPINS:
        raise ValueError(f"unknown spin {spin!r}")


@dataclass(frozen=True)
class Segment:
    duration: float
    drives: tuple[DriveSpec, ...] = ()
    markers: tuple[Marker, ...] = ()

    def __post_init__(self):
        if not (self.duration >= 0 and math.isfinite(self.duration)):
            raise ValueError(f"segment duration must be finite and >= 0, got {self.duration}")
        object.__setattr__(self, "drives", tuple(self.drives))
        object.__setattr__(self, "markers", tuple(self.markers))


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple[Segment, ...]
    name: str = ""
    bindings: tuple[tuple[str, float], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "bindings", tuple((str(k), float(v)) for k, v in self.bindings))

    @property
    def duration(self) -> float:
        total = 0.0
        for seg in self.segments:
            total += seg.duration
        return total

    @property
    def readouts(self) -> list[Read]:
        return [m for s in self.segments for m in s.markers if isinstance(m, Read)]

    @property
    def readout(self) -> Read:
        reads = self.readouts
        if len(reads) != 1:
            raise ValueError(f"sequence must have exactly one readout, found {len(reads)}")
        return reads[0]

    def validate(self) -> "PulseSequence":
        self.readout
        if not math.isfinite(self.duration):
            raise ValueError("sequence duration must be finite")
        return self

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.segments + other.segments, self.name, self.bindings + other.bindings)


# ---------------------------------------------------------------- text format


def _fmt(x: float) -> str:
    return repr(float(x))


def _state_token(s: str) -> str:
    return f"|{s}>"


def _render_marker(m: Marker) -> str:
    if isinstance(m, Prep):
        return f"prep {m.spin} {_state_token(m.state)}"
    if isinstance(m, Rot):
        line = f"rot {m.spin} {m.axis} {_fmt(m.angle)}"
        return line + (f" phase {_fmt(m.phase)}" if m.phase != 0.0 else "")
    if isinstance(m, Dephase):
        return f"dephase {m.spin} {m.m1} {m.m2}"
    if isinstance(m, Read):
        return f"read {m.spin} {m.projector}"
    raise TypeError(f"not a marker: {m!r}")


def _render_drive(d: DriveSpec) -> str:
    line = f"  drive {d.spin} {d.transition} {_fmt(d.rabi)}"
    if d.detuning != 0.0:
        line += f" det {_fmt(d.detuning)}"
    if d.phase != 0.0:
        line += f" phase {_fmt(d.phase)}"
    return line


def render_sequence(seq: PulseSequence) -> str:
    lines = []
    if seq.name:
        lines.append(f"name {seq.name}")
    for k, v in seq.bindings:
        lines.append(f"bind {k} {_fmt(v)}")
    last = len(seq.segments) - 1
    for i, seg in enumerate(seq.segments):
        lines.extend(_render_marker(m) for m in seg.markers)
        if seg.drives:
            lines.append(f"segment {_fmt(seg.duration)}")
            lines.extend(_render_drive(d) for d in seg.drives)
            lines.append("end")
        elif seg.duration != 0.0 or i != last or not seg.markers:
            lines.append(f"wait {_fmt(seg.duration)}")
    return "\n".join(lines) + "\n"


def _tokens(line: str) -> list[tuple[str, int]]:
    out, i, n = [], 0, len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.segments: list[Segment] = []
        self.pending: list[Marker] = []
        self.name = ""
        self.bindings: list[tuple[str, float]] = []
        self.block: tuple[float, list[DriveSpec], int] | None = None

    def error(self, msg, lineno, col=1):
        raise SequenceParseError(msg, lineno, col)

    def number(self, tok, lineno, what="number"):
        text, col = tok
        try:
            v = float(text)
        except ValueError:
            self.error(f"expected {what}, got {text!r}", lineno, col)
        if not math.isfinite(v):
            self.error(f"{what} must be finite", lineno, col)
        return v

    def duration(self, toks, lineno):
        if len(toks) != 2:
            self.error(f"'{toks[0][0]}' takes exactly one duration", lineno, toks[0][1])
        d = self.number(toks[1], lineno, "duration")
        if d < 0:
            self.error(f"negative duration {d}", lineno, toks[1][1])
        return d

    def spin(self, tok, lineno):
        if tok[0] not in SPINS:
            self.error(f"unknown spin {tok[0]!r}", lineno, tok[1])
        return tok[0]

    def need(self, toks, n, lineno, usage):
        if len(toks) < n:
            col = toks[-1][1] + len(toks[-1][0]) if toks else 1
            self.error(f"missing arguments; usage: {usage}", lineno, col)

    def options(self, toks, lineno, allowed):
        opts = {}
        i = 0
        while i < len(toks):
            key, col = toks[i]
            if key not in allowed:
                self.error(f"unexpected token {key!r}", lineno, col)
            if i + 1 >= len(toks):
                self.error(f"'{key}' needs a value", lineno, col)
            opts[key] = self.number(toks[i + 1], lineno, key)
            i += 2
        return opts

    def parse(self) -> PulseSequence:
        for lineno, raw in enumerate(self.lines, start=1):
            line = raw.split("#", 1)[0]
            toks = _tokens(line)
            if toks:
                self.statement(toks, lineno)
        if self.block is not None:
            self.error("unterminated 'segment' block", self.block[2], 1)
        if self.pending:
            self.segments.append(Segment(0.0, (), tuple(self.pending)))
        seq = PulseSequence(tuple(self.segments), self.name, tuple(self.bindings))
        n = len(seq.readouts)
        if n == 0:
            raise SequenceParseError("no readout", len(self.lines) + 1, 1)
        if n > 1:
            raise SequenceParseError("more than one readout", len(self.lines), 1)
        return seq

    def statement(self, toks, lineno):
        op, col = toks[0]
        if self.block is not None:
            if op == "drive":
                self.block[1].append(self.drive(toks, lineno))
            elif op == "end":
                if len(toks) != 1:
                    self.error("'end' takes no arguments", lineno, toks[1][1])
                dur, drives, _ = self.block
                self.segments.append(Segment(dur, tuple(drives), tuple(self.pending)))
                self.pending, self.block = [], None
            else:
                self.error(f"'{op}' not allowed inside a segment block", lineno, col)
            return
        if op == "name":
            self.name = " ".join(t for t, _ in toks[1:])
        elif op == "bind":
            self.need(toks, 3, lineno, "bind <key> <value>")
            self.bindings.append((toks[1][0], self.number(toks[2], lineno)))
        elif op == "prep":
            self.need(toks, 3, lineno, "prep <spin> <state>")
            spin = self.spin(toks[1], lineno)
            try:
                self.pending.append(Prep(spin, toks[2][0]))
            except ValueError as exc:
                self.error(str(exc), lineno, toks[2][1])
        elif op == "rot":
            self.need(toks, 4, lineno, "rot <spin> <axis> <angle> [phase <rad>]")
            spin = self.spin(toks[1], lineno)
            angle = self.number(toks[3], lineno, "angle")
            opts = self.options(toks[4:], lineno, ("phase",))
            try:
                self.pending.append(Rot(spin, toks[2][0], angle, opts.get("phase", 0.0)))
            except ValueError as exc:
                self.error(str(exc), lineno, toks[2][1])
        elif op == "dephase":
            self.need(toks, 4, lineno, "dephase <spin> <m1> <m2>")
            spin = self.spin(toks[1], lineno)
            try:
                self.pending.append(Dephase(spin, toks[2][0], toks[3][0]))
            except ValueError as exc:
                self.error(str(exc), lineno, toks[2][1])
        elif op == "read":
            self.need(toks, 3, lineno, "read <spin> <projector>")
            spin = self.spin(toks[1], lineno)
            if toks[2][0] not in READOUTS:
                self.error(f"unknown readout projector {toks[2][0]!r}", lineno, toks[2][1])
            self.pending.append(Read(spin, toks[2][0]))
        elif op == "wait":
            d = self.duration(toks, lineno)
            self.segments.append(Segment(d, (), tuple(self.pending)))
            self.pending = []
        elif op == "segment":
            self.block = (self.duration(toks, lineno), [], lineno)
        elif op == "drive":
            self.error("'drive' only allowed inside a segment block", lineno, col)
        elif op == "end":
            self.error("'end' without 'segment'", lineno, col)
        else:
            self.error(f"unknown instruction {op!r}", lineno, col)

    def drive(self, toks, lineno):
        self.need(toks, 4, lineno, "drive <spin> <plus|minus> <rabi> [det <MHz>] [phase <rad>]")
        spin = self.spin(toks[1], lineno)
        if toks[2][0] not in TRANSITIONS:
            self.error(f"unknown transition {toks[2][0]!r}", lineno, toks[2][1])
        rabi = self.number(toks[3], lineno, "rabi frequency")
        if rabi < 0:
            self.error("rabi frequency must be >= 0", lineno, toks[3][1])
        opts = self.options(toks[4:], lineno, ("det", "phase"))
        return DriveSpec(spin, toks[2][0], rabi, opts.get("det", 0.0), opts.get("phase", 0.0))


def parse_sequence(text: str) -> PulseSequence:
    """Parse the line-oriented sequence format.

    Raises :class:`SequenceParseError` with 1-based line/column on failure.
    """
    return _Parser(text).parse()


# ------------------------------------------------------------------ templates


def _basis(basis: str) -> str:
    b = basis.upper()
    if b not in ("SQ", "DQ"):
        raise ValueError(f"basis must be 'SQ' or 'DQ', got {basis!r}")
    return b


def _check_tau(tau: float) -> None:
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")


def _b_drives(omega_plus: float, omega_minus: float) -> tuple[DriveSpec, ...]:
    drives = []
    if omega_plus > 0:
        drives.append(DriveSpec("B", "plus", omega_plus))
    if omega_minus > 0:
        drives.append(DriveSpec("B", "minus", omega_minus))
    return tuple(drives)


def make_deer(basis: str, tau: float) -> PulseSequence:
    """Echo sequence on NV_A with NV_B flipped at the refocusing pulse.

    SQ: A in {|0>,|+1>}, B flipped |0> -> |+1>; signal oscillates at
    nu_dip/2. DQ: A starts in |B>, B flipped |-1> -> |+1>; signal at
    2*nu_dip. Readout is |0>_A in both cases.
    """
    b = _basis(basis)
    _check_tau(tau)
    half = tau / 2
    if b == "SQ":
        first = (Prep("A", "0"), Prep("B", "0"), Rot("A", "x+", HALF_PI))
        echo = (Rot("A", "x+", math.pi), Rot("B", "x+", math.pi))
        final = (Rot("A", "x+", HALF_PI), Read("A", "P0"))
    else:
        first = (Prep("A", "B"), Prep("B", "-1"))
        echo = (Rot("A", "xpm", math.pi), Rot("B", "xpm", math.pi))
        final = (Rot("A", "xdq", math.pi), Read("A", "P0"))
    segs = (Segment(half, (), first), Segment(half, (), echo), Segment(0.0, (), final))
    return PulseSequence(segs, f"deer-{b}", (("tau", tau),)).validate()


def make_ramsey(
    basis: str,
    prep_B: str | tuple[float, float],
    detuning: float,
    tau: float,
    nu_dip: float | None = None,
) -> PulseSequence:
    """Ramsey on NV_A with NV_B static in a level or continuously driven.

    ``prep_B`` is a state name (``0``, ``+1``, ``-1``) or a drive pair
    ``(omega_plus, omega_minus)`` applied to B (starting from |0>) for the
    whole free evolution. ``detuning`` is a software reference offset (MHz)
    realised as a phase advance ``2*pi*detuning*tau`` before readout, so the
    spectrum peak sits at ``detuning + shift``.
    """
    b = _basis(basis)
    _check_tau(tau)
    if isinstance(prep_B, str):
        b_state, drives = _norm_state(prep_B), ()
    else:
        op, om = (float(x) for x in prep_B)
        if op < 0 or om < 0:
            raise ValueError("drive amplitudes must be >= 0")
        b_state, drives = "0", _b_drives(op, om)
        if nu_dip is not None and drives and max(op, om) <= abs(nu_dip):
            warnings.warn(
                "drive amplitudes do not exceed nu_dip; effective-coupling law not expected to hold",
                stacklevel=2,
            )
    ref = 2 * math.pi * detuning * tau
    if b == "SQ":
        first = (Prep("A", "0"), Prep("B", b_state), Rot("A", "x+", HALF_PI))
        final = (Rot("A", "z+", ref), Rot("A", "x+", -HALF_PI), Read("A", "P0"))
    else:
        first = (Prep("A", "B"), Prep("B", b_state))
        final = (Rot("A", "zpm", ref), Rot("A", "xdq", math.pi), Read("A", "P0"))
    segs = (Segment(tau, drives, first), Segment(0.0, (), final))
    return PulseSequence(segs, f"ramsey-{b}", (("tau", tau), ("detuning", detuning))).validate()


def make_spinlock(
    omega_A: float,
    drive_B: tuple[float, float],
    tau: float,
    crosstalk_detuning: float | None = None,
) -> PulseSequence:
    """Spin-lock of NV_A along y while NV_B is dephased and dressed.

    B: pi/2 then full dephasing in {|0>,|+1>}, then drive ``drive_B`` for
    ``tau``. A: pi/2 about x, lock drive with phase pi/2 for ``tau``, pi/2
    back, |0> readout. With ``crosstalk_detuning`` A's lock field also acts
    on B's |0>-|+1> line at that detuning.
    """
    _check_tau(tau)
    if not omega_A > 0:
        raise ValueError("omega_A must be > 0")
    op, om = (float(x) for x in drive_B)
    drives = (DriveSpec("A", "plus", omega_A, 0.0, HALF_PI),) + _b_drives(op, om)
    if crosstalk_detuning is not None:
        drives += (DriveSpec("B", "plus", omega_A, crosstalk_detuning, HALF_PI),)
    first = (
        Prep("A", "0"),
        Prep("B", "0"),
        Rot("B", "x+", HALF_PI),
        Dephase("B", "0", "+1"),
        Rot("A", "x+", HALF_PI),
    )
    final = (Rot("A", "x+", -HALF_PI), Read("A", "P0"))
    segs = (Segment(tau, drives, first), Segment(0.0, (), final))
    return PulseSequence(segs, "spinlock", (("tau", tau), ("omega_A", omega_A))).validate()


def iter_markers(seq: PulseSequence | Iterable[Segment]):
    segs = seq.segments if isinstance(seq, PulseSequence) else seq
    for s in segs:
        yield from s.markers
