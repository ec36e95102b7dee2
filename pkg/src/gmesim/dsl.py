"""Line-oriented pulse-program language.

Grammar (one statement per line, ``#`` starts a comment)::

    name <identifier>
    seed <integer>
    pulse <n>-<m> <axis> <angle> [phase <angle>]
    wait <duration> detuning <frequency>
    readout <element>

Angles take ``rad``, ``deg`` or multiples of pi (``pi/2``, ``3pi/4``, ``0.5*pi``);
a bare number is radians. Durations take ``ns``, ``us``, ``ms`` or ``s``.
Detunings take ``rad``/``krad``/``Mrad`` (angular, optionally ``/s``) or
``Hz``/``kHz``/``MHz`` (cyclic, multiplied by 2 pi).
"""
import math
import re
from dataclasses import dataclass, field

from .constants import DRIVEN_TRANSITIONS

AXES = ("+y", "-y", "+x", "-x")
ELEMENTS = ("P1", "P2", "P3", "P4") + tuple(
    f"{part}{n}{m}" for n, m in ((1, 3), (2, 3), (3, 4), (1, 4), (1, 2), (2, 4)) for part in ("Re", "Im")
)

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PI_RE = re.compile(rf"^(?P<k>{_NUM}|[+-])?\*?pi(?:/(?P<d>{_NUM}))?$")
_UNIT_RE = re.compile(rf"^(?P<v>{_NUM})(?P<u>[A-Za-zµμ/]*)$")

_ANGLE_UNITS = {"": 1.0, "rad": 1.0, "deg": math.pi / 180}
_TIME_UNITS = {"ns": 1e-9, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ms": 1e-3, "s": 1.0}
_FREQ_UNITS = {
    "rad": 1.0, "rad/s": 1.0,
    "krad": 1e3, "krad/s": 1e3,
    "Mrad": 1e6, "Mrad/s": 1e6,
    "Hz": 2 * math.pi, "kHz": 2e3 * math.pi, "MHz": 2e6 * math.pi,
}


class ParseError(ValueError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class PulseEvent:
    kind: str  # "pulse" | "wait" | "readout"
    transition: tuple = None
    axis: str = None
    angle: float = 0.0
    phase: float = 0.0
    tau: float = 0.0
    delta: float = 0.0
    element: str = None
    line: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.kind not in ("pulse", "wait", "readout"):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.kind == "pulse":
            tr = tuple(self.transition)
            if tr not in DRIVEN_TRANSITIONS:
                raise ValueError(f"transition {tr} is not driven")
            object.__setattr__(self, "transition", tr)
            if self.axis not in AXES:
                raise ValueError(f"axis must be one of {AXES}")
            if not 0.0 <= self.angle < 2 * math.pi:
                raise ValueError(f"pulse angle {self.angle} outside [0, 2pi)")
        elif self.kind == "wait" and self.tau < 0:
            raise ValueError("wait duration must be non-negative")
        elif self.kind == "readout" and self.element not in ELEMENTS:
            raise ValueError(f"unknown readout element {self.element!r}")


def pulse(n, m, axis, angle, phase=0.0):
    return PulseEvent("pulse", transition=(n, m), axis=axis, angle=float(angle), phase=float(phase))


def wait(tau, delta):
    return PulseEvent("wait", tau=float(tau), delta=float(delta))


def readout(element):
    return PulseEvent("readout", element=element)


@dataclass(frozen=True)
class PulseProgram:
    events: tuple = ()
    name: str = None
    seed: int = None

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        seen_readout = False
        for ev in self.events:
            if ev.kind == "readout":
                seen_readout = True
            elif seen_readout:
                raise ValueError("pulse or wait after a readout marker")

    def __len__(self):
        return len(self.events)

    def body(self):
        """Events up to and including the last wait (state preparation plus interaction)."""
        last = max((i for i, e in enumerate(self.events) if e.kind == "wait"), default=-1)
        if last < 0:
            last = max((i for i, e in enumerate(self.events) if e.kind == "pulse"), default=-1)
        return self.events[: last + 1]

    def to_text(self):
        return format_program(self)


def _parse_angle(tok, line, col):
    m = _PI_RE.match(tok)
    if m:
        k = m.group("k")
        k = 1.0 if k in (None, "+") else -1.0 if k == "-" else float(k)
        d = float(m.group("d")) if m.group("d") else 1.0
        if d == 0:
            raise ParseError(f"malformed angle {tok!r}", line, col)
        return k * math.pi / d
    m = _UNIT_RE.match(tok)
    if not m or m.group("u") not in _ANGLE_UNITS:
        raise ParseError(f"malformed angle {tok!r}", line, col)
    return float(m.group("v")) * _ANGLE_UNITS[m.group("u")]


def _parse_unit(tok, units, what, line, col):
    m = _UNIT_RE.match(tok)
    if not m or m.group("u") not in units:
        raise ParseError(f"malformed {what} {tok!r} (units: {', '.join(sorted(set(units)))})", line, col)
    return float(m.group("v")) * units[m.group("u")]


def _tokens(text):
    # (token, 1-based column)
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", text)]


def parse(text):
    """Parse DSL text into a :class:`PulseProgram`; errors carry line and column."""
    events, name, seed = [], None, None
    seen_readout = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw.split("#", 1)[0])
        if not toks:
            continue
        head, hcol = toks[0]
        args = toks[1:]

        def need(k):
            if len(args) < k:
                raise ParseError(f"'{head}' expects at least {k} argument(s)", lineno, hcol)

        if head == "name":
            need(1)
            name = args[0][0]
        elif head == "seed":
            need(1)
            try:
                seed = int(args[0][0])
            except ValueError:
                raise ParseError(f"seed must be an integer, got {args[0][0]!r}", lineno, args[0][1]) from None
        elif head == "pulse":
            need(3)
            if seen_readout:
                raise ParseError("schedule conflict: pulse after readout marker", lineno, hcol)
            tr_tok, tr_col = args[0]
            m = re.fullmatch(r"(\d)-(\d)", tr_tok)
            if not m:
                raise ParseError(f"malformed transition {tr_tok!r}", lineno, tr_col)
            tr = tuple(sorted((int(m.group(1)), int(m.group(2)))))
            if tr not in DRIVEN_TRANSITIONS:
                raise ParseError(f"unknown transition {tr_tok!r}; driven: 1-3, 2-3, 3-4", lineno, tr_col)
            axis, acol = args[1]
            if axis not in AXES:
                raise ParseError(f"unknown axis {axis!r}", lineno, acol)
            angle = _parse_angle(args[2][0], lineno, args[2][1])
            if not 0.0 <= angle < 2 * math.pi:
                raise ParseError(f"angle {args[2][0]!r} outside [0, 2pi)", lineno, args[2][1])
            phase = 0.0
            rest = args[3:]
            if rest:
                if rest[0][0] != "phase" or len(rest) != 2:
                    raise ParseError("expected 'phase <angle>'", lineno, rest[0][1])
                phase = _parse_angle(rest[1][0], lineno, rest[1][1])
            events.append(PulseEvent("pulse", transition=tr, axis=axis, angle=angle, phase=phase, line=lineno))
        elif head == "wait":
            need(3)
            if seen_readout:
                raise ParseError("schedule conflict: wait after readout marker", lineno, hcol)
            tau = _parse_unit(args[0][0], _TIME_UNITS, "duration", lineno, args[0][1])
            if tau < 0:
                raise ParseError("negative wait duration", lineno, args[0][1])
            if args[1][0] != "detuning":
                raise ParseError("expected 'detuning'", lineno, args[1][1])
            delta = _parse_unit(args[2][0], _FREQ_UNITS, "detuning", lineno, args[2][1])
            if len(args) > 3:
                raise ParseError("unexpected trailing tokens", lineno, args[3][1])
            events.append(PulseEvent("wait", tau=tau, delta=delta, line=lineno))
        elif head == "readout":
            need(1)
            el, ecol = args[0]
            if el not in ELEMENTS:
                raise ParseError(f"unknown readout element {el!r}", lineno, ecol)
            seen_readout = True
            events.append(PulseEvent("readout", element=el, line=lineno))
        else:
            raise ParseError(f"unknown statement {head!r}", lineno, hcol)
    return PulseProgram(tuple(events), name=name, seed=seed)


def format_event(ev):
    if ev.kind == "pulse":
        n, m = ev.transition
        s = f"pulse {n}-{m} {ev.axis} {ev.angle!r}rad"
        if ev.phase != 0.0:
            s += f" phase {ev.phase!r}rad"
        return s
    if ev.kind == "wait":
        return f"wait {ev.tau!r}s detuning {ev.delta!r}rad"
    return f"readout {ev.element}"


def format_program(prog):
    """Canonical text form; ``parse(format_program(p)) == p`` bit for bit."""
    lines = []
    if prog.name is not None:
        lines.append(f"name {prog.name}")
    if prog.seed is not None:
        lines.append(f"seed {prog.seed}")
    lines.extend(format_event(ev) for ev in prog.events)
    return "\n".join(lines) + ("\n" if lines else "")
