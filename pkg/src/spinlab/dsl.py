"""Text format for pulse programs.

One statement per line, ``#`` starts a comment::

    system bromotrifluoroethylene.cfg
    frame uncouple A
    pulse B,C y90
    pulse B x90 & C -x90
    delay 1/(2*J[B,C])
    pulse B,C y-90
    acquire B,C 4 0.001

Angles are degrees. ``y-90`` is a -90 degree turn about +y; ``-y90`` is
+90 about -y. Delay expressions are in seconds and may use numbers,
``+ - * /``, parentheses and couplings ``J[X,Y]`` in Hz. Frames are
``frame resonant``, ``frame uncouple <spin>`` or
``frame offsets <hz> ...`` with one offset per spin.
"""

from __future__ import annotations

import ast
import operator
import re
from pathlib import Path

import numpy as np

from .errors import InputError
from .frame import Frame, uncoupling_offsets
from .sequences import Acquire, Delay, FrameShift, Pulse, PulseSequence, Rotation
from .system import SpinSystem, load_system

KEYWORDS = ("system", "frame", "pulse", "delay", "acquire")

_ROT = re.compile(r"^(-?[xy])(.*)$")
_NUMBER = re.compile(r"^[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?$")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


class ParseError(InputError):
    def __init__(self, message, line, column):
        self.message, self.line, self.column = message, line, column
        super().__init__(f"line {line}, column {column}: {message}")


def _tokens(text):
    """(token, start column) pairs, 1-based columns."""
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", text)]


class _Parser:
    def __init__(self, sys, lineno, text):
        self.sys, self.lineno, self.text = sys, lineno, text

    def fail(self, message, column):
        raise ParseError(message, self.lineno, column)

    def spin(self, name, column):
        if name not in self.sys.labels:
            self.fail(f"unknown spin {name}", column)
        return name

    def spins(self, token, column):
        out = []
        offset = 0
        for part in token.split(","):
            if not part:
                self.fail("empty spin name", column + offset)
            out.append(self.spin(part, column + offset))
            offset += len(part) + 1
        return out

    def rotation(self, token, column):
        m = _ROT.match(token)
        if not m:
            self.fail(f"malformed rotation {token!r}; expected an axis x, y, -x or -y and an angle", column)
        axis, angle = m.groups()
        if not _NUMBER.match(angle):
            self.fail(f"malformed angle {angle!r}", column + len(axis))
        deg = float(angle)
        if not np.isfinite(deg):
            self.fail(f"malformed angle {angle!r}", column + len(axis))
        return axis, np.deg2rad(deg)

    def pulse(self, toks):
        groups, cur = [], []
        for tok in toks[1:]:
            if tok[0] == "&":
                groups.append(cur)
                cur = []
            else:
                cur.append(tok)
        groups.append(cur)
        rotations, seen = [], set()
        for g in groups:
            if len(g) != 2:
                col = g[0][1] if g else toks[0][1]
                self.fail("pulse needs '<spins> <axis><angle>'", col)
            (spins_tok, sc), (rot_tok, rc) = g
            axis, angle = self.rotation(rot_tok, rc)
            for s in self.spins(spins_tok, sc):
                if s in seen:
                    self.fail(f"spin {s} pulsed twice in one statement", sc)
                seen.add(s)
                rotations.append(Rotation(s, axis, angle))
        return Pulse(tuple(rotations))

    def delay(self, toks, column):
        if len(toks) < 2:
            self.fail("delay needs an expression", column)
        start = toks[1][1]
        expr = self.text[start - 1 :].strip()
        value = self.evaluate(expr, start)
        if value < 0:
            self.fail(f"negative delay {value:g} s", start)
        return Delay(value, expr)

    def evaluate(self, expr, column):
        try:
            tree = ast.parse(expr, mode="eval")
        except SyntaxError as exc:
            self.fail(f"malformed delay expression: {exc.msg}", column + max((exc.offset or 1) - 1, 0))
        return self._eval(tree.body, column)

    def _eval(self, node, column):
        col = column + getattr(node, "col_offset", 0)
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left = self._eval(node.left, column)
            right = self._eval(node.right, column)
            if isinstance(node.op, ast.Div) and right == 0:
                self.fail("division by zero in delay expression", col)
            return _BINOPS[type(node.op)](left, right)
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](self._eval(node.operand, column))
        if (
            isinstance(node, ast.Subscript)
            and isinstance(node.value, ast.Name)
            and node.value.id == "J"
            and isinstance(node.slice, ast.Tuple)
            and len(node.slice.elts) == 2
            and all(isinstance(e, ast.Name) for e in node.slice.elts)
        ):
            a, b = node.slice.elts
            for e in (a, b):
                self.spin(e.id, column + e.col_offset)
            return self.sys.coupling(a.id, b.id)
        self.fail("unsupported element in delay expression; use numbers, + - * /, () and J[X,Y]", col)

    def frame(self, toks, column):
        if len(toks) == 2 and toks[1][0] == "resonant":
            return Frame.resonant(self.sys.n)
        if len(toks) == 3 and toks[1][0] == "uncouple":
            return uncoupling_offsets(self.sys, self.spin(*toks[2]))
        if len(toks) >= 2 and toks[1][0] == "offsets":
            vals = toks[2:]
            if len(vals) != self.sys.n:
                self.fail(f"frame offsets needs {self.sys.n} values", toks[1][1])
            out = []
            for tok, col in vals:
                if not _NUMBER.match(tok):
                    self.fail(f"malformed frequency {tok!r}", col)
                out.append(float(tok))
            return Frame(tuple(out), "offsets")
        self.fail("frame must be 'resonant', 'uncouple <spin>' or 'offsets <hz>...'", column)

    def acquire(self, toks, column):
        if len(toks) != 4:
            self.fail("acquire needs '<spins> <duration> <dt>'", column)
        spins = self.spins(*toks[1])
        nums = []
        for tok, col in toks[2:]:
            if not _NUMBER.match(tok) or float(tok) <= 0:
                self.fail(f"acquire needs a positive number, got {tok!r}", col)
            nums.append(float(tok))
        return Acquire(tuple(spins), nums[0], nums[1])


def program_system_path(text: str) -> str | None:
    """The path named by a ``system`` header line, if any."""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line.startswith("system "):
            return line.split(None, 1)[1].strip()
    return None


def parse_program(text: str, sys: SpinSystem | None = None, base_dir=None) -> PulseSequence:
    """Parse program text into a :class:`PulseSequence`.

    Without ``sys`` the ``system`` header is loaded, relative to
    ``base_dir``.
    """
    system_path = program_system_path(text)
    if sys is None:
        if system_path is None:
            raise ParseError("no spin system given and no 'system' header", 1, 1)
        path = Path(system_path)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        sys = load_system(path)

    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        toks = _tokens(body)
        if not toks:
            continue
        p = _Parser(sys, lineno, body)
        word, col = toks[0]
        if word == "system":
            if len(toks) < 2:
                p.fail("system needs a file name", col)
            continue
        if word == "pulse":
            events.append(p.pulse(toks))
        elif word == "delay":
            events.append(p.delay(toks, col))
        elif word == "frame":
            events.append(FrameShift(p.frame(toks, col)))
        elif word == "acquire":
            events.append(p.acquire(toks, col))
        else:
            p.fail(f"unknown keyword {word!r}", col)
    return PulseSequence(events, system_path=system_path)


# -- printing ---------------------------------------------------------------------


def _degrees(angle: float) -> str:
    """Shortest decimal degree string that parses back to ``angle``."""
    deg = float(np.rad2deg(angle))
    for digits in range(0, 18):
        s = f"{deg:.{digits}f}"
        if np.deg2rad(float(s)) == angle:
            return s
    # rad2deg can land an ulp away from every exact preimage; look nearby
    cand = deg
    for _ in range(8):
        cand = np.nextafter(cand, -np.inf)
    for _ in range(17):
        if np.deg2rad(cand) == angle:
            return repr(float(cand))
        cand = np.nextafter(cand, np.inf)
    return repr(deg)


def _format_pulse(e: Pulse) -> str:
    groups: list[tuple[str, float, list[str]]] = []
    for r in e.rotations:
        for g in groups:
            if g[0] == r.axis and g[1] == r.angle:
                g[2].append(r.spin)
                break
        else:
            groups.append((r.axis, r.angle, [r.spin]))
    parts = [f"{','.join(spins)} {axis}{_degrees(angle)}" for axis, angle, spins in groups]
    return "pulse " + " & ".join(parts)


def _format_frame(f: Frame) -> str:
    if f.name == "resonant" or (not f.name and not any(f.delta_hz)):
        return "frame resonant"
    if f.name.startswith("uncouple "):
        return f"frame {f.name}"
    return "frame offsets " + " ".join(repr(float(v)) for v in f.delta_hz)


def format_program(seq: PulseSequence, system_path: str | None = None) -> str:
    lines = []
    system_path = system_path or seq.system_path
    if system_path:
        lines.append(f"system {system_path}")
    for e in seq.events:
        if isinstance(e, Pulse):
            if e.rotations:
                lines.append(_format_pulse(e))
        elif isinstance(e, Delay):
            lines.append(f"delay {e.expr if e.expr else repr(float(e.duration))}")
        elif isinstance(e, FrameShift):
            lines.append(_format_frame(e.frame))
        elif isinstance(e, Acquire):
            lines.append(f"acquire {','.join(e.spins)} {e.duration!r} {e.dt!r}")
        else:
            raise InputError(f"cannot print event {e!r}")
    return "\n".join(lines) + "\n"
