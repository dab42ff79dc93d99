"""Weakly coupled spin systems and their config files.

A config file is INI-style::

    [system]
    labels = A, B, C
    offsets_hz = 0, -13200, 9500
    T2_s = 6, 6, 6

    [couplings]
    A-B = -122.1
    A-C = 75.0
    B-C = 53.8

Offsets are Larmor frequencies relative to a common carrier, in Hz.
Couplings not listed are zero.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import SpinSystemError

DEFAULT_T2 = 6.0


@dataclass(frozen=True)
class SpinSystem:
    """An n-spin molecule in the weak-coupling limit.

    Spin 0 is the most significant bit of the computational basis index.
    """

    labels: tuple[str, ...]
    offsets_hz: tuple[float, ...]
    couplings_hz: tuple[tuple[float, ...], ...]
    t2_s: tuple[float, ...]

    def __post_init__(self):
        n = len(self.labels)
        if n < 1:
            raise SpinSystemError("a spin system needs at least one spin")
        if len(set(self.labels)) != n:
            raise SpinSystemError(f"spin labels must be unique, got {self.labels}")
        if len(self.offsets_hz) != n or len(self.t2_s) != n:
            raise SpinSystemError("offsets_hz and t2_s need one entry per spin")
        J = np.asarray(self.couplings_hz, dtype=float)
        if J.shape != (n, n):
            raise SpinSystemError(f"coupling matrix must be {n}x{n}")
        if not np.allclose(J, J.T, rtol=0, atol=0) or np.any(np.diag(J) != 0):
            raise SpinSystemError("coupling matrix must be symmetric with zero diagonal")
        if any(not t > 0 for t in self.t2_s):
            raise SpinSystemError("T2 values must be positive")

    @classmethod
    def build(cls, labels, offsets_hz, couplings=None, t2_s=None):
        """Construct from a ``{(label_i, label_j): J_hz}`` coupling mapping."""
        labels = tuple(labels)
        n = len(labels)
        J = np.zeros((n, n))
        for (a, b), value in (couplings or {}).items():
            i, j = labels.index(a), labels.index(b)
            J[i, j] = J[j, i] = float(value)
        if t2_s is None:
            t2_s = (DEFAULT_T2,) * n
        elif np.isscalar(t2_s):
            t2_s = (float(t2_s),) * n
        return cls(
            labels=labels,
            offsets_hz=tuple(float(v) for v in offsets_hz),
            couplings_hz=tuple(tuple(float(v) for v in row) for row in J),
            t2_s=tuple(float(v) for v in t2_s),
        )

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def J(self) -> np.ndarray:
        return np.array(self.couplings_hz)

    def index(self, spin) -> int:
        """Resolve a spin label (or integer index) to its position."""
        if isinstance(spin, (int, np.integer)):
            if not 0 <= spin < self.n:
                raise SpinSystemError(f"unknown spin index {spin}")
            return int(spin)
        try:
            return self.labels.index(spin)
        except ValueError:
            raise SpinSystemError(f"unknown spin {spin}") from None

    def coupling(self, a, b) -> float:
        return self.couplings_hz[self.index(a)][self.index(b)]

    def with_couplings_zeroed(self) -> SpinSystem:
        zero = tuple((0.0,) * self.n for _ in range(self.n))
        return SpinSystem(self.labels, self.offsets_hz, zero, self.t2_s)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def load_system(path) -> SpinSystem:
    """Read a :class:`SpinSystem` from an INI config file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    path = Path(path)
    if not path.exists():
        raise SpinSystemError(f"{path}: no such system file")
    parser.read(path)
    return _from_parser(parser, str(path))


def loads_system(text: str, source: str = "<string>") -> SpinSystem:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string(text, source=source)
    return _from_parser(parser, source)


def _from_parser(parser, source) -> SpinSystem:
    if "system" not in parser:
        raise SpinSystemError(f"{source}: missing [system] section")
    sec = parser["system"]
    try:
        labels = [s.strip() for s in sec["labels"].split(",") if s.strip()]
        offsets = _floats(sec["offsets_hz"])
    except KeyError as exc:
        raise SpinSystemError(f"{source}: [system] is missing key {exc}") from None
    except ValueError as exc:
        raise SpinSystemError(f"{source}: {exc}") from None
    t2 = _floats(sec["T2_s"]) if "T2_s" in sec else None
    if t2 is not None and len(t2) == 1:
        t2 = t2 * len(labels)
    couplings = {}
    if "couplings" in parser:
        for key, value in parser["couplings"].items():
            pair = key.split("-")
            if len(pair) != 2:
                raise SpinSystemError(f"{source}: coupling key {key!r} must look like A-B")
            for lab in pair:
                if lab not in labels:
                    raise SpinSystemError(f"{source}: coupling {key!r} names unknown spin {lab}")
            try:
                couplings[tuple(pair)] = float(value)
            except ValueError:
                raise SpinSystemError(f"{source}: coupling {key} = {value!r} is not a number") from None
    return SpinSystem.build(labels, offsets, couplings, t2)


def dumps_system(sys: SpinSystem) -> str:
    lines = [
        "[system]",
        "labels = " + ", ".join(sys.labels),
        "offsets_hz = " + ", ".join(f"{v:g}" for v in sys.offsets_hz),
        "T2_s = " + ", ".join(f"{v:g}" for v in sys.t2_s),
        "",
        "[couplings]",
    ]
    for i in range(sys.n):
        for j in range(i + 1, sys.n):
            if sys.couplings_hz[i][j] != 0:
                lines.append(f"{sys.labels[i]}-{sys.labels[j]} = {sys.couplings_hz[i][j]:g}")
    return "\n".join(lines) + "\n"


def bromotrifluoroethylene() -> SpinSystem:
    """The three-fluorine molecule shipped with the package."""
    text = resources.files("spinlab.data").joinpath("bromotrifluoroethylene.cfg").read_text()
    return loads_system(text, "bromotrifluoroethylene.cfg")
