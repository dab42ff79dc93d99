"""Pulse sequences: event types, the sequence simulator and gate recipes.

A :class:`PulseSequence` is an ordered list of events. Events are

* :class:`Pulse` -- simultaneous rotations on distinct spins,
* :class:`Delay` -- free evolution in the current frame,
* :class:`FrameShift` -- switch every spin to a new rotating frame,
* :class:`Acquire` -- a marker for read-out, ignored by the simulator.

Pulses can be simulated as instantaneous ideal rotations or as finite
shaped RF pulses. An :class:`ErrorModel` scales flip angles, offsets
pulse phases and selects the pulse mode.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import core
from .core import axis_phase, local_unitary, su2_rotation
from .errors import InputError
from .frame import Frame, frame_change, uncoupling_offsets
from .pulses import DEFAULT_DURATION, ShapedPulse, cached_event_propagator, calibrate_amplitude
from .system import SpinSystem

AXES = ("x", "y", "-x", "-y")
HALF_PI = np.pi / 2


@dataclass(frozen=True)
class Rotation:
    spin: str
    axis: str
    angle: float  # radians; negative angles rotate the other way

    def __post_init__(self):
        if self.axis not in AXES:
            raise InputError(f"unknown axis {self.axis!r}")
        if not np.isfinite(self.angle):
            raise InputError("rotation angle must be finite")

    def inverse(self) -> Rotation:
        return Rotation(self.spin, self.axis, -self.angle)


@dataclass(frozen=True)
class Pulse:
    rotations: tuple[Rotation, ...]
    duration: float = DEFAULT_DURATION

    def __post_init__(self):
        spins = [r.spin for r in self.rotations]
        if len(set(spins)) != len(spins):
            raise InputError(f"simultaneous pulses must target distinct spins, got {spins}")


@dataclass(frozen=True)
class Delay:
    duration: float
    expr: str | None = None

    def __post_init__(self):
        if not self.duration >= 0:
            raise InputError(f"negative delay {self.duration!r}")


@dataclass(frozen=True)
class FrameShift:
    frame: Frame


@dataclass(frozen=True)
class Acquire:
    spins: tuple[str, ...]
    duration: float
    dt: float


def pulse(*specs, duration=DEFAULT_DURATION) -> Pulse:
    """``pulse(("B", "y", 90), ("C", "-x", 90))`` with angles in degrees."""
    return Pulse(tuple(Rotation(s, a, np.deg2rad(d)) for s, a, d in specs), duration)


@dataclass
class PulseSequence:
    events: list = field(default_factory=list)
    name: str = ""
    frame: Frame | None = None
    system_path: str | None = None  # set by the program parser

    def __add__(self, other: PulseSequence) -> PulseSequence:
        name = " + ".join(x for x in (self.name, other.name) if x)
        return PulseSequence(list(self.events) + list(other.events), name, self.frame)

    def __len__(self):
        return len(self.events)

    @property
    def total_duration(self) -> float:
        return sum(e.duration for e in self.events if isinstance(e, (Delay, Pulse)))

    @property
    def pulse_count(self) -> int:
        """Number of single-spin pulses."""
        return sum(len(e.rotations) for e in self.events if isinstance(e, Pulse))

    def inverse(self) -> PulseSequence:
        """Reversed sequence with every rotation negated (pulses only)."""
        events = []
        for e in reversed(self.events):
            if isinstance(e, Pulse):
                events.append(Pulse(tuple(r.inverse() for r in e.rotations), e.duration))
            elif isinstance(e, Delay):
                raise InputError("cannot invert free evolution")
            else:
                events.append(e)
        return PulseSequence(events, f"inverse of {self.name}" if self.name else "", self.frame)


# -- error model ---------------------------------------------------------------


@dataclass(frozen=True)
class ErrorModel:
    """Pulse imperfections applied during simulation.

    ``flip_error`` scales every flip angle by (1 + flip_error);
    ``phase_error`` (rad) is added to every pulse phase; ``shaped`` swaps
    ideal rotations for finite shaped pulses, lasting ``pulse_duration``
    when given and otherwise each event's own duration.
    """

    flip_error: float = 0.0
    phase_error: float = 0.0
    shaped: bool = False
    pulse_duration: float | None = None
    envelope: str = "gaussian"
    truncation: float = 3.0

    @property
    def is_ideal(self) -> bool:
        return self.flip_error == 0 and self.phase_error == 0 and not self.shaped


IDEAL = ErrorModel()


def load_error_model(path) -> ErrorModel:
    """Read an ``[errors]`` INI section.

    Keys: flip_error, phase_error_deg, shaped, pulse_duration_us, envelope,
    truncation. Missing keys keep their defaults.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: no such error-model file")
    parser.read(path)
    if "errors" not in parser:
        raise InputError(f"{path}: missing [errors] section")
    sec = parser["errors"]
    known = {"flip_error", "phase_error_deg", "shaped", "pulse_duration_us", "envelope", "truncation"}
    for key in sec:
        if key not in known:
            raise InputError(f"{path}: unknown key {key!r} in [errors]")
    try:
        return ErrorModel(
            flip_error=sec.getfloat("flip_error", 0.0),
            phase_error=np.deg2rad(sec.getfloat("phase_error_deg", 0.0)),
            shaped=sec.getboolean("shaped", False),
            pulse_duration=(
                sec.getfloat("pulse_duration_us") * 1e-6 if "pulse_duration_us" in sec else None
            ),
            envelope=sec.get("envelope", "gaussian"),
            truncation=sec.getfloat("truncation", 3.0),
        )
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


# -- simulation ----------------------------------------------------------------


@lru_cache(maxsize=64)
def _calibrated_amplitude(envelope, duration, truncation, angle):
    template = ShapedPulse("S", angle, duration, envelope=envelope, truncation=truncation)
    return calibrate_amplitude(None, None, template, angle)


def shaped_pulses_for(event: Pulse, errors: ErrorModel) -> tuple[ShapedPulse, ...]:
    out = []
    for r in event.rotations:
        angle = abs(r.angle)
        if angle == 0:
            continue
        phase = axis_phase(r.axis) + (np.pi if r.angle < 0 else 0.0) + errors.phase_error
        duration = errors.pulse_duration or event.duration
        amp = _calibrated_amplitude(errors.envelope, duration, errors.truncation, min(angle, np.pi))
        amp *= (angle / min(angle, np.pi)) * (1 + errors.flip_error)
        out.append(
            ShapedPulse(
                r.spin,
                angle,
                duration,
                phase=float(np.mod(phase, 2 * np.pi)),
                envelope=errors.envelope,
                truncation=errors.truncation,
                amplitude_hz=float(amp),
            )
        )
    return tuple(out)


def ideal_pulse_unitary(sys: SpinSystem, event: Pulse, errors: ErrorModel = IDEAL) -> np.ndarray:
    factors = {}
    for r in event.rotations:
        k = sys.index(r.spin)
        phase = axis_phase(r.axis) + errors.phase_error
        factors[k] = su2_rotation(r.angle * (1 + errors.flip_error), phase)
    return local_unitary(sys.n, factors)


def _steps(seq, sys, frame, errors, t):
    """Yield ("U", unitary, dt) and ("frame", (unitary, new_frame), 0) steps."""
    for e in seq.events:
        if isinstance(e, Pulse):
            if errors.shaped:
                pulses = shaped_pulses_for(e, errors)
                if not pulses:
                    continue
                U = cached_event_propagator(sys, frame, pulses)
                step = ("U", U, pulses[0].duration)
            else:
                step = ("U", ideal_pulse_unitary(sys, e, errors), 0.0)
        elif isinstance(e, Delay):
            H = core.build_hamiltonian(sys, frame)
            step = ("U", core.propagator(H, e.duration), e.duration)
        elif isinstance(e, FrameShift):
            new = e.frame.check(sys)
            step = ("frame", (frame_change(sys, frame, new, t), new), 0.0)
            frame = new
        elif isinstance(e, Acquire):
            continue
        else:
            raise InputError(f"unknown event {e!r}")
        t += step[2]
        yield step


@dataclass
class RunResult:
    rho: np.ndarray
    frame: Frame
    time: float


def run_sequence(
    seq: PulseSequence,
    sys: SpinSystem,
    rho: np.ndarray,
    frame: Frame | None = None,
    errors: ErrorModel = IDEAL,
    dephasing: bool = False,
    t: float = 0.0,
) -> RunResult:
    """Apply ``seq`` to ``rho``, returning the final state, frame and clock."""
    frame = (frame or seq.frame or Frame.resonant(sys.n)).check(sys)
    rho = np.array(rho, dtype=complex)
    for kind, payload, dt in _steps(seq, sys, frame, errors, t):
        if kind == "frame":
            U, frame = payload
            rho = core.apply_unitary(rho, U)
            continue
        rho = core.apply_unitary(rho, payload)
        if dephasing and dt > 0:
            rho = core.dephase(rho, sys, dt)
        t += dt
    return RunResult(rho, frame, t)


def sequence_unitary(
    seq: PulseSequence,
    sys: SpinSystem,
    frame: Frame | None = None,
    errors: ErrorModel = IDEAL,
    t: float = 0.0,
):
    """Total unitary of ``seq`` and the frame it ends in."""
    frame = (frame or seq.frame or Frame.resonant(sys.n)).check(sys)
    U = np.eye(sys.dim, dtype=complex)
    for kind, payload, dt in _steps(seq, sys, frame, errors, t):
        if kind == "frame":
            V, frame = payload
            U = V @ U
        else:
            U = payload @ U
        t += dt
    return U, frame


def phase_aligned(U: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """``U`` with its global phase matched to ``ref``.

    The phase is read from the largest-magnitude entry of ``ref``.
    """
    idx = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
    if abs(U[idx]) == 0:
        return U
    return U * (ref[idx] / abs(ref[idx])) / (U[idx] / abs(U[idx]))


def phase_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Max-norm distance between unitaries after global-phase alignment."""
    return float(np.max(np.abs(phase_aligned(U, V) - V)))


def block(U: np.ndarray, sys: SpinSystem, label, value: int = 0) -> np.ndarray:
    idx = core.subspace_indices(sys.n, sys.index(label), value)
    return U[np.ix_(idx, idx)]


def leakage(U: np.ndarray, sys: SpinSystem, label) -> float:
    """Largest matrix element coupling the two label subspaces."""
    k = sys.index(label)
    i0 = core.subspace_indices(sys.n, k, 0)
    i1 = core.subspace_indices(sys.n, k, 1)
    return float(max(np.max(np.abs(U[np.ix_(i0, i1)])), np.max(np.abs(U[np.ix_(i1, i0)]))))


# -- gate recipes ---------------------------------------------------------------


def _abs_coupling_expr(sys, a, b) -> str:
    ref = f"J[{sys.labels[sys.index(a)]},{sys.labels[sys.index(b)]}]"
    return ref if sys.coupling(a, b) > 0 else f"(-{ref})"


def _name(sys, spin) -> str:
    return sys.labels[sys.index(spin)]


def cnot_sequence(sys: SpinSystem, control, target, refocus=None) -> PulseSequence:
    """Controlled-NOT up to diagonal phases: Y_t, 1/2J, -Y_t, +/-X_t.

    Spins in ``refocus`` (default: every other spin coupled to the target)
    get a pair of 180 degree pulses so their couplings to the target cancel.
    Pass ``refocus=()`` when working in an uncoupling frame.
    """
    c, t = _name(sys, control), _name(sys, target)
    if c == t:
        raise InputError("control and target must differ")
    J = sys.coupling(c, t)
    if J == 0:
        raise InputError(f"no coupling between {c} and {t}")
    if refocus is None:
        refocus = [s for s in sys.labels if s not in (c, t) and sys.coupling(s, t) != 0]
    refocus = [_name(sys, s) for s in refocus]
    tau = 1 / (2 * abs(J))
    expr = f"1/(2*{_abs_coupling_expr(sys, c, t)})"
    events = [pulse((t, "y", 90))]
    if refocus:
        half = f"1/(4*{_abs_coupling_expr(sys, c, t)})"
        flip = pulse(*[(s, "x", 180) for s in refocus])
        events += [Delay(tau / 2, half), flip, Delay(tau / 2, half), flip]
    else:
        events.append(Delay(tau, expr))
    events.append(pulse((t, "-y", 90)))
    events.append(pulse((t, "x" if J > 0 else "-x", 90)))
    return PulseSequence(events, f"CNOT {c}->{t}")


def labeling_sequence(sys: SpinSystem, label="A") -> PulseSequence:
    """Simultaneous CNOTs from both other spins onto ``label``.

    -Y on the label, two delays with 180 degree pulses on the more
    strongly coupled spin, then +Y. The label's coherence picks up a
    conditional phase of +/-pi/2 from each coupling, so it is inverted
    exactly when the other two spins differ. Correct for populations;
    leftover z phases are irrelevant for diagonal input.
    """
    if sys.n != 3:
        raise InputError("labeling needs a three-spin system")
    lab = _name(sys, label)
    a, b = [s for s in sys.labels if s != lab]
    Ja, Jb = sys.coupling(lab, a), sys.coupling(lab, b)
    if Ja == 0 or Jb == 0:
        raise InputError("labeling needs nonzero couplings from the label to both spins")
    # refocus the spin with the larger coupling so that both delays stay >= 0
    strong, weak = (a, b) if abs(Ja) >= abs(Jb) else (b, a)
    Js, Jw = sys.coupling(lab, strong), sys.coupling(lab, weak)
    t_weak = 1 / (2 * abs(Jw))
    sign = -np.sign(Js * Jw)
    t_strong = sign / (2 * abs(Js))
    tau1 = (t_weak + t_strong) / 2
    tau2 = (t_weak - t_strong) / 2
    w_expr = f"1/(2*{_abs_coupling_expr(sys, lab, weak)})"
    s_expr = f"1/(2*{_abs_coupling_expr(sys, lab, strong)})"
    op1, op2 = ("+", "-") if sign > 0 else ("-", "+")
    events = [
        pulse((lab, "-y", 90)),
        Delay(tau1, f"({w_expr} {op1} {s_expr})/2"),
        pulse((strong, "x", 180)),
        Delay(tau2, f"({w_expr} {op2} {s_expr})/2"),
        pulse((strong, "x", 180)),
        pulse((lab, "y", 90)),
    ]
    return PulseSequence(events, "logical labeling", Frame.resonant(sys.n))


# composite 90-degree z rotations built from x/y pulses, in time order;
# the -90 versions swap x and -x.
Z_VARIANTS = (
    ("y", "x", "-y"),
    ("-y", "-x", "y"),
    ("x", "-y", "-x"),
    ("-x", "y", "x"),
)
_SWAP_X = {"x": "-x", "-x": "x", "y": "y", "-y": "-y"}


def z_variant_axes(variant: int, sign: int) -> tuple[str, str, str]:
    axes = Z_VARIANTS[variant]
    return axes if sign > 0 else tuple(_SWAP_X[a] for a in axes)


def composite_z_variants(spin="B", angle: float = HALF_PI) -> list[PulseSequence]:
    """The four three-pulse realizations of a +/-90 degree z rotation."""
    if not np.isclose(abs(angle), HALF_PI):
        raise InputError("composite z rotations are defined for +/-90 degrees")
    sign = 1 if angle > 0 else -1
    out = []
    for v in range(len(Z_VARIANTS)):
        axes = z_variant_axes(v, sign)
        events = [pulse((spin, ax, 90)) for ax in axes]
        out.append(PulseSequence(events, f"z{'+' if sign > 0 else '-'}90 variant {v}"))
    return out


def labeling_capacity(n: int):
    """Qubits extractable from ``n`` homonuclear spins: log2(1 + C(n, n/2)).

    Returns ``(k, floor(k))``.
    """
    if n < 2 or n % 2:
        raise InputError("capacity is defined for even n >= 2")
    if n <= 1000:
        k = math.log2(1 + math.comb(n, n // 2))
    else:
        log2c = (math.lgamma(n + 1) - 2 * math.lgamma(n / 2 + 1)) / math.log(2)
        k = log2c + math.log1p(2.0**-log2c) / math.log(2)
    return k, int(math.floor(k))


def uncouple(sys: SpinSystem, label="A") -> PulseSequence:
    return PulseSequence([FrameShift(uncoupling_offsets(sys, label))], f"uncouple {label}")


def with_duration(seq: PulseSequence, duration: float) -> PulseSequence:
    events = [replace(e, duration=duration) if isinstance(e, Pulse) else e for e in seq.events]
    return PulseSequence(events, seq.name, seq.frame)
