"""Finite-duration shaped RF pulses.

The RF for a pulse on spin ``t`` is generated at that spin's frame
frequency plus ``carrier_offset_hz``. In the rotating-wave approximation
every spin sees it, spin ``i`` at the difference frequency

    d_i = 2 pi [(nu_t + D_t + offset) - (nu_i + D_i)],

so in spin ``i``'s frame the RF term is
``w1(t) (cos(p + d_i t) I_xi - sin(p + d_i t) I_yi)``. Counter-rotating
terms are dropped.

The propagator is built from piecewise-constant slices sampled at slice
midpoints. The slice count starts at 64 and doubles until two successive
results differ by less than the tolerance (Richardson estimate for a
second-order scheme).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf

from .core import TWO_PI, _spin_ops, hamiltonian_diagonal
from .errors import ConvergenceError, InputError, NumericalError
from .frame import Frame
from .system import SpinSystem

log = logging.getLogger(__name__)

ENVELOPES = ("gaussian", "rectangular")
DEFAULT_DURATION = 300e-6


@dataclass(frozen=True)
class ShapedPulse:
    """An RF pulse on one spin.

    ``amplitude_hz`` is the peak w1 / 2 pi; when left as None it follows
    from the area theorem for ``flip_angle``.
    """

    spin: str | int
    flip_angle: float
    duration: float = DEFAULT_DURATION
    phase: float = 0.0
    envelope: str = "gaussian"
    truncation: float = 3.0
    carrier_offset_hz: float = 0.0
    amplitude_hz: float | None = None

    def __post_init__(self):
        if self.envelope not in ENVELOPES:
            raise InputError(f"unknown envelope {self.envelope!r}")
        if not self.duration > 0:
            raise InputError("pulse duration must be positive")
        if not 0 < self.flip_angle <= 2 * np.pi + 1e-12:
            raise InputError("flip angle must lie in (0, 2 pi]")
        if self.envelope == "gaussian" and not self.truncation > 0:
            raise InputError("gaussian truncation must be positive")

    @property
    def sigma(self) -> float:
        return self.duration / (2 * self.truncation)

    def shape(self, t) -> np.ndarray:
        """Envelope normalized to unit peak, for 0 <= t <= duration."""
        t = np.asarray(t, dtype=float)
        if self.envelope == "rectangular":
            return np.ones_like(t)
        return np.exp(-((t - self.duration / 2) ** 2) / (2 * self.sigma**2))

    def area(self) -> float:
        """Integral of :meth:`shape` over the pulse, in seconds."""
        if self.envelope == "rectangular":
            return self.duration
        return self.sigma * np.sqrt(2 * np.pi) * erf(self.truncation / np.sqrt(2))

    def peak_rate(self) -> float:
        """Peak w1 in rad/s."""
        if self.amplitude_hz is not None:
            return TWO_PI * self.amplitude_hz
        return self.flip_angle / self.area()


def _transverse_terms(sys, frame, pulses, times):
    """Per-slice transverse field on every spin, shape (len(times), n) each."""
    n = sys.n
    freq = np.asarray(sys.offsets_hz) + np.asarray(frame.delta_hz)
    wx = np.zeros((len(times), n))
    wy = np.zeros((len(times), n))
    for p in pulses:
        k = sys.index(p.spin)
        amp = p.peak_rate() * p.shape(times)
        for i in range(n):
            d = TWO_PI * (freq[k] + p.carrier_offset_hz - freq[i])
            angle = p.phase + d * times
            wx[:, i] += amp * np.cos(angle)
            wy[:, i] -= amp * np.sin(angle)
    return wx, wy


def _batched_expm(X: np.ndarray) -> np.ndarray:
    """exp of a stack of small matrices via scaled Taylor series."""
    norm = float(np.max(np.sum(np.abs(X), axis=-1)))
    squarings = max(0, int(np.ceil(np.log2(norm / 0.25)))) if norm > 0.25 else 0
    X = X / 2**squarings
    x = norm / 2**squarings
    order, bound = 1, x
    while bound > 1e-17 and order < 30:
        order += 1
        bound *= x / order
    out = np.broadcast_to(np.eye(X.shape[-1], dtype=complex), X.shape).copy()
    term = out.copy()
    for k in range(1, order + 1):
        term = term @ X / k
        out += term
    for _ in range(squarings):
        out = out @ out
    return out


def _time_ordered_product(U: np.ndarray) -> np.ndarray:
    """U[-1] @ ... @ U[0] by pairwise reduction."""
    while U.shape[0] > 1:
        if U.shape[0] % 2:
            U = np.concatenate([U, np.eye(U.shape[-1], dtype=complex)[None]])
        U = U[1::2] @ U[0::2]
    return U[0]


def sliced_propagator(sys, frame, pulses, duration, slices, t0=0.0):
    """Propagator from ``slices`` piecewise-constant midpoint slices."""
    dt = duration / slices
    times = (np.arange(slices) + 0.5) * dt
    diag = hamiltonian_diagonal(sys, frame)
    wx, wy = _transverse_terms(sys, frame, pulses, times + t0)
    ops = _spin_ops(sys.n)
    IX = np.stack([o[0] for o in ops])
    IY = np.stack([o[1] for o in ops])
    H = np.einsum("kn,nab->kab", wx, IX) + np.einsum("kn,nab->kab", wy, IY)
    H[:, np.arange(sys.dim), np.arange(sys.dim)] += diag
    return _time_ordered_product(_batched_expm(-1j * dt * H))


@dataclass
class PulseIntegration:
    unitary: np.ndarray
    slices: int
    error_estimate: float


def integrate_pulses(
    sys: SpinSystem,
    frame: Frame,
    pulses,
    tol: float = 1e-8,
    min_slices: int = 64,
    max_slices: int = 2**20,
    t0: float = 0.0,
) -> PulseIntegration:
    """Adaptive propagator for simultaneous pulses of equal duration."""
    frame.check(sys)
    pulses = tuple(pulses)
    if not pulses:
        raise InputError("no pulses given")
    duration = pulses[0].duration
    if any(abs(p.duration - duration) > 1e-15 for p in pulses):
        raise InputError("simultaneous pulses must share one duration")
    targets = [sys.index(p.spin) for p in pulses]
    if len(set(targets)) != len(targets):
        raise InputError("simultaneous pulses must target distinct spins")

    n = min_slices
    prev = sliced_propagator(sys, frame, pulses, duration, n, t0)
    while True:
        n *= 2
        if n > max_slices:
            raise ConvergenceError(
                f"pulse integration did not reach {tol:g} within {max_slices} slices"
            )
        cur = sliced_propagator(sys, frame, pulses, duration, n, t0)
        diff = float(np.max(np.abs(cur - prev)))
        if diff < tol:
            log.debug("pulse converged with %d slices (change %.2e)", n, diff)
            return PulseIntegration(cur, n, diff / 3)
        prev = cur


def pulse_propagator(sys: SpinSystem, frame: Frame, pulse: ShapedPulse, **kwargs) -> np.ndarray:
    """Unitary of a single shaped pulse including coupled free evolution."""
    return integrate_pulses(sys, frame, (pulse,), **kwargs).unitary


@lru_cache(maxsize=256)
def cached_event_propagator(sys, frame, pulses, tol=1e-8):
    return integrate_pulses(sys, frame, pulses, tol=tol).unitary


# -- calibration --------------------------------------------------------------


def flip_angle_of(U2: np.ndarray) -> float:
    """Rotation angle of a 2x2 unitary, ignoring global phase."""
    det = np.linalg.det(U2)
    su = U2 / np.sqrt(det)
    c = np.clip(abs(np.real(np.trace(su))) / 2, 0.0, 1.0)
    # an SU(2) element has trace 2 cos(theta/2); the sign is lost with the phase
    angle = 2 * np.arccos(c)
    return float(angle)


def _isolated_flip(pulse: ShapedPulse, amplitude_hz: float) -> float:
    single = SpinSystem.build(("S",), (0.0,))
    p = replace(pulse, spin="S", carrier_offset_hz=0.0, amplitude_hz=amplitude_hz)
    U = integrate_pulses(single, Frame.resonant(1), (p,), tol=1e-12).unitary
    return flip_angle_of(U)


def calibrate_amplitude(sys, frame, pulse: ShapedPulse, target_angle: float, tol=1e-6) -> float:
    """Peak amplitude (Hz) giving ``target_angle`` for the on-resonance spin.

    The area theorem supplies the initial guess; a bracketed root search
    then matches the flip angle of the simulated isolated spin.
    """
    if not 0 < target_angle <= np.pi:
        raise InputError("target angle must lie in (0, pi]")
    probe = replace(pulse, flip_angle=target_angle, amplitude_hz=None)
    guess = target_angle / probe.area() / TWO_PI

    def residual(amp):
        return _isolated_flip(probe, amp) - target_angle

    r0 = residual(guess)
    if abs(r0) < tol:
        return guess
    lo, hi = guess * 0.9, guess * 1.1
    if target_angle == np.pi:
        # the angle folds over at pi; search the rising side only
        hi = guess
    for _ in range(20):
        if residual(lo) * residual(hi) <= 0:
            break
        lo, hi = lo * 0.9, hi * 1.1
    else:
        raise NumericalError("could not bracket the calibration amplitude")
    return brentq(residual, lo, hi, xtol=1e-14, rtol=1e-14)
