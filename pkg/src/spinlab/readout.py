"""Free induction decays, spectra and population read-out.

Each observed spin has its own receiver channel demodulated in that spin's
rotating frame. The channel records ``Tr(rho(t) I_-)``; a line belongs to
a pair of basis states (r, c) that differ only in the observed spin (up in
r, down in c) and oscillates at ``(E_c - E_r) / 2 pi`` Hz. With the
Hamiltonian's sign conventions this places lines at the physical offset
below the frame frequency, so a frame moved up by D shifts every line
down by D.

The receiver phase of every channel is fixed by a reference experiment on
|0...0> after a 90-degree y read-out pulse, which must give a positive
absorptive line.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import core
from .errors import InputError, SingularSystemError
from .frame import Frame
from .system import SpinSystem

READOUT_AXIS = "y"
DEFAULT_DT = 1e-3
DEFAULT_DURATION = 4.0
DEFAULT_ZERO_FILL = 4


@dataclass(frozen=True)
class Line:
    spin: int
    r: int  # basis state with the observed spin up
    c: int  # same state with the observed spin down
    freq_hz: float
    rate: float  # decay rate 1/T2 in 1/s


@lru_cache(maxsize=256)
def transitions(sys: SpinSystem, frame: Frame, spin) -> tuple[Line, ...]:
    """The 2^(n-1) single-quantum lines of ``spin`` in ``frame``."""
    k = sys.index(spin)
    E = core.hamiltonian_diagonal(sys, frame.check(sys))
    b = core.bits(sys.n)
    rate = 1.0 / sys.t2_s[k]
    lines = []
    for r in np.flatnonzero(b[:, k] == 0):
        c = r | (1 << (sys.n - 1 - k))
        lines.append(Line(k, int(r), int(c), float((E[c] - E[r]) / core.TWO_PI), rate))
    return tuple(lines)


@dataclass
class FID:
    samples: np.ndarray  # (channels, N)
    dt: float
    frame: Frame
    spins: tuple[str, ...]

    def __post_init__(self):
        self.samples = np.atleast_2d(self.samples)
        if self.samples.shape[1] < 2:
            raise InputError("an FID needs at least two samples")
        if not self.dt > 0:
            raise InputError("sample interval must be positive")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.shape[1]) * self.dt

    def channel(self, spin) -> np.ndarray:
        return self.samples[self.spins.index(spin)]


@dataclass
class Spectrum:
    freqs: np.ndarray
    amplitudes: np.ndarray  # (channels, M)
    spins: tuple[str, ...]
    phase_reference: str = "positive absorption for |0> after a y90 read-out"

    def channel(self, spin) -> np.ndarray:
        return self.amplitudes[self.spins.index(spin)]

    @property
    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


def _line_signal(lines, t):
    freq = np.array([ln.freq_hz for ln in lines])
    rate = np.array([ln.rate for ln in lines])
    return np.exp((core.TWO_PI * 1j * freq[:, None] - rate[:, None]) * t[None, :])


@lru_cache(maxsize=64)
def receiver_phase(sys: SpinSystem, frame: Frame, spin) -> complex:
    """Unit phasor that makes the |0...0> reference line positive."""
    k = sys.index(spin)
    ref = core.pure_state(sys, 0)
    R = core.rotation_unitary(sys, k, READOUT_AXIS, np.pi / 2)
    ref = R @ ref @ R.conj().T
    amp = sum(ref[ln.r, ln.c] for ln in transitions(sys, frame, k))
    if abs(amp) == 0:
        raise SingularSystemError("reference experiment produced no signal")
    return complex(np.conj(amp) / abs(amp))


def line_amplitudes_of_state(rho, sys, frame, spin) -> np.ndarray:
    """Receiver-corrected t=0 amplitude of each line of ``spin``."""
    lines = transitions(sys, frame, spin)
    phase = receiver_phase(sys, frame, spin)
    return np.array([rho[ln.r, ln.c] for ln in lines]) * phase


def readout_pulse(sys, rho, spins, axis=READOUT_AXIS):
    for s in spins:
        R = core.rotation_unitary(sys, s, axis, np.pi / 2)
        rho = R @ rho @ R.conj().T
    return rho


def simulate_fid(
    rho: np.ndarray,
    sys: SpinSystem,
    frame: Frame,
    spins,
    duration: float = DEFAULT_DURATION,
    dt: float = DEFAULT_DT,
    readout: bool = False,
) -> FID:
    """Signal of each spin in ``spins`` under free evolution with T2 decay.

    ``readout=True`` first applies an ideal 90-degree y pulse to every
    listed spin.
    """
    frame = frame.check(sys)
    spins = tuple(sys.labels[sys.index(s)] for s in spins)
    if not spins:
        raise InputError("no spins to acquire")
    if not dt > 0 or not duration > dt:
        raise InputError("acquisition needs dt > 0 and duration > dt")
    # the identity part carries no signal; dropping it keeps zero exactly zero
    rho = core.deviation(rho)
    if readout:
        rho = readout_pulse(sys, rho, spins)
    nyquist = 1 / (2 * dt)
    for s in spins:
        top = max(abs(ln.freq_hz) for ln in transitions(sys, frame, s))
        if top > nyquist:
            raise InputError(
                f"line at {top:.1f} Hz on spin {s} exceeds the Nyquist limit {nyquist:.1f} Hz"
            )
    n = int(round(duration / dt))
    t = np.arange(n) * dt
    samples = np.empty((len(spins), n), dtype=complex)
    for i, s in enumerate(spins):
        amps = line_amplitudes_of_state(rho, sys, frame, s)
        samples[i] = amps @ _line_signal(transitions(sys, frame, s), t)
    return FID(samples, dt, frame, spins)


def spectrum(fid: FID, zero_fill_factor: int = DEFAULT_ZERO_FILL) -> Spectrum:
    """Discrete Fourier transform normalized by 1/M, M the zero-filled length.

    Frequencies run from -1/(2 dt) upward in Hz relative to the channel's
    frame. Parseval: ``M * sum |X|^2 == sum |x|^2``.
    """
    if zero_fill_factor < 1:
        raise InputError("zero-fill factor must be >= 1")
    m = fid.samples.shape[1] * int(zero_fill_factor)
    amps = np.fft.fftshift(np.fft.fft(fid.samples, n=m, axis=1), axes=1) / m
    freqs = np.fft.fftshift(np.fft.fftfreq(m, fid.dt))
    return Spectrum(freqs, amps, fid.spins)


# -- line fitting ------------------------------------------------------------------


@lru_cache(maxsize=64)
def _line_model(sys, frame, spin, n, dt, zero_fill):
    lines = transitions(sys, frame, spin)
    t = np.arange(n) * dt
    basis = _line_signal(lines, t)
    m = n * zero_fill
    model = np.fft.fftshift(np.fft.fft(basis, n=m, axis=1), axes=1).T / m
    s = np.linalg.svd(model, compute_uv=False)
    if s[-1] < 1e-10 * s[0]:
        raise SingularSystemError(
            f"lines of spin {sys.labels[sys.index(spin)]} overlap; cannot separate them",
            condition=float(s[0] / s[-1]) if s[-1] > 0 else np.inf,
        )
    return lines, np.linalg.pinv(model)


def fit_lines(spec: Spectrum, fid: FID, sys: SpinSystem, spin) -> np.ndarray:
    """Complex integral of each line of ``spin`` in ``spec``.

    The spectrum is decomposed by least squares onto the transforms of
    unit-amplitude model lines (known positions and T2 widths). The sum of
    a unit model line over all bins is 1, so each coefficient is the
    line's integral.
    """
    zf = len(spec.freqs) // fid.samples.shape[1]
    _, pinv = _line_model(sys, fid.frame, spin, fid.samples.shape[1], fid.dt, zf)
    return pinv @ spec.channel(sys.labels[sys.index(spin)])


def peak_frequencies(spec: Spectrum, spin, count: int, part: str = "abs") -> np.ndarray:
    """Frequencies of the ``count`` strongest local maxima, ascending."""
    from scipy.signal import find_peaks

    y = spec.channel(spin)
    y = np.abs(y) if part == "abs" else np.real(y)
    idx, _ = find_peaks(y)
    top = idx[np.argsort(y[idx])[::-1][:count]]
    return np.sort(spec.freqs[top])


def value_at(spec: Spectrum, spin, freq_hz: float) -> complex:
    """Spectrum value in the bin nearest ``freq_hz``."""
    i = int(np.argmin(np.abs(spec.freqs - freq_hz)))
    return complex(spec.channel(spin)[i])


# -- populations ----------------------------------------------------------------


def population_system(sys: SpinSystem) -> np.ndarray:
    """Rows e_r - e_c for every line, in spin order, plus a row of ones."""
    rows = []
    for k in range(sys.n):
        for ln in transitions(sys, Frame.resonant(sys.n), k):
            row = np.zeros(sys.dim)
            row[ln.r], row[ln.c] = 1.0, -1.0
            rows.append(row)
    rows.append(np.ones(sys.dim))
    return np.array(rows)


def populations_from_lines(sys, differences: np.ndarray) -> np.ndarray:
    """Solve the line-difference system with zero mean appended."""
    A = population_system(sys)
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] < 1e-10 * s[0]:
        raise SingularSystemError("population system is singular", float(s[0] / max(s[-1], 1e-300)))
    b = np.append(differences, 0.0)
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    return x


def measure_populations(
    preparation,
    sys: SpinSystem,
    a: float = 1e-5,
    errors=None,
    duration: float = DEFAULT_DURATION,
    dt: float = DEFAULT_DT,
    zero_fill: int = DEFAULT_ZERO_FILL,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Relative populations (mean removed) from one read-out per spin.

    After a 90-degree y pulse each line of spin k carries half the
    population difference across its transition. The 2^(n-1) n differences
    plus the zero-mean row fix all 2^n values.
    """
    from .sequences import IDEAL, run_sequence

    rho = core.thermal_state(sys, a) if initial is None else initial
    res = run_sequence(preparation, sys, core.deviation(rho), errors=errors or IDEAL)
    diffs = []
    for k in range(sys.n):
        spin = sys.labels[k]
        fid = simulate_fid(res.rho, sys, res.frame, [spin], duration, dt, readout=True)
        spec = spectrum(fid, zero_fill)
        amps = fit_lines(spec, fid, sys, spin)
        diffs.extend(2 * np.real(amps))
    return populations_from_lines(sys, np.array(diffs))
