"""Deviation-density-matrix tomography by linear inversion.

Every spin independently gets no pulse, a 90-degree x pulse or a
90-degree y pulse before acquisition, giving 3^n experiments (27 for three
spins). Each experiment records every line of every spin; a line's
complex integral is one element of the rotated density matrix. Stacking
all of them gives a linear system for the 4^n - 1 Pauli coefficients of
the traceless deviation, solved by least squares.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import core
from .errors import InputError, SingularSystemError
from .readout import (
    DEFAULT_DT,
    DEFAULT_DURATION,
    DEFAULT_ZERO_FILL,
    fit_lines,
    receiver_phase,
    simulate_fid,
    spectrum,
    transitions,
)
from .sequences import IDEAL, ErrorModel, Pulse, PulseSequence, Rotation, run_sequence

READOUT_CHOICES = (None, "x", "y")
MAX_CONDITION = 1e10

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@lru_cache(maxsize=None)
def pauli_basis(n: int) -> np.ndarray:
    """The 4^n - 1 non-identity Pauli strings, shape (4^n - 1, 2^n, 2^n)."""
    out = []
    for idx in itertools.product(range(4), repeat=n):
        if not any(idx):
            continue
        m = np.ones((1, 1), dtype=complex)
        for i in idx:
            m = np.kron(m, _PAULI[i])
        out.append(m)
    return np.array(out)


def readout_settings(n: int):
    return list(itertools.product(READOUT_CHOICES, repeat=n))


def readout_unitary(sys, setting, errors: ErrorModel = IDEAL) -> np.ndarray:
    from .sequences import ideal_pulse_unitary

    rots = tuple(
        Rotation(sys.labels[k], ax, np.pi / 2) for k, ax in enumerate(setting) if ax is not None
    )
    return ideal_pulse_unitary(sys, Pulse(rots), errors)


def readout_sequence(sys, setting) -> PulseSequence:
    rots = tuple(
        Rotation(sys.labels[k], ax, np.pi / 2) for k, ax in enumerate(setting) if ax is not None
    )
    return PulseSequence([Pulse(rots)] if rots else [], "read-out")


@lru_cache(maxsize=16)
def _design(sys, frame):
    """Real design matrix mapping Pauli coefficients to line integrals."""
    P = pauli_basis(sys.n) / sys.dim
    rows = []
    for setting in readout_settings(sys.n):
        R = readout_unitary(sys, setting)
        rotated = R @ P @ R.conj().T
        for k in range(sys.n):
            phase = receiver_phase(sys, frame, k)
            for ln in transitions(sys, frame, k):
                rows.append(rotated[:, ln.r, ln.c] * phase)
    A = np.array(rows)
    A = np.vstack([A.real, A.imag])
    s = np.linalg.svd(A, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    if cond > MAX_CONDITION:
        raise SingularSystemError(f"tomography inversion is ill-conditioned (cond {cond:.3g})", cond)
    return A, cond


@dataclass
class Tomography:
    deviation: np.ndarray
    condition: float
    experiments: int
    measurements: np.ndarray


def _experiment(rho, sys, frame, setting, errors, duration, dt, zero_fill):
    res = run_sequence(readout_sequence(sys, setting), sys, core.deviation(rho), frame, errors)
    fid = simulate_fid(res.rho, sys, frame, sys.labels, duration, dt)
    spec = spectrum(fid, zero_fill)
    return np.concatenate([fit_lines(spec, fid, sys, s) for s in sys.labels])


def tomography_of_state(
    rho: np.ndarray,
    sys,
    frame,
    errors: ErrorModel = IDEAL,
    duration: float = DEFAULT_DURATION,
    dt: float = DEFAULT_DT,
    zero_fill: int = DEFAULT_ZERO_FILL,
    jobs: int = 1,
) -> Tomography:
    """Reconstruct the deviation of ``rho`` from simulated spectra.

    ``errors`` perturbs the read-out pulses; the inversion always assumes
    ideal ones.
    """
    frame = frame.check(sys)
    A, cond = _design(sys, frame)
    settings = readout_settings(sys.n)

    def run(setting):
        return _experiment(rho, sys, frame, setting, errors, duration, dt, zero_fill)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            data = list(pool.map(run, settings))
    else:
        data = [run(s) for s in settings]
    m = np.concatenate(data)
    coeffs, *_ = np.linalg.lstsq(A, np.concatenate([m.real, m.imag]), rcond=None)
    dev = np.tensordot(coeffs, pauli_basis(sys.n), axes=1) / sys.dim
    return Tomography(dev, cond, len(settings), m)


def full_tomography(
    preparation: PulseSequence,
    sys,
    a: float = 1e-5,
    errors: ErrorModel = IDEAL,
    dephasing: bool = False,
    initial: np.ndarray | None = None,
    **kwargs,
) -> Tomography:
    """Prepare from the thermal state (or ``initial``), then reconstruct."""
    rho = core.thermal_state(sys, a) if initial is None else initial
    res = run_sequence(preparation, sys, rho, errors=errors, dephasing=dephasing)
    return tomography_of_state(res.rho, sys, res.frame, errors, **kwargs)


def deviation_error_norm(rho_exp: np.ndarray, rho_th: np.ndarray) -> float:
    """||dev(exp) - dev(th)||_F / ||dev(th)||_F on traceless parts."""
    rho_exp, rho_th = np.asarray(rho_exp), np.asarray(rho_th)
    if rho_exp.shape != rho_th.shape:
        raise InputError(f"shape mismatch {rho_exp.shape} vs {rho_th.shape}")
    ref = core.deviation(rho_th)
    norm = np.linalg.norm(ref)
    if norm == 0:
        raise InputError("reference deviation is zero")
    return float(np.linalg.norm(core.deviation(rho_exp) - ref) / norm)
