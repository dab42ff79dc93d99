"""Rotating reference frames, including the uncoupling frame.

Each spin is observed in its own frame rotating at ``w_i + D_i``; a
:class:`Frame` stores the offsets ``D_i / 2 pi`` in Hz. The all-zero frame
is resonant with every spin.

Moving a computation spin's frame by ``-J_label,i / 2`` cancels its
coupling to a label spin inside the subspace where the label is up, so
spins conditioned on that label evolve as if the label were absent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TWO_PI, build_hamiltonian, zvalues
from .errors import InputError
from .system import SpinSystem


@dataclass(frozen=True)
class Frame:
    delta_hz: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        if not all(np.isfinite(self.delta_hz)):
            raise InputError("frame offsets must be finite")

    @classmethod
    def resonant(cls, n: int) -> Frame:
        return cls((0.0,) * n, "resonant")

    @classmethod
    def carrier(cls, sys: SpinSystem) -> Frame:
        """A single frame at the common carrier (D_i = -offset_i)."""
        return cls(tuple(-v for v in sys.offsets_hz), "carrier")

    def check(self, sys: SpinSystem) -> Frame:
        if len(self.delta_hz) != sys.n:
            raise InputError(
                f"frame has {len(self.delta_hz)} offsets, system has {sys.n} spins"
            )
        return self


def uncoupling_offsets(sys: SpinSystem, label_spin) -> Frame:
    """Frame offsets D_i / 2 pi = -J[label, i] / 2 for all other spins."""
    k = sys.index(label_spin)
    J = sys.J
    delta = tuple(0.0 if i == k else -J[k, i] / 2 for i in range(sys.n))
    return Frame(delta, f"uncouple {sys.labels[k]}")


def frame_hamiltonian(sys: SpinSystem, frame: Frame) -> np.ndarray:
    """Hamiltonian seen in ``frame``; same operator as ``build_hamiltonian``."""
    return build_hamiltonian(sys, frame.check(sys))


def uncoupled_form(sys: SpinSystem, label_spin) -> np.ndarray:
    """Closed-form uncoupling-frame Hamiltonian, written per label subspace.

    ``2 pi [ (1/2 + I_zL) H_0 + (1/2 - I_zL) (H_0 - sum_i J_Li I_zi) ]``
    where ``H_0`` holds the couplings among the non-label spins. Used as an
    independent check on :func:`frame_hamiltonian`.
    """
    k = sys.index(label_spin)
    m = zvalues(sys.n)
    J = sys.J
    others = [i for i in range(sys.n) if i != k]
    h0 = np.zeros(sys.dim)
    for a in others:
        for b in others:
            if a < b:
                h0 += J[a, b] * m[:, a] * m[:, b]
    shift = sum(J[k, i] * m[:, i] for i in others)
    up = 0.5 + m[:, k]
    down = 0.5 - m[:, k]
    return np.diag(TWO_PI * (up * h0 + down * (h0 - shift))).astype(complex)


def frame_change(sys: SpinSystem, old: Frame, new: Frame, t: float) -> np.ndarray:
    """Unitary taking a state from ``old`` to ``new`` at elapsed time ``t``.

    Both frames are taken to coincide at t = 0.
    """
    d = TWO_PI * (np.asarray(new.check(sys).delta_hz) - np.asarray(old.check(sys).delta_hz))
    phase = zvalues(sys.n) @ d
    return np.diag(np.exp(-1j * phase * t))
