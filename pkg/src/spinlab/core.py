"""Spin operators, states and exact propagation for weakly coupled spins.

Conventions
-----------
* Basis index bits run from spin 0 (most significant) to spin n-1, so for
  three spins A, B, C the ordering is |000>, |001>, ..., |111> with A first.
* Bit 0 is spin-up, the +1/2 eigenstate of I_z (2 I_z is the Pauli-z matrix).
* Frequencies are stored in Hz; the factor 2*pi is applied only when a
  Hamiltonian is assembled, so every Hamiltonian here is in rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError
from .system import SpinSystem

TWO_PI = 2.0 * np.pi

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2

# RF phase of each named rotation axis; the RF term is
# w1 * (cos(phase) I_x - sin(phase) I_y), so +y sits at phase -pi/2.
AXIS_PHASE = {"x": 0.0, "y": -np.pi / 2, "-x": np.pi, "-y": np.pi / 2}


def embed(op: np.ndarray, k: int, n: int) -> np.ndarray:
    """Place a single-spin 2x2 operator on spin ``k`` of an ``n``-spin space."""
    out = np.ones((1, 1), dtype=complex)
    for j in range(n):
        out = np.kron(out, op if j == k else _I2)
    return out


@lru_cache(maxsize=None)
def _spin_ops(n: int):
    return tuple(
        (embed(_SX, k, n), embed(_SY, k, n), embed(_SZ, k, n)) for k in range(n)
    )


def ix(n, k):
    return _spin_ops(n)[k][0]


def iy(n, k):
    return _spin_ops(n)[k][1]


def iz(n, k):
    return _spin_ops(n)[k][2]


def bits(n: int) -> np.ndarray:
    """``bits(n)[state, k]`` is the bit of spin ``k`` in basis state ``state``."""
    idx = np.arange(2**n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def zvalues(n: int) -> np.ndarray:
    """I_z eigenvalues, ``zvalues(n)[state, k]`` in {+1/2, -1/2}."""
    return 0.5 - bits(n)


def basis_label(state: int, n: int) -> str:
    return format(state, f"0{n}b")


# -- Hamiltonians -----------------------------------------------------------


def hamiltonian_diagonal(sys: SpinSystem, frame=None) -> np.ndarray:
    """Diagonal of the weak-coupling Hamiltonian in a rotating frame (rad/s).

    The carrier-frame Hamiltonian ``-sum w_i I_zi + sum 2 pi J_ij I_zi I_zj``
    is moved to a frame rotating at ``w_i + D_i`` for each spin by adding
    ``(w_i + D_i) I_zi``. The Zeeman terms therefore cancel and only the
    frame offsets ``D_i`` survive. ``frame=None`` means every ``D_i = 0``.
    """
    from .frame import Frame

    if frame is None:
        frame = Frame.resonant(sys.n)
    if len(frame.delta_hz) != sys.n:
        raise InputError(
            f"frame has {len(frame.delta_hz)} offsets but the system has {sys.n} spins"
        )
    m = zvalues(sys.n)
    # -w_i + (w_i + D_i) folded by hand: adding the kHz offsets and then
    # subtracting them again would leave rounding noise of ~1e-11 rad/s
    diag = m @ (TWO_PI * np.asarray(frame.delta_hz, dtype=float))
    J = sys.J
    for i in range(sys.n):
        for j in range(i + 1, sys.n):
            if J[i, j]:
                diag = diag + TWO_PI * J[i, j] * m[:, i] * m[:, j]
    return diag


def build_hamiltonian(sys: SpinSystem, frame=None) -> np.ndarray:
    """Full 2^n x 2^n Hamiltonian (rad/s); always diagonal."""
    return np.diag(hamiltonian_diagonal(sys, frame)).astype(complex)


# -- states -----------------------------------------------------------------


def thermal_populations(sys: SpinSystem, a, homonuclear: bool = True, exact: bool = False):
    """High-temperature Boltzmann populations.

    ``a`` is the polarization hbar*w/(2 kT). In homonuclear mode a single
    scalar is shared by all spins and the first-order form
    ``(1 + a * sum_i s_i) / 2^n`` is used, with ``s_i = +1`` for spin-up.
    In heteronuclear mode ``a`` is one polarization per spin. ``exact``
    swaps the first-order form for normalized exponentials.
    """
    n = sys.n
    if homonuclear:
        if not np.isscalar(a):
            raise InputError("homonuclear mode takes a single polarization")
        pol = np.full(n, float(a))
    else:
        pol = np.asarray(a, dtype=float)
        if pol.shape != (n,):
            raise InputError(f"heteronuclear mode needs {n} polarizations")
    if np.any(~np.isfinite(pol)) or np.any(pol < 0):
        raise InputError("polarization must be finite and non-negative")
    signs = 1 - 2 * bits(n)
    if exact:
        w = np.exp(signs @ pol)
        return w / w.sum()
    if np.sum(pol) >= 1:
        raise InputError(
            f"polarization sum {np.sum(pol):g} >= 1 makes the lowest population non-positive"
        )
    return (1.0 + signs @ pol) / 2**n


def thermal_state(sys: SpinSystem, a, homonuclear: bool = True, exact: bool = False):
    """Thermal-equilibrium density matrix (diagonal)."""
    return np.diag(thermal_populations(sys, a, homonuclear, exact)).astype(complex)


def pure_state(sys: SpinSystem, state: int | str = 0) -> np.ndarray:
    if isinstance(state, str):
        state = int(state, 2)
    rho = np.zeros((sys.dim, sys.dim), dtype=complex)
    rho[state, state] = 1.0
    return rho


def deviation(rho: np.ndarray) -> np.ndarray:
    """Traceless part, rho - Tr(rho) I / d."""
    d = rho.shape[0]
    return rho - np.trace(rho) / d * np.eye(d)


# -- rotations --------------------------------------------------------------


def su2_rotation(angle: float, phase: float) -> np.ndarray:
    """exp(-i angle (cos(phase) I_x - sin(phase) I_y)) as a 2x2 matrix."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    # n.sigma with n = (cos p, -sin p, 0): off-diagonals e^{+ip} and e^{-ip}
    return np.array(
        [[c, -1j * s * np.exp(1j * phase)], [-1j * s * np.exp(-1j * phase), c]]
    )


def axis_phase(axis: str) -> float:
    try:
        return AXIS_PHASE[axis]
    except KeyError:
        raise InputError(f"unknown rotation axis {axis!r}; use x, y, -x or -y") from None


def rotation_unitary(sys: SpinSystem, spin, axis: str, angle: float) -> np.ndarray:
    """exp(-i angle I_axis) on one spin, embedded in the full space.

    Positive angles follow the right-hand rule about ``axis``.
    """
    if not np.isfinite(angle):
        raise InputError("rotation angle must be finite")
    k = sys.index(spin)
    return embed(su2_rotation(angle, axis_phase(axis)), k, sys.n)


def local_unitary(n: int, factors: dict[int, np.ndarray]) -> np.ndarray:
    """Kronecker product of per-spin 2x2 factors (identity where absent)."""
    out = np.ones((1, 1), dtype=complex)
    for j in range(n):
        out = np.kron(out, factors.get(j, _I2))
    return out


# -- propagation ------------------------------------------------------------


def is_hermitian(op, atol=1e-9) -> bool:
    scale = max(1.0, float(np.max(np.abs(op))))
    return np.allclose(op, op.conj().T, rtol=0, atol=atol * scale)


def propagator(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t). Diagonal Hamiltonians are exponentiated elementwise."""
    if not is_hermitian(H):
        raise InputError("Hamiltonian is not Hermitian")
    if np.count_nonzero(H - np.diag(np.diag(H))) == 0:
        return np.diag(np.exp(-1j * np.real(np.diag(H)) * t))
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(rho: np.ndarray, H: np.ndarray, t: float) -> np.ndarray:
    """Unitary evolution exp(-iHt) rho exp(iHt)."""
    if t < 0:
        raise InputError("evolution time must be non-negative")
    if not is_hermitian(H):
        raise InputError("Hamiltonian is not Hermitian")
    if np.count_nonzero(H - np.diag(np.diag(H))) == 0:
        phase = np.exp(-1j * np.real(np.diag(H)) * t)
        return rho * np.outer(phase, phase.conj())
    U = propagator(H, t)
    return U @ rho @ U.conj().T


def apply_unitary(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    return U @ rho @ U.conj().T


def coherence_order_mask(n: int) -> np.ndarray:
    """``mask[r, c, k]`` is True where states r and c differ in spin k."""
    b = bits(n)
    return b[:, None, :] != b[None, :, :]


def dephasing_factors(sys: SpinSystem, t: float) -> np.ndarray:
    rates = 1.0 / np.asarray(sys.t2_s, dtype=float)
    return np.exp(-t * (coherence_order_mask(sys.n) @ rates))


def dephase(rho: np.ndarray, sys: SpinSystem, t: float) -> np.ndarray:
    """Damp each coherence by exp(-t sum_k 1/T2_k) over the spins that flip.

    Populations are untouched; T1 is not modeled.
    """
    if t < 0:
        raise InputError("dephasing time must be non-negative")
    if t == 0:
        return rho.copy()
    return rho * dephasing_factors(sys, t)


# -- subspaces --------------------------------------------------------------


@dataclass
class SubspaceBlock:
    """A principal block of a density matrix and its normalized copy."""

    indices: np.ndarray
    block: np.ndarray
    trace: float

    @property
    def normalized(self) -> np.ndarray:
        return self.block / self.trace

    @property
    def deviation(self) -> np.ndarray:
        return deviation(self.block)


def subspace_indices(n: int, label_spin: int, value: int) -> np.ndarray:
    if value not in (0, 1):
        raise InputError("label value must be 0 or 1")
    return np.flatnonzero(bits(n)[:, label_spin] == value)


def principal_block(rho: np.ndarray, indices) -> SubspaceBlock:
    idx = np.asarray(indices)
    block = rho[np.ix_(idx, idx)]
    return SubspaceBlock(idx, block, float(np.real(np.trace(block))))


def subspace_block(rho: np.ndarray, sys: SpinSystem, label_spin, value: int = 0) -> SubspaceBlock:
    """The block of ``rho`` where ``label_spin`` is fixed to ``value``."""
    k = sys.index(label_spin)
    return principal_block(rho, subspace_indices(sys.n, k, value))


def effective_pure_scale(block: np.ndarray) -> float:
    """Polarization ``eps`` of a block of the form c I + eps |psi><psi|.

    Read off the largest eigenvalue of the traceless part, which equals
    ``eps (1 - 1/d)`` for an exact effective pure state.
    """
    d = block.shape[0]
    top = np.linalg.eigvalsh(deviation(block))[-1]
    return float(top * d / (d - 1))


def effective_pure_state(block: np.ndarray, scale: float | None = None) -> np.ndarray:
    """Unit-trace matrix that behaves like ``block`` up to the identity part.

    Adds I/d to the traceless part divided by ``scale``. With the default
    scale an ideal effective pure state comes back as an exact projector.
    """
    d = block.shape[0]
    if scale is None:
        scale = effective_pure_scale(block)
    if scale == 0:
        raise InputError("block has no deviation from the identity")
    return deviation(block) / scale + np.eye(d) / d
