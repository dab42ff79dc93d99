import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinlab import core
from spinlab.errors import InputError, SpinSystemError
from spinlab.frame import Frame
from spinlab.sequences import phase_distance
from spinlab.system import SpinSystem

TWO_PI = 2 * np.pi
angles = st.floats(-4 * np.pi, 4 * np.pi, allow_nan=False)


def one_spin(offset=100.0, t2=6.0):
    return SpinSystem.build(("S",), (offset,), t2_s=t2)


def bc_only(J=53.8):
    return SpinSystem.build("ABC", (0, -13200, 9500), {("B", "C"): J})


@st.composite
def spin_systems(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    labels = "ABCDEF"[:n]
    offsets = draw(st.lists(st.floats(-2e4, 2e4), min_size=n, max_size=n))
    J = {}
    for i in range(n):
        for j in range(i + 1, n):
            J[(labels[i], labels[j])] = draw(st.floats(-200, 200))
    return SpinSystem.build(labels, offsets, J)


@st.composite
def density_matrices(draw, dim=8):
    re = draw(st.lists(st.floats(-1, 1), min_size=dim * dim, max_size=dim * dim))
    im = draw(st.lists(st.floats(-1, 1), min_size=dim * dim, max_size=dim * dim))
    M = np.reshape(re, (dim, dim)) + 1j * np.reshape(im, (dim, dim))
    rho = M @ M.conj().T + 1e-3 * np.eye(dim)
    return rho / np.trace(rho)


# -- Hamiltonian ------------------------------------------------------------


def test_resonant_single_spin_hamiltonian_is_zero():
    H = core.build_hamiltonian(one_spin(100.0), Frame.resonant(1))
    assert np.array_equal(H, np.zeros((2, 2)))


def test_carrier_frame_keeps_larmor_offset():
    H = core.build_hamiltonian(one_spin(100.0), Frame.carrier(one_spin(100.0)))
    assert np.allclose(np.diag(H).real, TWO_PI * 100 * np.array([-0.5, 0.5]))


def test_two_spin_coupling_diagonal():
    sys = SpinSystem.build("AB", (0, 0), {("A", "B"): 53.8})
    H = core.build_hamiltonian(sys, Frame.resonant(2))
    assert np.allclose(np.diag(H).real, TWO_PI * 53.8 * np.array([0.25, -0.25, -0.25, 0.25]), atol=1e-12)


def test_three_spin_ground_energy(sys3):
    H = core.build_hamiltonian(sys3, Frame.resonant(3))
    J = sys3.J
    expected = TWO_PI * (J[0, 1] + J[0, 2] + J[1, 2]) / 4
    assert H[0, 0].real == pytest.approx(expected, abs=1e-9)


def test_frame_dimension_mismatch(sys3):
    with pytest.raises(InputError):
        core.build_hamiltonian(sys3, Frame.resonant(2))


@given(spin_systems(), st.lists(st.floats(-500, 500), min_size=4, max_size=4))
def test_hamiltonian_hermitian_and_commutes_with_iz(sys, deltas):
    H = core.build_hamiltonian(sys, Frame(tuple(deltas[: sys.n])))
    assert np.array_equal(H, H.conj().T)
    for k in range(sys.n):
        Z = core.iz(sys.n, k)
        assert np.array_equal(H @ Z, Z @ H)


# -- thermal states ---------------------------------------------------------


def test_thermal_zero_polarization(sys3):
    assert np.allclose(core.thermal_state(sys3, 0.0), np.eye(8) / 8, atol=0)


def test_thermal_populations_pattern(sys3):
    p = core.thermal_populations(sys3, 0.01)
    assert p[0] == pytest.approx(0.128750, abs=1e-15)
    assert p[7] == pytest.approx(0.121250, abs=1e-15)
    pattern = np.array([3, 1, 1, -1, 1, -1, -1, -3])
    assert np.allclose(p, (1 + 0.01 * pattern) / 8, atol=1e-15)


@given(st.floats(0, 0.33))
def test_thermal_normalized(a):
    sys = SpinSystem.build("ABC", (0, 0, 0))
    assert abs(core.thermal_populations(sys, a).sum() - 1) < 1e-15


@pytest.mark.parametrize("a", [-1e-3, 1 / 3, 0.5, np.nan])
def test_thermal_out_of_range(sys3, a):
    with pytest.raises(InputError):
        core.thermal_state(sys3, a)


def test_heteronuclear_reduces_to_homonuclear(sys3):
    a = 1e-4
    het = core.thermal_populations(sys3, [a, a, a], homonuclear=False)
    assert np.allclose(het, core.thermal_populations(sys3, a), atol=1e-16)


def test_heteronuclear_first_order_matches_boltzmann(sys3):
    pol = np.array([1e-4, 4e-4, 2.5e-5])
    first = core.thermal_populations(sys3, pol, homonuclear=False)
    exact = core.thermal_populations(sys3, pol, homonuclear=False, exact=True)
    # difference is second order in the polarizations
    assert np.max(np.abs(first - exact)) < np.sum(pol) ** 2


def test_heteronuclear_needs_one_value_per_spin(sys3):
    with pytest.raises(InputError):
        core.thermal_populations(sys3, [1e-4, 1e-4], homonuclear=False)


# -- rotations --------------------------------------------------------------


def test_y90_on_up():
    U = core.rotation_unitary(one_spin(), "S", "y", np.pi / 2)
    assert np.allclose(U @ np.array([1, 0]), np.array([1, 1]) / np.sqrt(2), atol=1e-15)


def test_x180_squared_is_minus_identity():
    X = core.rotation_unitary(one_spin(), "S", "x", np.pi)
    assert np.allclose(X @ X, -np.eye(2), atol=1e-15)


def test_composite_y_x_minus_y_is_z90():
    s = one_spin()
    Y = core.rotation_unitary(s, "S", "y", np.pi / 2)
    X = core.rotation_unitary(s, "S", "x", np.pi / 2)
    Yb = core.rotation_unitary(s, "S", "-y", np.pi / 2)
    Z = np.diag(np.exp(-1j * np.pi / 4 * np.array([1, -1])))
    assert phase_distance(Yb @ X @ Y, Z) < 1e-15


def test_rotation_unknown_spin(sys3):
    with pytest.raises(SpinSystemError, match="unknown spin Q"):
        core.rotation_unitary(sys3, "Q", "x", 1.0)


def test_rotation_unknown_axis(sys3):
    with pytest.raises(InputError):
        core.rotation_unitary(sys3, "A", "z", 1.0)


@given(st.sampled_from("ABC"), st.sampled_from(["x", "y", "-x", "-y"]), angles)
def test_rotation_unitary_and_invertible(spin, axis, angle):
    sys = bc_only()
    U = core.rotation_unitary(sys, spin, axis, angle)
    assert np.max(np.abs(U.conj().T @ U - np.eye(8))) < 1e-12
    V = core.rotation_unitary(sys, spin, axis, -angle)
    assert np.max(np.abs(U @ V - np.eye(8))) < 1e-12


@given(angles)
def test_opposite_axes_are_inverse(angle):
    s = one_spin()
    U = core.rotation_unitary(s, "S", "x", angle) @ core.rotation_unitary(s, "S", "-x", angle)
    assert np.max(np.abs(U - np.eye(2))) < 1e-12


# -- evolution --------------------------------------------------------------


def test_evolve_zero_time(sys3):
    rho = core.thermal_state(sys3, 0.01) + 0.01 * core.ix(3, 1)
    H = core.build_hamiltonian(sys3)
    assert np.allclose(core.evolve(rho, H, 0.0), rho, atol=0)


def _ix_b_after(t):
    sys = bc_only()
    rho = np.eye(8) / 8 + 1e-3 * core.ix(3, 1)
    out = core.evolve(rho, core.build_hamiltonian(sys, Frame.resonant(3)), t)
    return np.trace(out @ core.ix(3, 1)).real, rho


def test_antiphase_after_half_j():
    val, _ = _ix_b_after(1 / (2 * 53.8))
    assert abs(val) < 1e-15


def test_inverted_after_one_over_j():
    val, rho = _ix_b_after(1 / 53.8)
    start = np.trace(rho @ core.ix(3, 1)).real
    assert val == pytest.approx(-start, rel=1e-12)


def test_evolve_rejects_negative_time(sys3):
    with pytest.raises(InputError):
        core.evolve(np.eye(8) / 8, core.build_hamiltonian(sys3), -1e-3)


def test_evolve_rejects_non_hermitian(sys3):
    H = core.build_hamiltonian(sys3) + 1j * np.eye(8)
    with pytest.raises(InputError):
        core.evolve(np.eye(8) / 8, H, 1e-3)


@given(density_matrices(), st.floats(0, 1.0), st.floats(0, 2 * np.pi))
def test_evolve_preserves_spectrum(rho, t, phi):
    sys = bc_only()
    # a non-diagonal Hamiltonian too: rotate the coupling one into a new basis
    R = core.rotation_unitary(sys, "B", "x", phi)
    H = R @ core.build_hamiltonian(sys, Frame((10.0, -20.0, 5.0))) @ R.conj().T
    out = core.evolve(rho, H, t)
    assert abs(np.trace(out) - np.trace(rho)) < 1e-12
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    assert np.allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-10)


@given(st.floats(0, 10.0))
def test_diagonal_propagator_unitary(t):
    sys = bc_only()
    U = core.propagator(core.build_hamiltonian(sys), t)
    assert np.max(np.abs(U.conj().T @ U - np.eye(8))) < 1e-12


# -- dephasing --------------------------------------------------------------


def test_dephase_zero_time(sys3):
    rho = np.full((8, 8), 0.1 + 0.05j)
    assert np.array_equal(core.dephase(rho, sys3, 0.0), rho)


def test_dephase_infinite_t2():
    sys = SpinSystem.build("AB", (0, 0), t2_s=np.inf)
    rho = np.full((4, 4), 0.25 + 0.1j)
    assert np.array_equal(core.dephase(rho, sys, 3.0), rho)


def test_dephase_single_coherence():
    sys = one_spin(t2=4.0)
    rho = np.array([[0.5, 0.2], [0.2, 0.5]], dtype=complex)
    out = core.dephase(rho, sys, 0.7)
    assert out[0, 1].real == pytest.approx(0.2 * np.exp(-0.175), rel=1e-14)
    assert np.exp(-0.175) == pytest.approx(0.8395, abs=1e-4)
    assert out[0, 0] == rho[0, 0]


@given(density_matrices(), st.floats(0, 20.0))
def test_dephase_never_grows(rho, t):
    sys = SpinSystem.build("ABC", (0, 0, 0), t2_s=(4.0, 6.0, 8.0))
    out = core.dephase(rho, sys, t)
    assert np.all(np.abs(out) <= np.abs(rho) + 1e-18)
    assert np.array_equal(np.diag(out), np.diag(rho))


# -- subspaces --------------------------------------------------------------


def labeled_state(a):
    return np.diag((1 + a * np.array([3, -1, -1, -1, 1, 1, 1, -3])) / 8).astype(complex)


def test_labeled_block_is_effective_pure(sys3):
    a = 1e-3
    blk = core.subspace_block(labeled_state(a), sys3, "A", 0)
    assert np.allclose(np.diag(blk.block).real, (1 + a * np.array([3, -1, -1, -1])) / 8, atol=1e-16)
    assert blk.trace == pytest.approx(0.5)
    assert np.allclose(np.diag(blk.normalized).real.sum(), 1.0)
    assert core.effective_pure_scale(blk.block) == pytest.approx(a / 2, rel=1e-10)
    eff = core.effective_pure_state(blk.block)
    assert np.allclose(eff, np.diag([1, 0, 0, 0]), atol=1e-10)


def test_even_parity_thermal_block(sys3):
    a = 1e-3
    blk = core.principal_block(core.thermal_state(sys3, a), [0b000, 0b011, 0b101, 0b110])
    assert np.allclose(np.diag(blk.block).real, (1 + a * np.array([3, -1, -1, -1])) / 8, atol=1e-16)
    assert np.allclose(core.effective_pure_state(blk.block), np.diag([1, 0, 0, 0]), atol=1e-10)


def test_zero_polarization_block_is_mixed(sys3):
    blk = core.subspace_block(core.thermal_state(sys3, 0.0), sys3, "A", 0)
    assert np.allclose(blk.normalized, np.eye(4) / 4, atol=0)
    with pytest.raises(InputError):
        core.effective_pure_state(blk.block)


def test_label_value_checked(sys3):
    with pytest.raises(InputError):
        core.subspace_block(np.eye(8), sys3, "A", 2)


def test_bit_order_a_is_most_significant():
    assert core.basis_label(0b100, 3) == "100"
    assert list(core.bits(3)[4]) == [1, 0, 0]
    assert list(core.zvalues(3)[4]) == [-0.5, 0.5, 0.5]
