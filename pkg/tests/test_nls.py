import math

import numpy as np
import pytest

from unitary_dirac import nls
from unitary_dirac.errors import GridError, NormalizationError, StabilityError
from unitary_dirac.grid import GridField


# evolution


def test_soliton_keeps_shape_and_rotates_phase():
    s0 = nls.sech_soliton(dt=1e-3)
    s1 = nls.evolve(s0, 2.0)
    assert s1.t == pytest.approx(2.0)
    assert np.max(np.abs(np.abs(s1.psi.values) - 1 / np.cosh(s0.x))) < 1e-6
    exact = np.exp(1j * s1.t / 2) / np.cosh(s0.x)
    assert np.max(np.abs(s1.psi.values - exact)) < 1e-6


def test_splitting_is_second_order():
    errs = []
    for dt in (0.02, 0.01, 0.005):
        s0 = nls.sech_soliton(dt=dt)
        s1 = nls.evolve(s0, 1.0)
        errs.append(np.max(np.abs(s1.psi.values - np.exp(0.5j) * s0.psi.values)))
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(4.0, rel=0.02)


def test_free_gaussian_variance_grows_quadratically():
    sigma0, m = 1.0, 1.0
    x, h, origin = nls.line_grid(512, 80.0)
    psi0 = np.exp(-x * x / (4 * sigma0**2))
    psi0 /= math.sqrt(np.sum(np.abs(psi0) ** 2) * h)
    state = nls.from_samples(psi0, h, origin, g=0.0, dt=0.01, m=m)
    for T in (1.0, 2.0, 4.0):
        rho = np.abs(nls.evolve(state, T).psi.values) ** 2
        var = np.sum(x * x * rho) * h
        assert var == pytest.approx(sigma0**2 + T**2 / (4 * m * m * sigma0**2), rel=1e-8)


def test_zero_field_stays_zero():
    x, h, origin = nls.line_grid(64, 10.0)
    s = nls.evolve(nls.from_samples(np.zeros(64), h, origin), 0.5)
    assert not np.any(s.psi.values)
    assert nls.conserved_quantities(s) == (0.0, 0.0)


def test_galilean_boost_translates():
    v = 1.0
    s0 = nls.sech_soliton(dt=1e-3)
    boosted = nls.from_samples(s0.psi.values * np.exp(1j * v * s0.x), s0.h, s0.psi.origin[0], dt=1e-3)
    s1 = nls.evolve(boosted, 2.0)
    peak = s0.x[np.argmax(np.abs(s1.psi.values))]
    assert abs(peak - v * 2.0) <= s0.h
    assert np.max(np.abs(np.abs(s1.psi.values) - 1 / np.cosh(s0.x - 2.0))) < 1e-5


def test_duration_must_be_whole_steps():
    with pytest.raises(ValueError):
        nls.evolve(nls.sech_soliton(n=64, dt=0.1), 0.25)
    with pytest.raises(ValueError):
        nls.evolve(nls.sech_soliton(n=64), -1.0)


# conserved quantities


def test_soliton_norm_and_energy_closed_form():
    s = nls.sech_soliton()
    norm, energy = nls.conserved_quantities(s)
    kinetic = 0.5 * (2.0 - 4.0 / 3.0)  # |d sech|^2 = sech^2 - sech^4
    interaction = 0.5 * -1.0 * 4.0 / 3.0
    assert norm == pytest.approx(2.0, abs=1e-12)
    assert energy == pytest.approx(kinetic + interaction, abs=1e-12)
    assert energy == pytest.approx(-1.0 / 3.0, abs=1e-12)


def test_global_phase_invariance():
    s = nls.sech_soliton(n=256, length=30.0)
    t = nls.from_samples(s.psi.values * np.exp(0.7j), s.h, s.psi.origin[0])
    assert nls.conserved_quantities(t) == pytest.approx(nls.conserved_quantities(s), abs=1e-14)


def test_cubic_drift_bounds():
    T = 2.0
    s0 = nls.sech_soliton(dt=1e-3)
    n0, e0 = nls.conserved_quantities(s0)
    n1, e1 = nls.conserved_quantities(nls.evolve(s0, T))
    assert abs(n1 - n0) / T <= 1e-10
    assert abs(e1 - e0) / T <= 1e-8


def test_choquard_mode():
    with pytest.raises(GridError):
        nls.sech_soliton(n=1024, mode="choquard")
    s0 = nls.sech_soliton(n=513, length=40.0, mode="choquard", g=0.5, dt=1e-3)
    s1 = nls.evolve(s0, 1.0)
    assert nls.conserved_quantities(s1)[0] == pytest.approx(nls.conserved_quantities(s0)[0], abs=1e-10)
    assert np.all(np.isfinite(nls.conserved_quantities(s1)))


def test_self_potential_is_poisson_solution():
    x, h, origin = nls.line_grid(401, 40.0)
    rho = np.exp(-x * x)
    phi = nls.self_potential(rho, h)
    lap = (np.roll(phi, -1) - 2 * phi + np.roll(phi, 1)) / h**2
    core = np.abs(x) < 5
    assert np.max(np.abs(-lap[core] - rho[core])) < 1e-10


def test_stability_guard():
    with pytest.raises(StabilityError):
        nls.evolve(nls.sech_soliton(n=128, length=20.0, g=-200.0, dt=1e-3), 0.01)


def test_state_validation():
    with pytest.raises(ValueError):
        nls.sech_soliton(n=64, mode="quintic")
    with pytest.raises(ValueError):
        nls.sech_soliton(n=64, dt=0.0)


# Hamiltonian expectation values


def cube_spinor(func, n=40, h=0.5):
    o = nls.cell_centred_grid(n, h)
    f = GridField.from_function(lambda x, y, z: np.stack(func(x, y, z)), (n,) * 3, (h,) * 3, (o,) * 3,
                                ncomp=2)
    norm = math.sqrt(np.sum(np.abs(f.values) ** 2) * f.cell_volume)
    return f.replace(f.values / norm)


def coulomb(psi):
    X, Y, Z = psi.mesh()
    return GridField(-1.0 / np.sqrt(X * X + Y * Y + Z * Z), psi.spacing, psi.origin)


def p_half(x, y, z):
    r = np.sqrt(x * x + y * y + z * z)
    return [z * np.exp(-r / 2), (x + 1j * y) * np.exp(-r / 2)]


def p_three_halves(x, y, z):
    r = np.sqrt(x * x + y * y + z * z)
    return [(x + 1j * y) * np.exp(-r / 2), 0 * x]


def s_state(x, y, z):
    r = np.sqrt(x * x + y * y + z * z)
    return [np.exp(-r / 2), 0 * x]


def test_plane_wave_kinetic_only():
    n, h = 16, 0.5
    k = 2 * math.pi * 3 / (n * h)
    psi = cube_spinor(lambda x, y, z: [np.exp(1j * k * x), 0 * x], n, h)
    kin, el, zee, so = nls.hamiltonian_terms(psi, m=2.0)
    assert kin == pytest.approx(k * k / 4.0, rel=1e-12)
    assert (el, zee, so) == (0.0, 0.0, 0.0)


def test_spin_orbit_reversed_order():
    half = cube_spinor(p_half)
    three = cube_spinor(p_three_halves)
    so_half = nls.hamiltonian_terms(half, coulomb(half))[3]
    so_three = nls.hamiltonian_terms(three, coulomb(three))[3]
    assert so_half > 0 > so_three
    assert so_half > so_three
    assert so_half / so_three == pytest.approx(-2.0, rel=0.02)


def test_s_state_has_no_spin_orbit():
    psi = cube_spinor(s_state)
    kin, el, zee, so = nls.hamiltonian_terms(psi, coulomb(psi))
    assert abs(so) < 1e-12 and el < 0 < kin


def test_zeeman_follows_lande_factor():
    B = (0.0, 0.0, 0.01)
    for func, gm in ((p_three_halves, 2.0), (p_half, 1.0 / 3.0)):
        psi = cube_spinor(func)
        zee = nls.hamiltonian_terms(psi, B=B)[2]
        assert zee == pytest.approx(-0.5 * B[2] * gm, rel=0.02)


def test_zeeman_from_vector_potential_matches_constant_field():
    psi = cube_spinor(p_three_halves, n=24, h=0.8)
    X, Y, Z = psi.mesh()
    Bz = 0.02
    A = GridField(np.stack([-Bz * Y / 2, Bz * X / 2, 0 * Z]), psi.spacing, psi.origin, 3)
    z_a = nls.hamiltonian_terms(psi, aI=A)[2]
    z_b = nls.hamiltonian_terms(psi, B=(0, 0, Bz))[2]
    assert z_a == pytest.approx(z_b, rel=1e-10)


def test_hamiltonian_input_checks():
    psi = cube_spinor(s_state, n=16)
    with pytest.raises(NormalizationError):
        nls.hamiltonian_terms(psi.replace(2 * psi.values))
    with pytest.raises(GridError):
        nls.hamiltonian_terms(GridField(np.zeros((4, 8, 8, 8)), (1,) * 3, (0,) * 3, 4))
    n, h = 9, 0.5
    odd = GridField(np.ones((2, n, n, n)) / math.sqrt(2 * (n * h) ** 3), (h,) * 3, (-(n // 2) * h,) * 3, 2)
    with pytest.raises(GridError):
        nls.hamiltonian_terms(odd, GridField(np.ones((n, n, n)), (h,) * 3, odd.origin))
    with pytest.raises(GridError):
        nls.cell_centred_grid(9, 0.5)
