import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitary_dirac import algebra as al
from unitary_dirac.errors import GridError, LorentzError
from unitary_dirac.fields import equation_residual
from unitary_dirac.grid import GridField

G = [al.gamma(mu) for mu in range(4)]
I4 = np.eye(4)


def test_gamma0_is_diagonal():
    assert np.array_equal(G[0], np.diag([1, 1, -1, -1]))


@pytest.mark.parametrize("mu", range(4))
@pytest.mark.parametrize("nu", range(4))
def test_clifford_relation_exact(mu, nu):
    assert np.array_equal(al.anticommutator(G[mu], G[nu]), 2 * al.METRIC[mu, nu] * I4)


def test_gamma1_squared():
    assert np.array_equal(G[1] @ G[1], -I4)


def test_gamma_index_out_of_range():
    with pytest.raises(IndexError):
        al.gamma(4)
    with pytest.raises(IndexError):
        al.rho(0)


def test_rho_blocks_and_products():
    assert np.array_equal(al.rho(3), np.diag([1, 1, -1, -1]))
    assert np.array_equal(al.rho(1) @ al.rho(2), 1j * al.rho(3))


def test_u_diagonalizes_rho2():
    U = al.U_DIAG
    assert np.allclose(U @ al.rho(2) @ np.linalg.inv(U), -al.rho(3), atol=1e-15, rtol=0)


@pytest.mark.parametrize("kind", ["space_inv", "time_inv_spinor", "particle_conj_matrix"])
def test_discrete_operators_unitary(kind):
    M = al.discrete_operator(kind)
    assert np.array_equal(M @ M.conj().T, I4)


def test_u_is_unitary():
    assert al.is_unitary(al.U_DIAG, atol=1e-15)


def test_time_inversion_spinor_relations():
    T = al.discrete_operator("time_inv_spinor")
    Ti = np.linalg.inv(T)
    assert np.allclose(T @ G[0] @ Ti, -G[0])
    for i in (1, 2, 3):
        assert np.allclose(T @ G[i] @ Ti, G[i])


def test_space_inversion_relations():
    S = al.discrete_operator("space_inv")
    Si = np.linalg.inv(S)
    assert np.allclose(S @ G[0] @ Si, G[0])
    for i in (1, 2, 3):
        assert np.allclose(S @ G[i] @ Si, -G[i])


def test_particle_conjugation_matrix_relation():
    O = al.discrete_operator("particle_conj_matrix")
    Oi = np.linalg.inv(O)
    for mu in range(4):
        assert np.allclose(O @ G[mu].conj() @ Oi, G[mu], atol=1e-15)


def test_unknown_discrete_operator():
    with pytest.raises(ValueError):
        al.discrete_operator("charge")


def test_spinor_lorentz_identity():
    assert np.allclose(al.spinor_lorentz(np.eye(4)), I4, atol=1e-15)


def test_spinor_lorentz_boost():
    S = al.spinor_lorentz(al.boost(0.5, 3))
    lhs = S @ G[0] @ np.linalg.inv(S)
    assert np.allclose(lhs, math.cosh(0.5) * G[0] - math.sinh(0.5) * G[3], atol=1e-12)


def test_two_pi_rotation_is_minus_identity():
    S = al.spinor_from_generator(2 * math.pi * al.rotation_generator(3))
    assert np.allclose(S, -I4, atol=1e-12)


def test_principal_log_loses_double_cover():
    # the vector matrix of a 2 pi rotation is the identity, so only the generator route sees -I
    a = al.rotation(2 * math.pi, 3)
    assert np.allclose(al.spinor_lorentz(a, tol=1e-10), I4, atol=1e-10)


def test_random_lorentz_covariance():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = al.random_restricted_lorentz(rng)
        S = al.spinor_lorentz(a)
        Si = np.linalg.inv(S)
        for mu in range(4):
            rhs = sum(a[mu, nu] * G[nu] for nu in range(4))
            assert np.max(np.abs(S @ G[mu] @ Si - rhs)) < 1e-10


def test_non_lorentz_rejected():
    with pytest.raises(LorentzError):
        al.spinor_lorentz(np.diag([1.0, 2.0, 1.0, 1.0]))
    with pytest.raises(LorentzError):
        al.spinor_lorentz(np.diag([1.0, -1.0, 1.0, 1.0]))


def _spacetime(func, nt=9, nx=9, ht=0.1, hx=0.1, ncomp=0):
    t = -(nt // 2) * ht + ht * np.arange(nt)
    x = -(nx // 2) * hx + hx * np.arange(nx)
    T, X = np.meshgrid(t, x, indexing="ij")
    return GridField(func(T, X), (ht, hx), (t[0], x[0]), ncomp, "1+1")


def test_time_reverse_plane_wave():
    E, p = 1.3, 0.4
    f = _spacetime(lambda t, x: np.exp(1j * (p * x - E * t)))
    expected = _spacetime(lambda t, x: np.exp(1j * (p * x + E * t)))
    assert np.allclose(al.time_reverse(f).values, expected.values, atol=1e-15)


def test_time_reverse_involution_exact():
    rng = np.random.default_rng(0)
    f = _spacetime(lambda t, x: rng.normal(size=t.shape) + 1j * rng.normal(size=t.shape))
    assert np.array_equal(al.time_reverse(al.time_reverse(f)).values, f.values)


def test_even_field_unchanged():
    f = _spacetime(lambda t, x: np.cos(t) * np.exp(-x * x))
    assert np.array_equal(al.time_reverse(f).values, f.values)


def test_parity_projectors():
    rng = np.random.default_rng(1)
    f = _spacetime(lambda t, x: rng.normal(size=t.shape) + 1j * rng.normal(size=t.shape))
    plus = al.time_parity_project(f, 1)
    minus = al.time_parity_project(f, -1)
    assert np.array_equal(al.time_parity_project(plus, 1).values, plus.values)
    assert np.allclose(plus.values + minus.values, f.values, atol=1e-15)
    assert np.allclose(al.time_parity_project(plus, -1).values, 0, atol=1e-15)


def test_parity_projection_of_oscillation():
    E = 2.0
    f = _spacetime(lambda t, x: np.exp(-1j * E * t) + 0 * x)
    T = f.mesh()[0]
    assert np.allclose(np.abs(al.time_parity_project(f, 1).values), np.abs(np.cos(E * T)), atol=1e-14)


def test_time_reverse_needs_symmetric_grid():
    f = GridField(np.zeros((10, 9)), (0.1, 0.1), (-0.5, 0.0), 0, "1+1")
    with pytest.raises(GridError):
        al.time_reverse(f)


def test_particle_conjugate_twice_is_phase():
    rng = np.random.default_rng(2)
    v = rng.normal(size=(4, 9, 9)) + 1j * rng.normal(size=(4, 9, 9))
    f = GridField(v, (0.1, 0.1), (-0.4, -0.4), 4, "1+1")
    twice = al.particle_conjugate(al.particle_conjugate(f)).values
    assert np.allclose(twice, -v, atol=1e-14)


def test_particle_conjugate_zero():
    f = GridField(np.zeros((4, 9, 9), dtype=complex), (0.1, 0.1), (-0.4, -0.4), 4, "1+1")
    assert not np.any(al.particle_conjugate(f).values)


def test_particle_conjugate_rest_spinor_solves_negative_mass_equation():
    m, h = 1.0, 1e-5
    u = np.array([1, 0, 0, 0], dtype=complex)
    f = _spacetime(lambda t, x: u[:, None, None] * np.exp(-1j * m * t)[None], ht=h, hx=h, ncomp=4)
    assert equation_residual(f, None, 1.0, m) < 1e-10
    g = al.particle_conjugate(f)
    assert equation_residual(g, None, -1.0, -m) < 1e-10


def test_energy_operator_rest():
    ev = np.sort(np.linalg.eigvals(al.energy_operator_matrix([0, 0, 0], 0.0, [0, 0, 0])).real)
    assert np.allclose(ev, [-1, -1, 1, 1], atol=1e-15)


def test_energy_operator_free_dispersion():
    p = 0.75
    ev = np.sort(np.linalg.eigvals(al.energy_operator_matrix([p, 0, 0], 0.0, [0, 0, 0])).real)
    e = math.hypot(p, 1.0)
    assert np.allclose(ev, [-e, -e, e, e], atol=1e-14)


def test_energy_operator_pairs_over_draws():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        H = al.energy_operator_matrix(rng.normal(size=3), rng.normal(), rng.normal(size=3),
                                      rng.normal(), abs(rng.normal()) + 0.1)
        worst = max(worst, al.pair_spectrum(np.linalg.eigvals(H)))
    assert worst < 1e-12


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
@settings(max_examples=50, deadline=None)
def test_commutator_coefficient_any_point(x):
    assert abs(al.common_commutator_check(np.array(x)) - (-4j)) < 1e-12


def test_commutator_with_linear_field():
    grad = np.array([1.0, 0.0, 0.0, 0.0])  # f = X^0
    for x0 in (0.0, 5.0):
        c = al.common_commutator_check(np.array([x0, 0.3, 0.0, -1.0]), 0.0, grad)
        assert abs(c + 4j) < 1e-12


def test_four_vector_square():
    p = al.FourVector(2.0, 1.0, 0.5, 0.25)
    assert p.square() == 4.0 - 1.0 - 0.25 - 0.0625
