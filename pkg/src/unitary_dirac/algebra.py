"""Dirac-representation gamma matrices, rho matrices and discrete operators.

All matrices are 4x4 complex numpy arrays in the standard Dirac
(Bjorken-Drell) basis. Index convention: ``METRIC = diag(+1, -1, -1, -1)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .errors import GridError, LorentzError
from .grid import GridField, is_time_symmetric

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _block(a, b, c, d) -> np.ndarray:
    return np.block([[a, b], [c, d]])


_Z2 = np.zeros((2, 2), dtype=complex)
_GAMMA = (
    _block(I2, _Z2, _Z2, -I2),
    *(_block(_Z2, s, -s, _Z2) for s in PAULI),
)
_RHO = (
    _block(_Z2, I2, I2, _Z2),
    _block(_Z2, -1j * I2, 1j * I2, _Z2),
    _block(I2, _Z2, _Z2, -I2),
)

# diagonalizes rho_2: U rho_2 U^-1 = -rho_3
U_DIAG = _block(I2, 1j * I2, 1j * I2, I2) / np.sqrt(2.0)


@dataclass(frozen=True)
class FourVector:
    """Contravariant (t, x, y, z) components."""

    t: float
    x: float
    y: float
    z: float

    def array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z], dtype=float)

    def lower(self) -> np.ndarray:
        return METRIC @ self.array()

    def dot(self, other: "FourVector") -> float:
        return float(self.array() @ METRIC @ other.array())

    def square(self) -> float:
        return self.dot(self)

    @property
    def spatial(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def of(cls, arr) -> "FourVector":
        t, x, y, z = (float(v) for v in arr)
        return cls(t, x, y, z)


def gamma(mu: int) -> np.ndarray:
    if mu not in (0, 1, 2, 3):
        raise IndexError(f"gamma index must be 0..3, got {mu}")
    return _GAMMA[mu].copy()


def rho(i: int) -> np.ndarray:
    if i not in (1, 2, 3):
        raise IndexError(f"rho index must be 1..3, got {i}")
    return _RHO[i - 1].copy()


def slash(p) -> np.ndarray:
    """gamma^mu p_mu for contravariant components ``p``."""
    p_low = METRIC @ np.asarray(p, dtype=float)
    return sum(p_low[mu] * _GAMMA[mu] for mu in range(4))


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_unitary(m: np.ndarray, atol: float = 0.0) -> bool:
    return bool(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) <= atol)


def is_hermitian(m: np.ndarray, atol: float = 0.0) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= atol)


def is_antihermitian(m: np.ndarray, atol: float = 0.0) -> bool:
    return bool(np.max(np.abs(m + m.conj().T)) <= atol)


def discrete_operator(kind: str) -> np.ndarray:
    """Spinor-space factor of a discrete transformation.

    ``space_inv`` -> gamma^0, ``time_inv_spinor`` -> gamma^1 gamma^2 gamma^3,
    ``particle_conj_matrix`` -> i gamma^0 gamma^1 gamma^3.
    """
    g = _GAMMA
    if kind == "space_inv":
        return g[0].copy()
    if kind == "time_inv_spinor":
        return g[1] @ g[2] @ g[3]
    if kind == "particle_conj_matrix":
        return 1j * g[0] @ g[1] @ g[3]
    raise ValueError(f"unknown discrete operator {kind!r}")


def spin_generators() -> np.ndarray:
    """S^{mu nu} = (i/4)[gamma^mu, gamma^nu], shape (4, 4, 4, 4)."""
    s = np.zeros((4, 4, 4, 4), dtype=complex)
    for mu in range(4):
        for nu in range(4):
            s[mu, nu] = 0.25j * commutator(_GAMMA[mu], _GAMMA[nu])
    return s


_S = spin_generators()


def check_lorentz(a: np.ndarray, tol: float = 1e-12) -> None:
    a = np.asarray(a, dtype=float)
    if a.shape != (4, 4):
        raise LorentzError("Lorentz matrix must be 4x4")
    defect = np.max(np.abs(a @ METRIC @ a.T - METRIC))
    if defect > tol:
        raise LorentzError(f"matrix is not Lorentz: |a g a^T - g| = {defect:.3e}")
    if np.linalg.det(a) < 0 or a[0, 0] < 1.0 - tol:
        raise LorentzError("only the restricted (proper orthochronous) subgroup is supported")


def spinor_from_generator(omega_mixed: np.ndarray) -> np.ndarray:
    """Spinor matrix for the vector generator omega^mu_nu (a = expm(omega)).

    Taking the generator directly keeps the double cover: a 2*pi rotation
    gives -I even though its vector matrix is the identity.
    """
    omega_low = METRIC @ np.asarray(omega_mixed, dtype=float)
    arg = np.einsum("mn,mnij->ij", omega_low, _S)
    return expm(0.5j * arg)


def spinor_lorentz(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """L_s with L_s gamma^mu L_s^-1 = a^mu_nu gamma^nu, from the principal log of ``a``."""
    check_lorentz(a, tol)
    omega = logm(np.asarray(a, dtype=float))
    omega = np.real_if_close(omega, tol=1000)
    if np.iscomplexobj(omega):
        raise LorentzError("principal logarithm is not real; input outside restricted subgroup")
    return spinor_from_generator(omega)


def boost(rapidity: float, axis: int = 3) -> np.ndarray:
    """Passive boost: x'^0 = cosh(eta) x^0 - sinh(eta) x^axis."""
    a = np.eye(4)
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    a[0, 0] = a[axis, axis] = ch
    a[0, axis] = a[axis, 0] = -sh
    return a


def rotation_generator(axis: int) -> np.ndarray:
    """omega^mu_nu for a unit-angle rotation about spatial ``axis`` (1..3)."""
    i, j = [k for k in (1, 2, 3) if k != axis]
    w = np.zeros((4, 4))
    w[i, j] = -1.0
    w[j, i] = 1.0
    return w


def rotation(angle: float, axis: int = 3) -> np.ndarray:
    return expm(angle * rotation_generator(axis))


def random_restricted_lorentz(rng: np.random.Generator, max_rapidity: float = 1.5) -> np.ndarray:
    """Random rotation times random boost."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    rot = np.eye(4)
    rot[1:, 1:] = q
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    eta = rng.uniform(0.0, max_rapidity)
    b = np.eye(4)
    b[0, 0] = np.cosh(eta)
    b[0, 1:] = b[1:, 0] = np.sinh(eta) * n
    b[1:, 1:] += (np.cosh(eta) - 1.0) * np.outer(n, n)
    return rot @ b


# ---------------------------------------------------------------------------
# time inversion and particle conjugation on grid fields


def _require_time_symmetric(f: GridField) -> None:
    if f.dims != "1+1":
        raise GridError("time inversion acts on 1+1 space-time fields")
    if not is_time_symmetric(f):
        raise GridError("time grid must be symmetric about t = 0 with an odd sample count")


def time_reverse(f: GridField) -> GridField:
    """Psi'(t, x) = Psi(-t, x): reverses the sample order along the t axis."""
    _require_time_symmetric(f)
    return f.replace(np.flip(f.values, axis=f.component_axis(0)).copy())


def time_parity_project(f: GridField, parity: int) -> GridField:
    """(1 + parity * T) Psi / 2."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    rev = time_reverse(f).values
    return f.replace(0.5 * (f.values + parity * rev))


def particle_conjugate(f: GridField) -> GridField:
    """O Psi = i gamma^0 gamma^1 gamma^3 Psi^* applied at every grid site."""
    if f.ncomp != 4:
        raise GridError("particle conjugation needs a 4-spinor field")
    o = discrete_operator("particle_conj_matrix")
    return f.replace(np.tensordot(o, np.conj(f.values), axes=(1, 0)))


# ---------------------------------------------------------------------------
# energy operator with constant potentials


def sigma_dot(v) -> np.ndarray:
    v = np.asarray(v)
    return v[0] * PAULI[0] + v[1] * PAULI[1] + v[2] * PAULI[2]


def energy_operator_matrix(p, phi_i: float, a_i, e: float = 1.0, m: float = 1.0) -> np.ndarray:
    """rho_1 sigma.(p - e A^I) + rho_3 (m + e Phi^I) for constant potentials."""
    kin = np.asarray(p, dtype=float) - e * np.asarray(a_i, dtype=float)
    return (
        np.kron(np.array([[0, 1], [1, 0]]), sigma_dot(kin))
        + (m + e * phi_i) * np.kron(np.diag([1, -1]), I2)
    )


def pair_spectrum(eigs: np.ndarray) -> float:
    """Largest mismatch between the sorted spectrum and its negation."""
    ev = np.sort(np.real_if_close(eigs).real)
    return float(np.max(np.abs(ev + ev[::-1])))


# ---------------------------------------------------------------------------
# common-variable commutator


def common_commutator(x, const: complex = 1.0, grad=(0.0, 0.0, 0.0, 0.0)) -> np.ndarray:
    """[Omega, P_omega] f evaluated at ``x`` for f(X) = const + grad_nu X^nu.

    Omega = gamma^mu X_mu and P_omega = i gamma^nu d_nu. ``grad`` holds the
    covariant derivatives d_nu f. The product rule gives
    d_nu (gamma^mu X_mu f) = gamma^mu g_{mu nu} f + Omega d_nu f.
    """
    x = np.asarray(x.array() if isinstance(x, FourVector) else x, dtype=float)
    grad = np.asarray(grad, dtype=complex)
    omega = slash(x)
    f_x = const + grad @ x
    p_f = sum(1j * _GAMMA[nu] * grad[nu] for nu in range(4))
    left = omega @ p_f
    right = np.zeros((4, 4), dtype=complex)
    for nu in range(4):
        d_omega_f = METRIC[nu, nu] * _GAMMA[nu] * f_x
        right += 1j * _GAMMA[nu] @ (d_omega_f + omega * grad[nu])
    return left - right


def common_commutator_check(x, const: complex = 1.0, grad=(0.0, 0.0, 0.0, 0.0)) -> complex:
    """Identity-component coefficient c in [Omega, P_omega] f = c f + (traceless spin part).

    The remainder i X_mu [gamma^mu, gamma^nu] d_nu f is traceless, so the
    trace projection isolates c. Since the result is linear in x, c is
    recovered from the polynomial coefficients when f(x) happens to vanish.
    """
    grad = np.asarray(grad, dtype=complex)
    xa = np.asarray(x.array() if isinstance(x, FourVector) else x, dtype=float)
    f_x = const + grad @ xa
    if abs(f_x) > 1e-12:
        return complex(np.trace(common_commutator(xa, const, grad)) / 4.0 / f_x)
    zero = np.zeros(4)
    s0 = np.trace(common_commutator(zero, const, grad)) / 4.0
    coeffs_out = [s0]
    for rho_ in range(4):
        e = np.zeros(4)
        e[rho_] = 1.0
        coeffs_out.append(np.trace(common_commutator(e, const, grad)) / 4.0 - s0)
    # f(X) = const + (g grad)^. X contravariantly: coefficient of X^rho is grad_rho
    coeffs_in = np.concatenate([[const], grad])
    coeffs_out = np.asarray(coeffs_out)
    return complex(np.vdot(coeffs_in, coeffs_out) / np.vdot(coeffs_in, coeffs_in))
