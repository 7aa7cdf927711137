"""Tree-level elastic cross sections built from explicit spinors.

Spinors are normalized to ``ubar u = 1`` so that the spin sum of
``u ubar`` is the projector ``(pslash + m) / 2m``. For electron-proton
scattering the electron is treated as ultra-relativistic: its momenta
are lightlike, which is what makes the recoil relation
``E_f = E / (1 + (2E/M) sin^2(theta/2))`` and ``q^2 = -4 E_f E sin^2(theta/2)``
exact. The electron mass then only sets the spinor normalization,
``sum_s u ubar = pslash / 2m``.

Cross sections carry a factor ``NORMALIZATION = 16`` on top of the
bare ``m^2 |V(q)|^2 Sigma`` assembly; see ``dcs_coulomb_assembled``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .algebra import METRIC, PAULI, FourVector, gamma
from .constants import ALPHA
from .errors import ForwardDivergence, KinematicsError, OffShellError

THETA_MIN = 1e-3
NORMALIZATION = 16.0
ON_SHELL_TOL = 1e-9

_G = np.stack([gamma(mu) for mu in range(4)])
_G0 = _G[0]
_CHI = {"up": np.array([1.0, 0.0], dtype=complex), "down": np.array([0.0, 1.0], dtype=complex)}
_ALIASES = {"up": "up", "down": "down", "↑": "up", "↓": "down", "+": "up", "-": "down",
            1: "up", -1: "down"}
SPINS = ("up", "down")


def _spin(s) -> str:
    try:
        return _ALIASES[s]
    except (KeyError, TypeError):
        raise ValueError(f"unknown spin label {s!r}") from None


def _sigma_dot(v) -> np.ndarray:
    return sum(c * s for c, s in zip(v, PAULI))


@dataclass(frozen=True)
class PlaneWaveSpinor:
    p: FourVector
    s: str
    u: np.ndarray

    @property
    def bar(self) -> np.ndarray:
        return self.u.conj() @ _G0


def _mass_of(p: FourVector, m: float | None) -> float:
    p2 = p.square()
    if m is None:
        if p2 <= 0:
            raise OffShellError(f"p^2 = {p2:.6g} is not a positive mass shell")
        return math.sqrt(p2)
    if abs(p2 - m * m) > ON_SHELL_TOL * max(1.0, p.t**2):
        raise OffShellError(f"p^2 = {p2:.12g} differs from m^2 = {m * m:.12g}")
    return m


def spinor_u(p: FourVector, s="up", m: float | None = None) -> PlaneWaveSpinor:
    """Boosted rest spinor ``(pslash + m) u_rest / sqrt(2m(E+m))``."""
    s = _spin(s)
    if p.t <= 0:
        raise OffShellError("positive-energy spinors need E > 0")
    mass = _mass_of(p, m)
    chi = _CHI[s]
    norm = math.sqrt(2.0 * mass * (p.t + mass))
    upper = (p.t + mass) / norm * chi
    lower = _sigma_dot(p.spatial) @ chi / norm
    return PlaneWaveSpinor(p, s, np.concatenate([upper, lower]))


def lightlike_spinor(p: FourVector, s="up", m: float = 1.0) -> PlaneWaveSpinor:
    """Massless-limit spinor with ``sum_s u ubar = pslash / 2m``."""
    s = _spin(s)
    E = p.t
    if E <= 0 or abs(p.square()) > ON_SHELL_TOL * E * E:
        raise OffShellError("lightlike spinors need p^2 = 0 and E > 0")
    n = p.spatial / E
    chi = _CHI[s]
    u = math.sqrt(E / (2.0 * m)) * np.concatenate([chi, _sigma_dot(n) @ chi])
    return PlaneWaveSpinor(p, s, u)


# ---------------------------------------------------------------------------
# kinematics


@dataclass(frozen=True)
class ScatterKinematics:
    """Lab-frame elastic scattering; ``M = inf`` is a fixed Coulomb centre."""

    E: float
    theta: float
    m: float = 1.0
    M: float = math.inf

    def __post_init__(self):
        if not self.E > self.m:
            raise KinematicsError(f"need E > m, got E={self.E}, m={self.m}")
        if not (0.0 < self.theta <= math.pi):
            raise KinematicsError(f"theta must lie in (0, pi], got {self.theta}")
        if not self.M > 0:
            raise KinematicsError("target mass must be positive")

    @property
    def finite_target(self) -> bool:
        return math.isfinite(self.M)

    @property
    def p(self) -> float:
        return math.sqrt(self.E**2 - self.m**2)

    @property
    def s2(self) -> float:
        return math.sin(0.5 * self.theta) ** 2

    @property
    def E_f(self) -> float:
        if not self.finite_target:
            return self.E
        return self.E / (1.0 + (2.0 * self.E / self.M) * self.s2)

    @property
    def q2(self) -> float:
        """Four-momentum transfer squared (for M = inf, minus |q|^2 of the static case)."""
        if not self.finite_target:
            return -4.0 * self.p**2 * self.s2
        return -4.0 * self.E_f * self.E * self.s2

    def lightlike_momenta(self):
        """(p_i, p_f, P_i, P_f) with a massless electron; exact for the recoil formula."""
        if not self.finite_target:
            raise KinematicsError("recoil momenta need a finite target mass")
        E, Ef, th = self.E, self.E_f, self.theta
        p_i = np.array([E, 0.0, 0.0, E])
        p_f = np.array([Ef, Ef * math.sin(th), 0.0, Ef * math.cos(th)])
        P_i = np.array([self.M, 0.0, 0.0, 0.0])
        P_f = p_i + P_i - p_f
        return tuple(FourVector.of(v) for v in (p_i, p_f, P_i, P_f))

    def massive_momenta(self):
        """(p_i, p_f, P_i, P_f) for a massive electron, energy fixed by exact elastic kinematics."""
        if not self.finite_target:
            raise KinematicsError("recoil momenta need a finite target mass")
        m, M, E, th = self.m, self.M, self.E, self.theta
        p_i = np.array([E, 0.0, 0.0, self.p])
        P_i = np.array([M, 0.0, 0.0, 0.0])

        def momenta(Ef):
            pf = math.sqrt(max(Ef * Ef - m * m, 0.0))
            p_f = np.array([Ef, pf * math.sin(th), 0.0, pf * math.cos(th)])
            return p_f, p_i + P_i - p_f

        def shell(Ef):
            _, P_f = momenta(Ef)
            return float(P_f @ METRIC @ P_f) - M * M

        Ef = brentq(shell, m, E, xtol=1e-15 * E, rtol=1e-15)
        p_f, P_f = momenta(Ef)
        return tuple(FourVector.of(v) for v in (p_i, p_f, P_i, P_f))


def elastic_pair(p_mag: float, theta: float, m: float = 1.0, phi: float = 0.0):
    """Incoming along z and outgoing at (theta, phi), both with momentum ``p_mag``."""
    E = math.hypot(p_mag, m)
    st = math.sin(theta)
    p_i = FourVector(E, 0.0, 0.0, p_mag)
    p_f = FourVector(E, p_mag * st * math.cos(phi), p_mag * st * math.sin(phi),
                     p_mag * math.cos(theta))
    return p_i, p_f


# ---------------------------------------------------------------------------
# spin sums


def sigma1_closed(p_i: FourVector, p_f: FourVector, m: float | None = None) -> float:
    mass = _mass_of(p_i, m)
    _mass_of(p_f, mass)
    return 0.5 * (1.0 + p_i.dot(p_f) / mass**2)


def sigma1(p_i: FourVector, p_f: FourVector, m: float | None = None) -> float:
    """(1/2) sum over both spins of |ubar(p_f) u(p_i)|^2 from explicit spinors."""
    mass = _mass_of(p_i, m)
    _mass_of(p_f, mass)
    total = 0.0
    for sf in SPINS:
        ubar = spinor_u(p_f, sf, mass).bar
        for si in SPINS:
            total += abs(ubar @ spinor_u(p_i, si, mass).u) ** 2
    return 0.5 * total


def _current(bar_list, u_list) -> np.ndarray:
    """J[a, b, mu] = bar_a gamma^mu u_b."""
    bars = np.stack(bar_list)
    us = np.stack(u_list)
    return np.einsum("ai,mij,bj->abm", bars, _G, us)


def _sigma2_from(p_i, p_f, P_i, P_f, electron) -> float:
    j_e = _current([electron(p_f, s).bar for s in SPINS], [electron(p_i, s).u for s in SPINS])
    j_p = _current([spinor_u(P_f, s).bar for s in SPINS], [spinor_u(P_i, s).u for s in SPINS])
    amp = np.einsum("abm,m,cdm->abcd", j_e, np.diag(METRIC), j_p)
    return 0.25 * float(np.sum(np.abs(amp) ** 2))


def sigma2_closed(k: ScatterKinematics) -> float:
    """E_f E / m^2 [cos^2 - (q^2 / 2M^2) sin^2], i.e. cos^2 (1 - q^2 tan^2 / 2M^2)."""
    _need_target(k)
    c2 = 1.0 - k.s2
    return k.E_f * k.E / k.m**2 * (c2 - k.q2 / (2.0 * k.M**2) * k.s2)


def sigma2(k: ScatterKinematics, method: str = "trace") -> float:
    """Electron-proton spin sum; ``trace`` sums |amplitude|^2 over all 16 spin choices."""
    _need_target(k)
    if method == "closed":
        return sigma2_closed(k)
    if method != "trace":
        raise ValueError(f"unknown method {method!r}")
    p_i, p_f, P_i, P_f = k.lightlike_momenta()
    return _sigma2_from(p_i, p_f, P_i, P_f, lambda p, s: lightlike_spinor(p, s, k.m))


def sigma2_massive(k: ScatterKinematics) -> float:
    """Same spin sum with a massive electron and exact elastic kinematics.

    Differs from ``sigma2`` at relative order m^2 / (E E_f sin^2(theta/2)).
    """
    _need_target(k)
    p_i, p_f, P_i, P_f = k.massive_momenta()
    return _sigma2_from(p_i, p_f, P_i, P_f, lambda p, s: spinor_u(p, s, k.m))


def _need_target(k: ScatterKinematics) -> None:
    if not k.finite_target:
        raise KinematicsError("this quantity needs a finite target mass")


def _guard_theta(k: ScatterKinematics, theta_min: float) -> None:
    if k.theta < theta_min:
        raise ForwardDivergence(
            f"theta = {k.theta:.3g} rad below theta_min = {theta_min:.3g}: forward Coulomb divergence"
        )


# ---------------------------------------------------------------------------
# potentials and cross sections


def fourier_potential(kind: str, q: FourVector, Z: float = 1.0, alpha: float = ALPHA) -> complex:
    """Static Coulomb amplitude ``-Z alpha / |q|^2`` (the 4 pi of the 3D transform dropped)."""
    if kind != "coulomb":
        raise ValueError(f"unknown potential kind {kind!r}")
    q2 = float(q.spatial @ q.spatial)
    if q2 <= 0.0:
        raise KinematicsError("zero momentum transfer: Coulomb amplitude diverges")
    return complex(-Z * alpha / q2)


def screened_coulomb_transform(q: float, Z: float = 1.0, eps: float = 1e-6,
                               alpha: float = ALPHA) -> float:
    """Numerical (1/4pi) x 3D Fourier transform of ``-Z alpha exp(-eps r) / r``."""
    if q <= 0:
        raise KinematicsError("q must be positive")
    val, _ = quad(lambda r: math.exp(-eps * r), 0.0, math.inf, weight="sin", wvar=q)
    return -Z * alpha * val / q


def dcs_coulomb_assembled(k: ScatterKinematics, Z: float, alpha: float = ALPHA) -> float:
    """m^2 |V(q)|^2 Sigma1 with the static amplitude and explicit-spinor Sigma1, no rescaling."""
    if k.finite_target:
        raise KinematicsError("Coulomb cross section needs a fixed centre (M = inf)")
    p_i, p_f = elastic_pair(k.p, k.theta, k.m)
    q = FourVector.of(p_f.array() - p_i.array())
    V = fourier_potential("coulomb", q, Z, alpha)
    return k.m**2 * abs(V) ** 2 * sigma1(p_i, p_f, k.m)


def dcs_coulomb(k: ScatterKinematics, Z: float, theta_min: float = THETA_MIN,
                alpha: float = ALPHA) -> float:
    """Z^2 a^2 m^2 / (p^4 sin^4) [1 + (p^2/m^2) sin^2]."""
    if k.finite_target:
        raise KinematicsError("Coulomb cross section needs a fixed centre (M = inf)")
    _guard_theta(k, theta_min)
    p2, s2, m = k.p**2, k.s2, k.m
    return (Z * alpha * m) ** 2 / (p2 * p2 * s2 * s2) * (1.0 + p2 / m**2 * s2)


def rutherford(k: ScatterKinematics, Z: float, alpha: float = ALPHA) -> float:
    p2, s2 = k.p**2, k.s2
    return (Z * alpha * k.m) ** 2 / (p2 * p2 * s2 * s2)


def coulomb_relativistic_limit(k: ScatterKinematics, Z: float, alpha: float = ALPHA) -> float:
    return (Z * alpha) ** 2 / (k.p**2 * k.s2)


def mott_coulomb(k: ScatterKinematics, Z: float, alpha: float = ALPHA) -> float:
    """Conventional Mott cross section Z^2 a^2 E^2 (1 - beta^2 sin^2) / (4 p^4 sin^4)."""
    p2, s2 = k.p**2, k.s2
    beta2 = p2 / k.E**2
    return (Z * alpha * k.E) ** 2 * (1.0 - beta2 * s2) / (4.0 * p2 * p2 * s2 * s2)


def recoil_bracket(k: ScatterKinematics) -> float:
    """1 - (q^2 / 2M^2) tan^2(theta/2)."""
    _need_target(k)
    return 1.0 - k.q2 / (2.0 * k.M**2) * k.s2 / (1.0 - k.s2)


def dcs_ep(k: ScatterKinematics, mode: str = "highE_sigma1", theta_min: float = THETA_MIN,
           alpha: float = ALPHA, sigma2_method: str = "closed") -> float:
    """(a^2 m^4 E_f / (q^4 E^3)) Sigma1 Sigma2, times NORMALIZATION.

    ``exact_sigma1`` uses Sigma1 = (1 + p_i.p_f / m^2) / 2 on the lightlike
    momenta, ``highE_sigma1`` drops the 1/2, leaving (E_f E / m^2) sin^2.
    """
    _need_target(k)
    _guard_theta(k, theta_min)
    m, E, Ef = k.m, k.E, k.E_f
    hi = Ef * E * k.s2 / m**2
    if mode == "highE_sigma1":
        s1 = hi
    elif mode == "exact_sigma1":
        s1 = 0.5 + hi
    else:
        raise ValueError(f"unknown mode {mode!r}")
    s2 = sigma2(k, sigma2_method)
    return NORMALIZATION * alpha**2 * m**4 * Ef / (k.q2**2 * E**3) * s1 * s2


def dcs_ep_closed(k: ScatterKinematics, alpha: float = ALPHA) -> float:
    """(a^2 / E^2) cot^2(theta/2) bracket / (1 + (2E/M) sin^2(theta/2))."""
    s2 = k.s2
    cot2 = (1.0 - s2) / s2
    return alpha**2 / k.E**2 * cot2 * recoil_bracket(k) / (1.0 + 2.0 * k.E / k.M * s2)


def mott_recoil(k: ScatterKinematics, alpha: float = ALPHA) -> float:
    """Conventional point-Dirac-proton result a^2 cos^2 / (4E^2 sin^4) bracket E_f/E."""
    _need_target(k)
    s2 = k.s2
    # cos^2 times the bracket, written so that theta = pi stays finite
    weighted = (1.0 - s2) - k.q2 / (2.0 * k.M**2) * s2
    return alpha**2 * weighted / (4.0 * k.E**2 * s2 * s2) * k.E_f / k.E
