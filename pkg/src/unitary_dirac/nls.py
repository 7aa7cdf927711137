"""Nonrelativistic limit: Hamiltonian expectation values and a 1D NLS integrator.

The evolution equation is

    i d_t psi = -(1/2m) d_x^2 psi + N[psi] psi

on a periodic grid, with ``N = g |psi|^2`` (cubic) or
``N = g |psi|^2 Phi[|psi|^2]`` (choquard), where ``Phi`` solves the 1D
Poisson equation ``-Phi'' = rho`` with the free-space kernel ``-|x|/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.fft import fft, fftfreq, fftn, ifft, ifftn

from .algebra import PAULI
from .errors import GridError, NormalizationError, StabilityError
from .grid import GridField

STABILITY_LIMIT = 0.1
NORM_TOL = 1e-6
MODES = ("cubic", "choquard")


@dataclass(frozen=True)
class NlsState:
    psi: GridField
    g: float = -1.0
    mode: str = "cubic"
    dt: float = 1e-3
    t: float = 0.0
    m: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.psi.ndim != 1 or self.psi.ncomp:
            raise GridError("NLS state needs a scalar 1D field")
        if self.mode == "choquard" and self.psi.shape[0] % 2 == 0:
            raise GridError("choquard mode needs an odd number of grid points")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def x(self) -> np.ndarray:
        return self.psi.axis(0)

    @property
    def h(self) -> float:
        return self.psi.spacing[0]


def line_grid(n: int, length: float) -> tuple[np.ndarray, float, float]:
    """Periodic grid of ``n`` points on [-L/2, L/2); returns (x, h, origin)."""
    h = length / n
    origin = -(n // 2) * h
    return origin + h * np.arange(n), h, origin


def from_samples(values, h: float, origin: float, **kw) -> NlsState:
    return NlsState(GridField(np.asarray(values, dtype=complex), (h,), (origin,), 0, "1"), **kw)


def sech_soliton(n: int = 1024, length: float = 50.0, **kw) -> NlsState:
    x, h, origin = line_grid(n, length)
    return from_samples(1.0 / np.cosh(x), h, origin, **kw)


def _wavenumbers(n: int, h: float) -> np.ndarray:
    return 2.0 * math.pi * fftfreq(n, d=h)


def self_potential(rho: np.ndarray, h: float) -> np.ndarray:
    """Phi(x) = -(1/2) sum_x' |x - x'| rho(x') h, circular with minimum-image distance."""
    n = rho.size
    if n % 2 == 0:
        raise GridError("self potential needs an odd number of points")
    d = np.arange(n)
    d = np.minimum(d, n - d) * h
    kern = -0.5 * d * h
    return np.real(ifft(fft(rho) * fft(kern)))


def nonlinear_potential(psi: np.ndarray, state: NlsState) -> np.ndarray:
    rho = np.abs(psi) ** 2
    if state.mode == "cubic":
        return state.g * rho
    return state.g * rho * self_potential(rho, state.h)


def _check_guard(N: np.ndarray, dt: float, limit: float = STABILITY_LIMIT) -> None:
    worst = dt * float(np.max(np.abs(N))) if N.size else 0.0
    if worst >= limit:
        raise StabilityError(f"dt * max|N| = {worst:.3g} violates the split-step guard {limit}")


def evolve(state: NlsState, T: float, limit: float = STABILITY_LIMIT) -> NlsState:
    """Strang splitting: half nonlinear phase, full spectral kinetic step, half nonlinear phase."""
    if T < 0:
        raise ValueError("duration must be non-negative")
    steps = int(round(T / state.dt))
    if abs(steps * state.dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T = {T} is not a whole number of steps of dt = {state.dt}")
    psi = np.array(state.psi.values, dtype=complex)
    k = _wavenumbers(psi.size, state.h)
    kin = np.exp(-1j * state.dt * k**2 / (2.0 * state.m))
    half = 0.5 * state.dt
    N = nonlinear_potential(psi, state)
    _check_guard(N, state.dt, limit)
    for _ in range(steps):
        psi *= np.exp(-1j * half * N)
        psi = ifft(kin * fft(psi))
        N = nonlinear_potential(psi, state)
        _check_guard(N, state.dt, limit)
        psi *= np.exp(-1j * half * N)
        N = nonlinear_potential(psi, state)
    return replace(state, psi=state.psi.replace(psi), t=state.t + steps * state.dt)


def conserved_quantities(state: NlsState) -> tuple[float, float]:
    """(norm, energy) with spectral derivatives and rectangle-rule integrals."""
    psi = np.asarray(state.psi.values, dtype=complex)
    h = state.h
    rho = np.abs(psi) ** 2
    norm = float(np.sum(rho) * h)
    dpsi = ifft(1j * _wavenumbers(psi.size, h) * fft(psi))
    kinetic = float(np.sum(np.abs(dpsi) ** 2) * h / (2.0 * state.m))
    if state.mode == "cubic":
        inter = 0.5 * state.g * float(np.sum(rho**2) * h)
    else:
        inter = 0.5 * state.g * float(np.sum(rho**2 * self_potential(rho, h)) * h)
    return norm, kinetic + inter


# ---------------------------------------------------------------------------
# expectation values of the four-term Hamiltonian


def _gradient(values: np.ndarray, spacing) -> list[np.ndarray]:
    """Spectral gradient of each component over the three grid axes."""
    out = []
    shape = values.shape[1:]
    spec = fftn(values, axes=(1, 2, 3))
    for ax, (n, h) in enumerate(zip(shape, spacing)):
        k = 2.0 * math.pi * fftfreq(n, d=h)
        bshape = [1, 1, 1, 1]
        bshape[ax + 1] = n
        out.append(ifftn(1j * k.reshape(bshape) * spec, axes=(1, 2, 3)))
    return out


def _angular(values, grads, mesh) -> list[np.ndarray]:
    """(l_x, l_y, l_z) psi with l = -i r x grad."""
    x, y, z = mesh
    gx, gy, gz = grads
    return [
        -1j * (y * gz - z * gy),
        -1j * (z * gx - x * gz),
        -1j * (x * gy - y * gx),
    ]


def _curl(field: GridField) -> np.ndarray:
    a = np.asarray(field.values)
    hx, hy, hz = field.spacing
    d = lambda comp, ax, h: np.gradient(a[comp], h, axis=ax, edge_order=2)
    return np.stack([
        d(2, 1, hy) - d(1, 2, hz),
        d(0, 2, hz) - d(2, 0, hx),
        d(1, 0, hx) - d(0, 1, hy),
    ])


def hamiltonian_terms(psi: GridField, phiI: GridField | None = None, aI: GridField | None = None,
                      B=None, e: float = 1.0, m: float = 1.0):
    """Expectation values (kinetic, electric, zeeman, spin_orbit) of the four-term Hamiltonian.

    ``psi`` is a normalized two-component field on a 3D grid. The magnetic
    field is the constant vector ``B`` when given, else the curl of ``aI``.
    The spin-orbit term is ``-(e / 2 m^2 r^2) (r . grad Phi) (s . l)``.
    """
    if psi.ncomp != 2 or psi.ndim != 3:
        raise GridError("psi must be a two-component 3D field")
    v = np.asarray(psi.values, dtype=complex)
    dv = psi.cell_volume
    norm = float(np.sum(np.abs(v) ** 2) * dv)
    if abs(norm - 1.0) > NORM_TOL:
        raise NormalizationError(f"psi has norm {norm:.8g}, expected 1")
    mesh = psi.mesh()
    grads = _gradient(v, psi.spacing)

    def expect(op_values) -> float:
        return float(np.real(np.sum(v.conj() * op_values)) * dv)

    kinetic = float(sum(np.sum(np.abs(g) ** 2) for g in grads) * dv / (2.0 * m))

    electric = 0.0
    spin_orbit = 0.0
    lpsi = _angular(v, grads, mesh)
    if phiI is not None:
        phi = np.asarray(phiI.values, dtype=float)
        electric = e * float(np.sum(phi * np.sum(np.abs(v) ** 2, axis=0)) * dv)
        dphi = [np.gradient(phi, h, axis=ax, edge_order=2) for ax, h in enumerate(psi.spacing)]
        r2 = sum(c * c for c in mesh)
        if np.any(r2 == 0):
            raise GridError("spin-orbit weight needs a grid that avoids r = 0")
        rdphi = sum(c * d for c, d in zip(mesh, dphi))
        w = -e * rdphi / (2.0 * m * m * r2)
        sl = sum(0.5 * np.einsum("ab,b...->a...", PAULI[i], lpsi[i]) for i in range(3))
        spin_orbit = expect(w[None] * sl)

    zeeman = 0.0
    if B is not None or aI is not None:
        if B is not None:
            bvec = np.asarray(B, dtype=float).reshape(3, 1, 1, 1) * np.ones((1,) + psi.shape)
        else:
            bvec = _curl(aI)
        kpsi = 0.0
        for i in range(3):
            kpsi = kpsi + bvec[i][None] * (lpsi[i] + np.einsum("ab,b...->a...", PAULI[i], v))
        zeeman = -e / (2.0 * m) * expect(kpsi)
    return kinetic, electric, zeeman, spin_orbit


def cell_centred_grid(n: int, h: float):
    """Origin for an even-``n`` axis whose samples straddle zero symmetrically."""
    if n % 2:
        raise GridError("cell-centred grids need an even number of points")
    return -(n / 2 - 0.5) * h
