"""Potentials, residuals and gauge functions on sampled grids.

Conventions: four-vector fields are GridFields with ``ncomp == 4``. Currents
``J`` hold contravariant components J^mu. Potentials ``A`` handed to the
residual and convolution routines hold covariant components A_mu, so that
``J^mu A_mu`` is a plain component sum. For ``dims == "1+1"`` the grid axes
are (t, x); derivatives along y and z vanish.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .algebra import METRIC, gamma
from .errors import GridError, GridTooCoarse, ZeroDensity
from .grid import GridField

MAX_POISSON_POINTS = 64**3
NORM_TOL = 1e-6

_G = np.stack([gamma(mu) for mu in range(4)])
_G0 = _G[0]


# ---------------------------------------------------------------------------
# Poisson / Green's function


def _self_cell(spacing) -> float:
    """Average of 1/(4 pi r) over the equivalent sphere of one cell, times its volume."""
    vol = float(np.prod(spacing))
    R = (3.0 * vol / (4.0 * math.pi)) ** (1.0 / 3.0)
    return R * R / 2.0


def poisson_kernel(shape, spacing) -> np.ndarray:
    """Weights h^3 / (4 pi |d|) on all offsets d = -(n-1)..(n-1) per axis."""
    axes = [h * np.arange(-(n - 1), n) for n, h in zip(shape, spacing)]
    mesh = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(sum(x * x for x in mesh))
    vol = float(np.prod(spacing))
    with np.errstate(divide="ignore"):
        k = vol / (4.0 * math.pi * r)
    k[tuple(n - 1 for n in shape)] = _self_cell(spacing)
    return k


def greens_poisson(source: GridField) -> GridField:
    """Phi(x) = sum_x' source(x') h^3 / (4 pi |x - x'|), the free-space solution of -lap Phi = source.

    The sum over all cell pairs is evaluated as a zero-padded FFT
    convolution, which reproduces the direct sum to rounding error.
    """
    if source.ncomp or source.ndim != 3:
        raise GridError("greens_poisson needs a scalar 3D field")
    if int(np.prod(source.shape)) > MAX_POISSON_POINTS:
        raise GridError(f"grid {source.shape} exceeds the 64^3 cap")
    vals = np.asarray(source.values)
    if not np.any(vals):
        return source.replace(np.zeros(source.shape))
    kern = poisson_kernel(source.shape, source.spacing)
    full = fftconvolve(vals, kern, mode="full")
    sl = tuple(slice(n - 1, 2 * n - 1) for n in source.shape)
    out = full[sl]
    if np.isrealobj(vals):
        out = out.real
    return source.replace(out)


def greens_poisson_direct(source: GridField) -> GridField:
    """Plain double loop over source cells; reference for ``greens_poisson``."""
    vals = np.asarray(source.values)
    mesh = source.mesh()
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    flat = vals.ravel()
    vol = source.cell_volume
    self_w = _self_cell(source.spacing)
    out = np.zeros(flat.shape, dtype=np.result_type(flat.dtype, float))
    for j in np.nonzero(flat)[0]:
        d = np.linalg.norm(pts - pts[j], axis=1)
        w = np.empty_like(d)
        nz = d > 0
        w[nz] = vol / (4.0 * math.pi * d[nz])
        w[~nz] = self_w
        out += flat[j] * w
    return source.replace(out.reshape(source.shape))


def laplacian(f: GridField) -> np.ndarray:
    """Second-order discrete Laplacian; the outer layer is set to NaN."""
    v = np.asarray(f.values)
    out = np.full(v.shape, np.nan, dtype=v.dtype)
    inner = tuple(slice(1, -1) for _ in range(v.ndim))
    acc = np.zeros(tuple(n - 2 for n in v.shape), dtype=v.dtype)
    for ax, h in enumerate(f.spacing):
        lo = list(inner)
        hi = list(inner)
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        acc = acc + (v[tuple(lo)] - 2.0 * v[inner] + v[tuple(hi)]) / (h * h)
    out[inner] = acc
    return out


# ---------------------------------------------------------------------------
# interaction potentials


def density(psi: GridField) -> np.ndarray:
    """psi^dagger psi."""
    return np.sum(np.abs(psi.values) ** 2, axis=0)


def scalar_density(psi: GridField) -> np.ndarray:
    """psibar psi = psi^dagger gamma^0 psi."""
    v = psi.values
    return np.real(np.einsum("a...,ab,b...->...", v.conj(), _G0, v))


def interaction_potentials(psi_e: GridField, rho_p: GridField,
                           current_p: GridField | None = None, e_p: float = 1.0):
    """(Phi_I, A_I): (psi^dagger psi) Phi_p and (psibar psi) A_p of a static proton source."""
    if psi_e.ncomp != 4 or psi_e.ndim != 3:
        raise GridError("psi_e must be a 4-spinor 3D field")
    if rho_p.shape != psi_e.shape or rho_p.spacing != psi_e.spacing:
        raise GridError("source and wavefunction grids differ")
    norm = float(np.sum(density(psi_e)) * psi_e.cell_volume)
    if abs(norm - 1.0) > NORM_TOL:
        warnings.warn(f"test wavefunction norm is {norm:.6g}, expected 1", RuntimeWarning,
                      stacklevel=2)
    phi_p = greens_poisson(rho_p.replace(e_p * np.asarray(rho_p.values, dtype=float)))
    phi_I = rho_p.replace(density(psi_e) * phi_p.values)
    sbar = scalar_density(psi_e)
    if current_p is None:
        a_vals = np.zeros((3,) + psi_e.shape)
    else:
        if current_p.ncomp != 3 or current_p.shape != psi_e.shape:
            raise GridError("current_p must be a 3-component field on the same grid")
        a_vals = np.stack([
            sbar * greens_poisson(rho_p.replace(e_p * np.asarray(current_p.values[i]))).values
            for i in range(3)
        ])
    a_I = GridField(a_vals, psi_e.spacing, psi_e.origin, 3, "3")
    return phi_I, a_I


def convolution_potential(J: GridField, A: GridField, e: float = 1.0) -> GridField:
    """V(x) = e sum_mu sum_x' J^mu(x') A_mu(x - x') dV on J's grid.

    ``A`` is sampled on offsets: same spacing as ``J`` and origin placing
    index ``n // 2`` at offset zero. Offsets outside A's grid contribute
    nothing, so J must vanish on its outer layer.
    """
    if J.ncomp != 4 or A.ncomp != 4:
        raise GridError("J and A must be four-component fields")
    if J.spacing != A.spacing or J.ndim != A.ndim:
        raise GridError("J and A must share spacing and dimension")
    centre = tuple(n // 2 for n in A.shape)
    for c, h, o in zip(centre, A.spacing, A.origin):
        if abs(o + c * h) > 1e-9 * h:
            raise GridError("A must be sampled on offsets centred at index n // 2")
    jv = np.asarray(J.values)
    for ax in range(1, jv.ndim):
        edge = np.take(jv, [0, jv.shape[ax] - 1], axis=ax)
        if np.any(edge):
            raise GridError("current support reaches the grid boundary (wraparound refused)")
    av = np.asarray(A.values)
    out = 0.0
    for mu in range(4):
        if not (np.any(jv[mu]) and np.any(av[mu])):
            continue
        full = fftconvolve(jv[mu], av[mu], mode="full")
        sl = tuple(slice(c, c + n) for c, n in zip(centre, J.shape))
        out = out + full[sl]
    if np.isscalar(out):
        out = np.zeros(J.shape)
    if np.isrealobj(jv) and np.isrealobj(av):
        out = np.real(out)
    return GridField(e * J.cell_volume * out, J.spacing, J.origin, 0, J.dims)


# ---------------------------------------------------------------------------
# Dirac residual in 1+1 dimensions


def _central(v: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central first difference on the interior of every grid axis."""
    nd = v.ndim
    sl_hi = [slice(1, -1)] * nd
    sl_lo = [slice(1, -1)] * nd
    sl_hi[axis] = slice(2, None)
    sl_lo[axis] = slice(0, -2)
    return (v[tuple(sl_hi)] - v[tuple(sl_lo)]) / (2.0 * h)


def _interior(v: np.ndarray, lead: int = 0) -> np.ndarray:
    return v[(slice(None),) * lead + (slice(1, -1),) * (v.ndim - lead)]


def _check_spacetime(psi: GridField) -> None:
    if psi.dims != "1+1" or psi.ncomp != 4:
        raise GridError("expected a 4-spinor field on a 1+1 grid")


def residual_field(psi: GridField, A_T: GridField | None = None, e: float = 1.0,
                   m: float = 1.0) -> np.ndarray:
    """gamma^mu (i d_mu - e A_mu) psi - m psi on interior sites, shape (4, Nt-2, Nx-2)."""
    _check_spacetime(psi)
    v = np.asarray(psi.values, dtype=complex)
    ht, hx = psi.spacing
    dpsi_t = np.stack([_central(v[a], 0, ht) for a in range(4)])
    dpsi_x = np.stack([_central(v[a], 1, hx) for a in range(4)])
    inner = _interior(v, lead=1)
    out = 1j * (np.einsum("ab,b...->a...", _G[0], dpsi_t) + np.einsum("ab,b...->a...", _G[1], dpsi_x))
    out -= m * inner
    if A_T is not None:
        if A_T.ncomp != 4 or A_T.shape != psi.shape:
            raise GridError("A_T must be a four-component field on the psi grid")
        slash_a = np.einsum("mab,m...->ab...", _G, _interior(np.asarray(A_T.values), lead=1))
        out -= e * np.einsum("ab...,b...->a...", slash_a, inner)
    return out


def equation_residual(psi: GridField, A_T: GridField | None = None, e: float = 1.0,
                      m: float = 1.0, tol: float | None = None) -> float:
    """Max-norm of the Dirac residual over interior sites."""
    r = float(np.max(np.abs(residual_field(psi, A_T, e, m))))
    if tol is not None and r > tol:
        raise GridTooCoarse(f"residual {r:.3e} exceeds requested tolerance {tol:.3e}")
    return r


def plane_wave(E: float, p: float, spinor: np.ndarray, nt: int, nx: int, ht: float, hx: float,
               amplitude: complex = 1.0) -> GridField:
    """u exp(-i(E t - p x)) on a centred (t, x) grid."""
    t = -(nt // 2) * ht + ht * np.arange(nt)
    x = -(nx // 2) * hx + hx * np.arange(nx)
    T, X = np.meshgrid(t, x, indexing="ij")
    phase = amplitude * np.exp(-1j * (E * T - p * X))
    vals = np.asarray(spinor)[:, None, None] * phase[None]
    return GridField(vals, (ht, hx), (t[0], x[0]), 4, "1+1")


# ---------------------------------------------------------------------------
# gauge family


@dataclass(frozen=True)
class GaugeCoefficients:
    """Coefficients C_n of f = sum_n C_n s^n over odd n."""

    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for n, c in dict(self.terms).items():
            if int(n) != n or int(n) % 2 == 0:
                raise ValueError(f"gauge exponents must be odd integers, got {n}")
            clean[int(n)] = float(c)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def parse(cls, text: str) -> "GaugeCoefficients":
        """``"1:2,-1:0.5,3:-1"`` -> {1: 2, -1: 0.5, 3: -1}."""
        terms = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            n, c = part.split(":")
            terms[int(n)] = float(c)
        return cls(terms)


def _svals(s) -> np.ndarray:
    v = np.asarray(s.values if isinstance(s, GridField) else s, dtype=float)
    if np.any(v == 0.0):
        raise ZeroDensity("psibar psi vanishes at some site; gauge functions undefined")
    return v


def gauge_f_values(s, c: GaugeCoefficients) -> np.ndarray:
    v = _svals(s)
    out = np.zeros_like(v)
    for n, cn in c.terms.items():
        out += cn * v ** float(n)
    return out


def gauge_alpha_values(s, c: GaugeCoefficients, e: float = 1.0) -> np.ndarray:
    v = _svals(s)
    out = np.zeros_like(v)
    for n, cn in c.terms.items():
        if n == -1:
            out -= cn * np.log(np.abs(v))
        else:
            out += cn * n / (n + 1) * v ** float(n + 1)
    return e * out


def gauge_f(s: GridField, c: GaugeCoefficients) -> GridField:
    return s.replace(gauge_f_values(s, c))


def gauge_alpha(s: GridField, c: GaugeCoefficients, e: float = 1.0) -> GridField:
    return s.replace(gauge_alpha_values(s, c, e))


def gauge_constraint_residual(s: GridField, c: GaugeCoefficients, e: float = 1.0) -> float:
    """Max-norm over interior sites and grid axes of d alpha - e s d f."""
    f = gauge_f_values(s, c)
    a = gauge_alpha_values(s, c, e)
    sv = _interior(_svals(s))
    worst = 0.0
    for ax, h in enumerate(s.spacing):
        r = _central(a, ax, h) - e * sv * _central(f, ax, h)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def gauge_transform(psi: GridField, A: GridField, s_field: GridField, c: GaugeCoefficients,
                    e: float = 1.0):
    """psi' = psi exp(-i alpha), A'_mu = A_mu + d_mu f (second-order differences)."""
    if A.ncomp != 4 or A.shape != psi.shape or s_field.shape != psi.shape:
        raise GridError("psi, A and s must share one grid")
    f = gauge_f_values(s_field, c)
    a = gauge_alpha_values(s_field, c, e)
    psi_new = psi.replace(np.asarray(psi.values) * np.exp(-1j * a)[None])
    A_new = np.array(A.values, dtype=np.result_type(A.values, float), copy=True)
    for ax, h in enumerate(s_field.spacing):
        A_new[ax] = A_new[ax] + np.gradient(f, h, axis=ax, edge_order=2)
    return psi_new, A.replace(A_new)


def times_density(s: GridField, A: GridField) -> GridField:
    """A^T_mu = s A_mu."""
    return A.replace(np.asarray(s.values)[None] * np.asarray(A.values))


def dalembert_density_residual(psi: GridField) -> float:
    """Max-norm of the discrete (d_t^2 - d_x^2)(psibar psi) over interior sites."""
    _check_spacetime(psi)
    s = scalar_density(psi)
    ht, hx = psi.spacing
    box = ((s[2:, 1:-1] - 2 * s[1:-1, 1:-1] + s[:-2, 1:-1]) / ht**2
           - (s[1:-1, 2:] - 2 * s[1:-1, 1:-1] + s[1:-1, :-2]) / hx**2)
    return float(np.max(np.abs(box)))


# ---------------------------------------------------------------------------
# fluctuation mass


def fluctuation_mass_sq(eps: GridField, kap: GridField) -> GridField:
    """mu^2 = -2 eps_rho kappa^rho (both given as contravariant components)."""
    if eps.ncomp != 4 or kap.ncomp != 4:
        raise GridError("eps and kappa must be four-vector fields")
    if eps.shape != kap.shape or eps.spacing != kap.spacing:
        raise GridError(f"grid mismatch: {eps.shape} vs {kap.shape}")
    contr = np.einsum("m,m...,m...->...", np.diag(METRIC), np.asarray(eps.values),
                      np.asarray(kap.values))
    return GridField(-2.0 * contr, eps.spacing, eps.origin, 0, eps.dims)


# ---------------------------------------------------------------------------
# serialization


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_field(stem, f: GridField, comment: str | None = None) -> tuple[Path, Path]:
    """Flat little-endian binary ``stem.bin`` plus a plain-text header ``stem.hdr``.

    ``comment`` is written verbatim as the first header line (prefixed by ``#``).
    """
    stem = Path(stem)
    vals = np.ascontiguousarray(f.values)
    dtype = np.dtype(np.complex128 if np.iscomplexobj(vals) else np.float64).newbyteorder("<")
    hdr = stem.with_suffix(".hdr")
    binp = stem.with_suffix(".bin")
    lines = [] if comment is None else ["# " + comment.lstrip("# ")]
    lines += [
        f"dims = {f.dims}",
        f"ncomp = {f.ncomp}",
        "shape = " + " ".join(str(n) for n in f.shape),
        "spacing = " + " ".join(repr(h) for h in f.spacing),
        "origin = " + " ".join(repr(o) for o in f.origin),
        f"dtype = {dtype.str}",
        "order = C",
    ]
    lines += [f"meta.{k} = {v}" for k, v in sorted(f.meta.items())]
    hdr.write_text("\n".join(lines) + "\n")
    binp.write_bytes(vals.astype(dtype).tobytes(order="C"))
    return hdr, binp


def read_field(stem) -> GridField:
    stem = Path(stem)
    info = {}
    for line in stem.with_suffix(".hdr").read_text().splitlines():
        if "=" in line and not line.startswith("#"):
            k, v = line.split("=", 1)
            info[k.strip()] = v.strip()
    shape = tuple(int(n) for n in info["shape"].split())
    ncomp = int(info["ncomp"])
    full = ((ncomp,) if ncomp else ()) + shape
    vals = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype=np.dtype(info["dtype"]))
    meta = {k[5:]: v for k, v in info.items() if k.startswith("meta.")}
    return GridField(
        vals.reshape(full).astype(vals.dtype.newbyteorder("=")),
        tuple(float(h) for h in info["spacing"].split()),
        tuple(float(o) for o in info["origin"].split()),
        ncomp, info["dims"], meta,
    )


def slice_rows(f: GridField, axis: int = 0, index=None):
    """(coordinate, value) rows along one axis through ``index`` (default: grid centre)."""
    if f.ncomp:
        raise GridError("slices are defined for scalar fields")
    idx = list(index) if index is not None else [n // 2 for n in f.shape]
    idx[axis] = slice(None)
    line = np.asarray(f.values)[tuple(idx)]
    return list(zip(f.axis(axis), line))


def write_slice_csv(path, f: GridField, axis: int = 0, index=None, comment: str | None = None) -> Path:
    path = Path(path)
    rows = slice_rows(f, axis, index)
    cplx = np.iscomplexobj(f.values)
    head = "coord,re,im" if cplx else "coord,value"
    out = [] if comment is None else ["# " + comment.lstrip("# ")]
    out.append(head)
    for x, v in rows:
        out.append(",".join([_fmt(x), _fmt(v.real), _fmt(v.imag)] if cplx else [_fmt(x), _fmt(v)]))
    path.write_text("\n".join(out) + "\n")
    return path
