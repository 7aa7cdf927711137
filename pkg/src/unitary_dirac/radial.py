"""Shooting solver for Coulomb bound states of the radial Dirac system.

The radial reduction is psi = (1/r) (G chi_kappa, i F chi_-kappa). With
a = Z*alpha the two couplings are

    scalar:  G' = -(kappa/r) G + (E + m - a/r) F
             F' =  (kappa/r) F - (E - m + a/r) G
    vector:  G' = -(kappa/r) G + (E + m + a/r) F
             F' =  (kappa/r) F - (E - m + a/r) G

The system is integrated in x = ln r with a classical fourth-order
Runge-Kutta step. Because it is linear, every step is a 2x2 transfer
matrix; products of those matrices are formed by pairwise reduction so
many trial energies can be handled in a single numpy pass.

The matching defect is the Wronskian G_out F_in - F_out G_in of the
outward and inward solutions, divided by their norms at the matching
radius. The coefficient matrix is traceless, so the exact Wronskian is
independent of r and vanishes only at eigenvalues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .constants import ALPHA
from .errors import GridTooCoarse, NoConvergence, SingularRegime

R_MAX_FACTOR = 40.0
R_MIN_FACTOR = 1e-6
E_TOL = 1e-12
MAX_BISECT = 200
DEFECT_TOL = 1e-6


@dataclass(frozen=True)
class RadialProblem:
    coupling: str
    Z: float
    kappa: int
    n_r: int = 0
    alpha: float = ALPHA
    m: float = 1.0
    n_points: int = 2500
    r_min: float | None = None
    r_max: float | None = None

    def __post_init__(self):
        if self.coupling not in ("scalar", "vector"):
            raise ValueError(f"coupling must be 'scalar' or 'vector', got {self.coupling!r}")
        if self.kappa == 0 or int(self.kappa) != self.kappa:
            raise ValueError("kappa must be a nonzero integer")
        if self.n_r < 0:
            raise ValueError("n_r must be >= 0")
        if self.Z <= 0:
            raise ValueError("Z must be positive")
        if self.n_points < 16:
            raise ValueError("need at least 16 grid points")
        if self.coupling == "vector" and self.za >= abs(self.kappa):
            raise SingularRegime(
                f"vector coupling needs Z*alpha < |kappa|; got {self.za:.6g} >= {abs(self.kappa)}"
            )

    @property
    def za(self) -> float:
        return self.Z * self.alpha

    @property
    def gamma(self) -> float:
        sign = 1.0 if self.coupling == "scalar" else -1.0
        return math.sqrt(self.kappa**2 + sign * self.za**2)

    @property
    def rmin(self) -> float:
        return self.r_min if self.r_min is not None else R_MIN_FACTOR / (self.Z * self.m)

    def decay(self, E):
        return np.sqrt(np.maximum(self.m**2 - np.asarray(E, dtype=float) ** 2, 0.0))

    def rmax(self, E):
        """Outer radius; ``R_MAX_FACTOR / lambda(E)`` unless fixed by the caller."""
        if self.r_max is not None:
            return np.full(np.shape(E), float(self.r_max))
        lam = self.decay(E)
        return R_MAX_FACTOR / np.maximum(lam, 1e-300)

    def grid(self, E: float) -> np.ndarray:
        return np.geomspace(self.rmin, float(self.rmax(E)), self.n_points)


@dataclass
class BoundState:
    energy: float
    r: np.ndarray
    G: np.ndarray
    F: np.ndarray
    node_count: int
    converged: bool
    residual: float
    iterations: int = 0
    problem: RadialProblem | None = field(default=None, repr=False)

    def norm(self) -> float:
        x = np.log(self.r)
        return float(simpson((self.G**2 + self.F**2) * self.r, x=x))


# ---------------------------------------------------------------------------
# transfer matrices


def _coeff(p: RadialProblem, r, E):
    """d(G, F)/dx = A y; returns A with shape r.shape + (2, 2)."""
    a = p.za
    s = -1.0 if p.coupling == "scalar" else 1.0
    A = np.empty(np.shape(r) + (2, 2))
    A[..., 0, 0] = -p.kappa
    A[..., 0, 1] = r * (E + p.m) + s * a
    A[..., 1, 0] = -(r * (E - p.m) + a)
    A[..., 1, 1] = p.kappa
    return A


def _rk4_matrices(p: RadialProblem, r: np.ndarray, E: np.ndarray, backward: bool = False):
    """One-step RK4 propagators on the log grid ``r`` (shape (nE, N)).

    Forward: y_{k+1} = M_k y_k. Backward: y_k = M_k y_{k+1}.
    """
    Eb = E[:, None]
    h = np.log(r[:, 1] / r[:, 0])[:, None, None, None]
    r0, r1 = r[:, :-1], r[:, 1:]
    rh = np.sqrt(r0 * r1)
    A0 = _coeff(p, r0, Eb)
    Ah = _coeff(p, rh, Eb)
    A1 = _coeff(p, r1, Eb)
    if backward:
        A0, A1, h = A1, A0, -h
    eye = np.eye(2)
    K1 = A0
    K2 = Ah @ (eye + 0.5 * h * K1)
    K3 = Ah @ (eye + 0.5 * h * K2)
    K4 = A1 @ (eye + h * K3)
    return eye + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)


def _chain(mats: np.ndarray) -> np.ndarray:
    """Ordered product mats[..., L-1] @ ... @ mats[..., 0] by pairwise reduction."""
    while mats.shape[1] > 1:
        if mats.shape[1] % 2:
            pad = np.broadcast_to(np.eye(2), mats.shape[:1] + (1, 2, 2))
            mats = np.concatenate([mats, pad], axis=1)
        mats = mats[:, 1::2] @ mats[:, 0::2]
    return mats[:, 0]


def _seed_origin(p: RadialProblem, E: np.ndarray, r0: np.ndarray) -> np.ndarray:
    """(G, F) ~ r^gamma (A0 + A1 r, B0 + B1 r) at r0, scaled to unit leading amplitude."""
    a, k, g, m = p.za, p.kappa, p.gamma, p.m
    s = -1.0 if p.coupling == "scalar" else 1.0
    # leading order: (g + k) A0 = s a B0
    A0 = np.ones_like(E)
    B0 = (g + k) / (s * a) * A0
    # next order: (g+1+k) A1 - s a B1 = (E+m) B0 ; a A1 + (g+1-k) B1 = -(E-m) A0
    det = (g + 1 + k) * (g + 1 - k) + s * a * a
    rhs1 = (E + m) * B0
    rhs2 = -(E - m) * A0
    A1 = (rhs1 * (g + 1 - k) + s * a * rhs2) / det
    B1 = ((g + 1 + k) * rhs2 - a * rhs1) / det
    return np.stack([A0 + A1 * r0, B0 + B1 * r0], axis=-1)


def _seed_infinity(p: RadialProblem, E: np.ndarray) -> np.ndarray:
    lam = p.decay(E)
    return np.stack([np.ones_like(E), -lam / (E + p.m)], axis=-1)


def _match_index(p: RadialProblem, r: np.ndarray, E: float) -> int:
    """Outermost classical turning point of the G-channel effective potential."""
    a = p.za
    if p.coupling == "scalar":
        k2 = E**2 - (p.m - a / r) ** 2
    else:
        k2 = (E + a / r) ** 2 - p.m**2
    k2 = k2 - p.kappa * (p.kappa + 1) / r**2
    allowed = np.nonzero(k2 > 0)[0]
    idx = int(allowed[-1]) if allowed.size else int(np.argmax(k2))
    n = r.size
    return min(max(idx, n // 20), n - n // 20)


def _defects(p: RadialProblem, energies, match: int | None = None, chunk: int = 16):
    """Normalized matching Wronskian for each trial energy."""
    E_all = np.atleast_1d(np.asarray(energies, dtype=float))
    out = np.empty(E_all.size)
    idx_all = np.empty(E_all.size, dtype=int)
    for start in range(0, E_all.size, chunk):
        E = E_all[start:start + chunk]
        r = np.stack([p.grid(e) for e in E])
        fwd = _rk4_matrices(p, r, E)
        bwd = _rk4_matrices(p, r, E, backward=True)
        y0 = _seed_origin(p, E, r[:, 0])
        yn = _seed_infinity(p, E)
        for i in range(E.size):
            im = match if match is not None else _match_index(p, r[i], E[i])
            y_out = _chain(fwd[i:i + 1, :im])[0] @ y0[i]
            y_in = _chain(bwd[i:i + 1, im:][:, ::-1])[0] @ yn[i]
            w = y_out[0] * y_in[1] - y_out[1] * y_in[0]
            out[start + i] = w / (np.hypot(*y_out) * np.hypot(*y_in))
            idx_all[start + i] = im
    return out, idx_all


def _solution(p: RadialProblem, E: float, match: int):
    """Stitched (r, G, F) on the grid for energy E, inward part scaled to G_out at the match."""
    r = p.grid(E)
    Ea = np.array([E])
    fwd = _rk4_matrices(p, r[None], Ea)[0]
    bwd = _rk4_matrices(p, r[None], Ea, backward=True)[0]
    n = r.size
    y = np.empty((n, 2))
    y[0] = _seed_origin(p, Ea, r[:1])[0]
    for k in range(match):
        y[k + 1] = fwd[k] @ y[k]
    y_in = np.empty((n - match, 2))
    y_in[-1] = _seed_infinity(p, Ea)[0]
    for k in range(n - 2, match - 1, -1):
        y_in[k - match] = bwd[k] @ y_in[k - match + 1]
    scale_ref = y[match, 0] if abs(y[match, 0]) > abs(y[match, 1]) else y[match, 1]
    in_ref = y_in[0, 0] if abs(y[match, 0]) > abs(y[match, 1]) else y_in[0, 1]
    y[match:] = y_in * (scale_ref / in_ref)
    return r, y[:, 0], y[:, 1]


def count_nodes(values: np.ndarray, rel_floor: float = 1e-10) -> int:
    v = values[np.abs(values) > rel_floor * np.max(np.abs(values))]
    return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))


def _node_count_at(p: RadialProblem, E: float, match: int) -> int:
    _, G, _ = _solution(p, E, match)
    return count_nodes(G)


# ---------------------------------------------------------------------------
# public operations


def eigen_scan(p: RadialProblem, E_lo: float, E_hi: float, steps: int):
    """Sample the matching defect on a uniform energy grid.

    Returns a list of ``(E, defect, node_count, sign_change)``; ``sign_change``
    flags a defect sign flip between that sample and the previous one.
    """
    if not (-p.m < E_lo <= E_hi < p.m):
        raise ValueError("scan range must satisfy -m < E_lo <= E_hi < m")
    if steps < 1 or (steps > 1 and E_hi <= E_lo):
        raise ValueError("empty scan range")
    E = np.array([E_lo]) if steps == 1 else np.linspace(E_lo, E_hi, steps)
    d, idx = _defects(p, E)
    rows = []
    for i, (e, di) in enumerate(zip(E, d)):
        flag = i > 0 and np.sign(di) != np.sign(d[i - 1])
        rows.append((float(e), float(di), _node_count_at(p, float(e), int(idx[i])), bool(flag)))
    return rows


def _scan_brackets(p: RadialProblem, branch: int = 1, n_samples: int = 120):
    """Defect sign changes on a log grid of decay constants, ascending in |E|."""
    a = p.za
    lam_hi = p.m * (1.0 - 1e-9)
    lam_lo = p.m * min(a, 1.0) / (4.0 * (p.n_r + abs(p.kappa) + 1))
    lam = np.geomspace(lam_hi, lam_lo, n_samples)
    E = branch * np.sqrt(p.m**2 - lam**2)
    d, _ = _defects(p, E)
    brackets = []
    for i in range(1, E.size):
        if d[i - 1] == 0.0:
            brackets.append((E[i - 1], E[i - 1]))
        elif np.sign(d[i]) != np.sign(d[i - 1]):
            brackets.append(tuple(sorted((E[i - 1], E[i]))))
    return brackets


def _bisect(p: RadialProblem, lo: float, hi: float, match: int, e_tol: float = E_TOL):
    d_lo = _defects(p, [lo], match)[0][0]
    if lo == hi or d_lo == 0.0:
        return lo, d_lo, 0
    it = 0
    while hi - lo > e_tol and it < MAX_BISECT:
        mid = 0.5 * (lo + hi)
        d_mid = _defects(p, [mid], match)[0][0]
        it += 1
        if d_mid == 0.0:
            return mid, 0.0, it
        if np.sign(d_mid) == np.sign(d_lo):
            lo, d_lo = mid, d_mid
        else:
            hi = mid
    if hi - lo > e_tol:
        raise NoConvergence(f"bisection stalled with bracket width {hi - lo:.3e}")
    mid = 0.5 * (lo + hi)
    return mid, _defects(p, [mid], match)[0][0], it


def _solve_branch(p: RadialProblem, branch: int, seen: list, e_tol: float, defect_tol: float):
    for lo, hi in _scan_brackets(p, branch):
        mid_e = 0.5 * (lo + hi)
        match = _match_index(p, p.grid(mid_e), mid_e)
        E, defect, iters = _bisect(p, lo, hi, match, e_tol)
        r, G, F = _solution(p, E, match)
        nodes = count_nodes(G)
        seen.append((E, nodes))
        if nodes < p.n_r:
            continue
        if nodes > p.n_r:
            return None
        if abs(defect) > defect_tol:
            raise GridTooCoarse(f"matching defect {defect:.3e} stagnates above {defect_tol}")
        norm = simpson((G**2 + F**2) * r, x=np.log(r))
        sign = 1.0 if G[np.argmax(np.abs(G))] > 0 else -1.0
        scale = sign / math.sqrt(norm)
        return BoundState(E, r, G * scale, F * scale, nodes, True, abs(defect), iters, p)
    return None


def solve_bound(p: RadialProblem, e_tol: float = E_TOL, defect_tol: float = DEFECT_TOL) -> BoundState:
    """Bound state whose G has ``p.n_r`` nodes.

    Positive energies are searched first. Under scalar coupling with
    kappa > 0 the lowest positive level already has one node, and the
    nodeless state is its mirror at negative energy, so that branch is
    searched when the positive one has no match.
    """
    seen: list = []
    state = _solve_branch(p, 1, seen, e_tol, defect_tol)
    if state is None and p.coupling == "scalar":
        state = _solve_branch(p, -1, seen, e_tol, defect_tol)
    if state is None:
        raise NoConvergence(f"no eigenvalue with {p.n_r} nodes; found (E, nodes) = {seen}")
    return state


def default_branch(p: RadialProblem) -> int:
    """Energy sign of the state ``solve_bound`` returns.

    Scalar coupling has no positive level with kappa > 0 and a nodeless G,
    so that case lands on the negative mirror state.
    """
    return -1 if (p.coupling == "scalar" and p.kappa > 0 and p.n_r == 0) else 1


def closed_form_level(p: RadialProblem, energy_sign: int | None = None):
    """Hydrogenic label (n, kappa, branch) of the state ``solve_bound`` targets."""
    from .spectrum import LevelSpec

    if energy_sign is None:
        energy_sign = default_branch(p)
    k = abs(p.kappa)
    if energy_sign < 0:
        return LevelSpec.from_kappa(p.n_r + k, -k, sign=-1)
    extra = 1 if (p.kappa > 0 and p.coupling == "vector") else 0
    return LevelSpec.from_kappa(p.n_r + k + extra, p.kappa)


def closed_form_energy(p: RadialProblem, energy_sign: int | None = None) -> float:
    from .spectrum import CouplingConstants, energy_conventional, energy_modified

    level = closed_form_level(p, energy_sign)
    c = CouplingConstants(p.Z, p.alpha)
    if p.coupling == "scalar":
        return energy_modified(level, c, p.m)
    return energy_conventional(level, c, p.m)
