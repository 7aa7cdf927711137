"""Recipes that recompute the headline numbers and compare them with targets."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import scattering as sc
from .nls import conserved_quantities, evolve, sech_soliton
from .radial import RadialProblem, solve_bound
from .spectrum import CouplingConstants, LevelSpec, energy_conventional, energy_modified, percent_difference


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    target: float | None
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.target is None:
            return f"{status} {self.name}: value={self.measured:.12g}"
        return (f"{status} {self.name}: measured={self.measured:.12g} "
                f"target={self.target:.12g} tol={self.tolerance:.3g}")


def _within(name, measured, target, tol) -> Check:
    return Check(name, measured, target, tol, abs(measured - target) <= tol)


def _flag(name, ok: bool, measured: float = float("nan")) -> Check:
    return Check(name, measured, None, 0.0, bool(ok))


PERCENT_TARGETS = ((50, 0.89, 1), (75, 4.59, 5), (100, 15.36, 15))


def percent_table(alpha: float = sc.ALPHA) -> list[Check]:
    out = []
    for Z, quoted, rounded in PERCENT_TARGETS:
        pct = 100.0 * percent_difference(CouplingConstants(Z, alpha))
        out.append(_within(f"Z={Z} percent difference", pct, quoted, 0.05))
        out.append(Check(f"Z={Z} rounds to {rounded}%", round(pct), rounded, 0.0, round(pct) == rounded))
    return out


def ordering(Z: float = 92, alpha: float = sc.ALPHA, radial: bool = True) -> list[Check]:
    c = CouplingConstants(Z, alpha)
    p12 = LevelSpec.parse("2P1/2")
    p32 = LevelSpec.parse("2P3/2")
    em = energy_modified(p12, c) - energy_modified(p32, c)
    ec = energy_conventional(p12, c) - energy_conventional(p32, c)
    out = [
        _flag("closed form modified E(2P1/2) > E(2P3/2)", em > 0, em),
        _flag("closed form conventional E(2P1/2) < E(2P3/2)", ec < 0, ec),
    ]
    if radial:
        # scalar coupling: the kappa=+1 level with one G node is 2P1/2
        s12 = solve_bound(RadialProblem("scalar", Z, 1, 1, alpha)).energy
        s32 = solve_bound(RadialProblem("scalar", Z, -2, 0, alpha)).energy
        v12 = solve_bound(RadialProblem("vector", Z, 1, 0, alpha)).energy
        v32 = solve_bound(RadialProblem("vector", Z, -2, 0, alpha)).energy
        out += [
            _flag("radial scalar E(2P1/2) > E(2P3/2)", s12 > s32, s12 - s32),
            _flag("radial vector E(2P1/2) < E(2P3/2)", v12 < v32, v12 - v32),
        ]
    return out


def rutherford_limit(Z: float = 1.0, tol: float = 1e-5) -> list[Check]:
    # at |p| = 1e3 m the deviation is m^2 / (p^2 sin^2(theta/2)), below 1e-5 only past ~37 degrees
    thetas = np.linspace(math.pi / 3, math.pi, 40)
    lo = hi = 0.0
    for th in thetas:
        k = sc.ScatterKinematics(math.hypot(1e-3, 1.0), th)
        lo = max(lo, abs(sc.dcs_coulomb(k, Z) / sc.rutherford(k, Z) - 1.0))
        k = sc.ScatterKinematics(math.hypot(1e3, 1.0), th)
        hi = max(hi, abs(sc.dcs_coulomb(k, Z) / sc.coulomb_relativistic_limit(k, Z) - 1.0))
    return [
        Check("|p|=1e-3 m vs Rutherford, max rel. dev.", lo, 0.0, tol, lo <= tol),
        Check("|p|=1e3 m vs high-energy form, max rel. dev.", hi, 0.0, tol, hi <= tol),
    ]


def soliton(n: int = 1024, dt: float = 1e-3, T: float = 10.0, length: float = 50.0) -> list[Check]:
    s0 = sech_soliton(n, length, g=-1.0, dt=dt)
    s1 = evolve(s0, T)
    shape = float(np.max(np.abs(np.abs(s1.psi.values) - 1.0 / np.cosh(s0.x))))
    drift = abs(conserved_quantities(s1)[0] - conserved_quantities(s0)[0])
    return [
        Check(f"sech shape L-inf error at T={T:g}", shape, 0.0, 1e-6, shape < 1e-6),
        Check("total norm drift", drift, 0.0, 1e-9, drift < 1e-9),
    ]


def random_elastic_pairs(rng: np.random.Generator, count: int, m: float = 1.0):
    for _ in range(count):
        p = m * 10.0 ** rng.uniform(-2, 2)
        th = rng.uniform(1e-3, math.pi)
        yield sc.elastic_pair(p, th, m, rng.uniform(0, 2 * math.pi))


def random_ep_kinematics(rng: np.random.Generator, count: int, m: float = 1.0):
    for _ in range(count):
        E = m * (1.0 + 10.0 ** rng.uniform(-1, 4))
        M = m * 10.0 ** rng.uniform(1, 4)
        yield sc.ScatterKinematics(E, rng.uniform(1e-2, math.pi - 1e-3), m, M)


def spin_sum_errors(count: int = 1000, seed: int = 0) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    e1 = max(abs(sc.sigma1(a, b) / sc.sigma1_closed(a, b) - 1.0)
             for a, b in random_elastic_pairs(rng, count))
    e2 = max(abs(sc.sigma2(k) / sc.sigma2_closed(k) - 1.0)
             for k in random_ep_kinematics(rng, count))
    return e1, e2


def spin_sums(count: int = 1000, seed: int = 0) -> list[Check]:
    e1, e2 = spin_sum_errors(count, seed)
    return [
        Check(f"Sigma1 trace vs closed form, {count} draws", e1, 0.0, 1e-12, e1 <= 1e-12),
        Check(f"Sigma2 trace vs closed form, {count} draws", e2, 0.0, 1e-10, e2 <= 1e-10),
    ]


TARGETS = {
    "percent-table": percent_table,
    "ordering": ordering,
    "rutherford-limit": rutherford_limit,
    "soliton": soliton,
    "spin-sums": spin_sums,
}
