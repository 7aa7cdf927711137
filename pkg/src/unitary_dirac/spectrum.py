"""Closed-form bound-state energies for hydrogen-like ions.

Two theories are compared side by side:

* the scalar-coupled (time-inversion symmetric) equation, whose levels are
  ``E = +-m sqrt(1 - (Za)^2 / (n - k + sqrt(k^2 + (Za)^2))^2)`` with
  ``k = j + 1/2``;
* the conventional Dirac-Coulomb (Sommerfeld) spectrum.

Energies are in units of the electron mass unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .constants import ALPHA, ELECTRON_MASS_EV
from .errors import InvalidQuantumNumbers, SeriesGuardError, SingularRegime, WeakFieldError

SERIES_LIMIT = 0.3
WEAK_FIELD_RATIO = 0.1


@dataclass(frozen=True)
class CouplingConstants:
    Z: float
    alpha: float = ALPHA

    def __post_init__(self):
        if not (self.alpha > 0 and self.Z > 0):
            raise ValueError("alpha and Z must be positive")

    @property
    def za(self) -> float:
        return self.Z * self.alpha


@dataclass(frozen=True)
class LevelSpec:
    """Hydrogenic level |n l j>, energy branch ``sign``."""

    n: int
    j: Fraction
    l: int
    sign: int = 1
    kappa: int = field(init=False)

    def __post_init__(self):
        j = Fraction(self.j)
        object.__setattr__(self, "j", j)
        if self.n < 1 or int(self.n) != self.n:
            raise InvalidQuantumNumbers(f"n must be a positive integer, got {self.n}")
        if j.denominator != 2 or j < Fraction(1, 2):
            raise InvalidQuantumNumbers(f"j must be a positive half-integer, got {j}")
        if j > self.n - Fraction(1, 2):
            raise InvalidQuantumNumbers(f"j={j} exceeds n - 1/2 for n={self.n}")
        if self.l < 0 or self.l > self.n - 1 or abs(self.l - j) != Fraction(1, 2):
            raise InvalidQuantumNumbers(f"l={self.l} incompatible with n={self.n}, j={j}")
        if self.sign not in (1, -1):
            raise InvalidQuantumNumbers("sign must be +1 or -1")
        k = int(j + Fraction(1, 2))
        object.__setattr__(self, "kappa", -k if self.l < j else k)

    @property
    def k(self) -> int:
        """j + 1/2 = |kappa|."""
        return abs(self.kappa)

    @property
    def label(self) -> str:
        letter = "SPDFGHIK"[self.l] if self.l < 8 else f"l{self.l}"
        return f"{self.n}{letter}{self.j.numerator}/{self.j.denominator}"

    @classmethod
    def from_kappa(cls, n: int, kappa: int, sign: int = 1) -> "LevelSpec":
        if kappa == 0:
            raise InvalidQuantumNumbers("kappa must be nonzero")
        j = Fraction(abs(kappa)) - Fraction(1, 2)
        l = abs(kappa) - 1 if kappa < 0 else abs(kappa)
        return cls(n, j, l, sign)

    @classmethod
    def parse(cls, text: str, sign: int = 1) -> "LevelSpec":
        """Parse spectroscopic labels such as ``2P1/2`` or ``1S1/2``."""
        t = text.strip().upper()
        i = 0
        while i < len(t) and t[i].isdigit():
            i += 1
        if i == 0 or i >= len(t):
            raise InvalidQuantumNumbers(f"cannot parse level {text!r}")
        n = int(t[:i])
        l = "SPDFGHIK".index(t[i])
        j = Fraction(t[i + 1:]) if t[i + 1:] else Fraction(2 * l + 1, 2)
        return cls(n, j, l, sign)


def levels_for_n(n: int) -> list[LevelSpec]:
    """All (l, j) combinations for principal number n, ordered by l then j."""
    out = []
    for l in range(n):
        for j2 in (2 * l - 1, 2 * l + 1):
            if j2 > 0:
                out.append(LevelSpec(n, Fraction(j2, 2), l))
    return out


def energy_modified(level: LevelSpec, c: CouplingConstants, m: float = 1.0) -> float:
    za2 = c.za**2
    k = level.k
    denom = level.n - k + math.sqrt(k * k + za2)
    return level.sign * m * math.sqrt(1.0 - za2 / (denom * denom))


def energy_conventional(level: LevelSpec, c: CouplingConstants, m: float = 1.0) -> float:
    """Sommerfeld fine-structure formula (vector Coulomb coupling)."""
    za = c.za
    k = level.k
    if za >= k:
        raise SingularRegime(
            f"Z*alpha = {za:.6g} >= j + 1/2 = {k}: no real conventional bound state"
        )
    denom = level.n - k + math.sqrt(k * k - za * za)
    return level.sign * m / math.sqrt(1.0 + za * za / (denom * denom))


def energy_series(level: LevelSpec, c: CouplingConstants, m: float = 1.0) -> float:
    """Expansion of the scalar-coupled level through (Za)^4."""
    za = c.za
    if za >= SERIES_LIMIT:
        raise SeriesGuardError(f"series requires Z*alpha < {SERIES_LIMIT}, got {za:.4g}")
    n = level.n
    return m * (
        1.0
        - za**2 / (2 * n * n)
        + za**4 / (2 * n**3) * (1.0 / level.k - 1.0 / (4 * n))
    )


def fine_splitting(n: int, j1, j2, c: CouplingConstants, m: float = 1.0) -> float:
    for j in (j1, j2):
        jf = Fraction(j)
        if jf.denominator != 2 or jf < Fraction(1, 2) or jf > n - Fraction(1, 2):
            raise InvalidQuantumNumbers(f"j={jf} invalid for n={n}")
    k1 = float(Fraction(j1) + Fraction(1, 2))
    k2 = float(Fraction(j2) + Fraction(1, 2))
    return m * c.za**4 / (2 * n**3) * abs(1.0 / k1 - 1.0 / k2)


def percent_difference(c: CouplingConstants) -> float:
    """1 - E_conv/E_mod for the ground state, i.e. 1 - sqrt(1 - (Za)^4)."""
    za = c.za
    if za >= 1.0:
        raise SingularRegime(f"Z*alpha = {za:.6g} >= 1: conventional ground state undefined")
    return 1.0 - math.sqrt(1.0 - za**4)


@dataclass
class LevelRow:
    level: LevelSpec
    e_modified: float
    e_conventional: float | None
    rank_modified: int
    rank_conventional: int | None

    @property
    def singular(self) -> bool:
        return self.e_conventional is None


def level_order_report(n: int, c: CouplingConstants, m: float = 1.0) -> list[LevelRow]:
    """Energies of every level with principal number n and their ranks.

    Rank 1 is the highest energy. Levels sharing j are degenerate and get
    the same rank. Conventional entries beyond Za >= j + 1/2 are None.
    """
    levels = levels_for_n(n)
    e_mod = [energy_modified(lv, c, m) for lv in levels]
    e_conv: list[float | None] = []
    for lv in levels:
        try:
            e_conv.append(energy_conventional(lv, c, m))
        except SingularRegime:
            e_conv.append(None)

    def ranks(values):
        distinct = sorted({round(v, 15) for v in values if v is not None}, reverse=True)
        return [None if v is None else distinct.index(round(v, 15)) + 1 for v in values]

    rm, rc = ranks(e_mod), ranks(e_conv)
    return [LevelRow(lv, em, ec, a, b) for lv, em, ec, a, b in zip(levels, e_mod, e_conv, rm, rc)]


def lande_g(l: int, j: Fraction) -> float:
    """Landé factor for k = l + sigma in the |l s=1/2 j m_j> basis."""
    jj = float(j)
    if jj == 0:
        return 0.0
    return 1.0 + (jj * (jj + 1) - l * (l + 1) + 0.75) / (2 * jj * (jj + 1))


@dataclass(frozen=True)
class ZeemanLine:
    m_j: Fraction
    shift: float
    energy: float


def zeeman_pattern(
    level: LevelSpec, c: CouplingConstants, B: float, m: float = 1.0
) -> list[ZeemanLine]:
    """First-order weak-field shifts <-(e/2m) k.B> for each m_j.

    ``B`` is given in units of m^2/e, so e*B = B*m^2 and the shift is
    -(B m / 2) g_j m_j. Each line also carries the absolute sublevel energy
    on top of the scalar-coupled level energy, which fixes the stacking
    of j-multiplets (smaller j higher).
    """
    if level.n >= 2:
        other_j = level.j + 1 if level.j + 1 <= level.n - Fraction(1, 2) else level.j - 1
        if other_j < Fraction(1, 2):
            other_j = level.j
        scale = fine_splitting(level.n, level.j, other_j, c, m)
        if scale == 0.0:
            scale = fine_splitting(level.n, Fraction(1, 2), Fraction(3, 2), c, m)
    else:
        scale = abs(
            energy_modified(LevelSpec(2, Fraction(1, 2), 0), c, m)
            - energy_modified(level, c, m)
        )
    g = lande_g(level.l, level.j)
    e0 = energy_modified(level, c, m)
    lines = []
    twice_j = int(2 * level.j)
    for k in range(twice_j + 1):
        mj = Fraction(-twice_j + 2 * k, 2)
        shift = -0.5 * B * m * g * float(mj)
        lines.append(ZeemanLine(mj, shift, e0 + shift))
    max_shift = max(abs(ln.shift) for ln in lines)
    if max_shift > WEAK_FIELD_RATIO * scale:
        raise WeakFieldError(
            f"Zeeman shift {max_shift:.3e} not small against level spacing {scale:.3e}"
        )
    return lines


def to_ev(value: float) -> float:
    return value * ELECTRON_MASS_EV


def level_energies(levels, c: CouplingConstants, m: float = 1.0) -> np.ndarray:
    return np.array([energy_modified(lv, c, m) for lv in levels])
