"""Uniformly sampled fields on rectangular grids."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

MIN_POINTS = 8


@dataclass(frozen=True)
class GridField:
    """Complex or real samples on a uniform grid.

    ``values`` has shape ``(ncomp, *shape)`` for multi-component fields
    (spinors, four-vectors) and ``shape`` for scalars (``ncomp == 0``).
    For ``dims == "1+1"`` the grid axes are ``(t, x)``.
    """

    values: np.ndarray
    spacing: tuple[float, ...]
    origin: tuple[float, ...]
    ncomp: int = 0
    dims: str = "3"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        grid_shape = self.shape
        if len(grid_shape) != len(self.spacing) or len(self.origin) != len(self.spacing):
            raise GridError(
                f"values shape {vals.shape} does not match spacing {self.spacing}"
            )
        if any(n < MIN_POINTS for n in grid_shape):
            raise GridError(f"need at least {MIN_POINTS} samples per axis, got {grid_shape}")
        if any(h <= 0 for h in self.spacing):
            raise GridError("grid spacing must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[1:] if self.ncomp else self.values.shape

    @property
    def ndim(self) -> int:
        return len(self.spacing)

    def axis(self, k: int) -> np.ndarray:
        return self.origin[k] + self.spacing[k] * np.arange(self.shape[k])

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*(self.axis(k) for k in range(self.ndim)), indexing="ij")

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def replace(self, values) -> "GridField":
        return GridField(values, self.spacing, self.origin, self.ncomp, self.dims, dict(self.meta))

    def component_axis(self, k: int) -> int:
        """Array axis of grid axis ``k`` in ``values``."""
        return k + (1 if self.ncomp else 0)

    @classmethod
    def from_function(cls, func, shape, spacing, origin, ncomp=0, dims="3"):
        axes = [o + h * np.arange(n) for n, h, o in zip(shape, spacing, origin)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(np.asarray(func(*mesh)), spacing, origin, ncomp, dims)


def centered(n: int, h: float) -> float:
    """Origin placing sample ``n // 2`` at zero."""
    return -(n // 2) * h


def is_time_symmetric(field_: GridField, rtol: float = 1e-12) -> bool:
    nt = field_.shape[0]
    if nt % 2 == 0:
        return False
    t_mid = field_.origin[0] + field_.spacing[0] * (nt // 2)
    return abs(t_mid) <= rtol * max(1.0, abs(field_.origin[0]))
