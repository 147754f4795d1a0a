"""Uniform 1D spatial grids used to discretize wave functions.

All gridded quantities in the package live on these grids; two gridded
objects can only be combined when they share the same grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on [x_min, x_max] with n_points samples (endpoints included)."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise InvalidParameterError("x_max must exceed x_min")
        if self.n_points < 64:
            raise InvalidParameterError("n_points must be at least 64")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        """FFT-ordered wavenumbers for spectral free propagation."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    @property
    def span(self) -> float:
        return self.x_max - self.x_min

    @classmethod
    def centered(cls, half_width: float, n_points: int = 512) -> "SpatialGrid":
        """Symmetric grid [-half_width, half_width]."""
        return cls(-float(half_width), float(half_width), n_points)


def inner_product(f: np.ndarray, g: np.ndarray, grid: SpatialGrid) -> complex:
    """Discrete L2 inner product <f|g> (conjugate-linear in f)."""
    return complex(np.vdot(f, g) * grid.spacing)


def l2_norm(f: np.ndarray, grid: SpatialGrid) -> float:
    return float(np.sqrt(np.sum(np.abs(f) ** 2) * grid.spacing))
