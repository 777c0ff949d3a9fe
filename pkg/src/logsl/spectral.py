"""Periodic grids, complex fields, Fourier coefficients and the polar reduction.

Conventions
-----------
The torus is ``[-pi, pi)^d`` sampled at ``K`` points per axis,
``x_k = -pi + k * 2pi/K``.  Fourier coefficients are normalized so that they
approximate ``(2pi)^-d * integral(u(x) exp(-i n.x) dx)``::

    coefficients = fftn(values) * exp(i n.x_0) / K**d

with the phase factor accounting for the grid starting at ``-pi`` instead of 0.
A constant field ``c`` therefore has coefficient ``c`` at frequency 0, a plane
wave ``exp(i m.x)`` has coefficient 1 at frequency ``m``, and
``sum |u_n|^2`` equals the grid mean of ``|u|^2`` (Parseval).  Coefficients are
stored in numpy FFT order: ``0, 1, ..., K/2-1, -K/2, ..., -1`` along each axis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainViolation, InvalidParam, ZeroMean

DEFAULT_MEAN_EPS = 1e-12
DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``K`` points on each of ``dim`` axes."""

    dim: int = 1
    K: int = 128

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidParam(f"dimension must be a positive integer, got {self.dim!r}")
        if int(self.K) != self.K or self.K < 4 or self.K & (self.K - 1):
            raise InvalidParam(f"K must be a power of two >= 4, got {self.K!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "K", int(self.K))

    @property
    def dx(self) -> float:
        return 2.0 * np.pi / self.K

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.K,) * self.dim

    @property
    def size(self) -> int:
        return self.K**self.dim

    def points(self) -> np.ndarray:
        """1-D grid coordinates ``-pi + k dx``."""
        return -np.pi + self.dx * np.arange(self.K)

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        x = self.points()
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def frequencies(self) -> np.ndarray:
        """Integer frequencies per axis in FFT order."""
        return np.fft.fftfreq(self.K, d=1.0 / self.K).round().astype(np.int64)

    def frequency_mesh(self) -> tuple[np.ndarray, ...]:
        k = self.frequencies()
        return tuple(np.meshgrid(*([k] * self.dim), indexing="ij"))

    def frequency_norm_sq(self) -> np.ndarray:
        """``|n|^2`` for every frequency, shape ``self.shape``."""
        return sum(k.astype(np.float64) ** 2 for k in self.frequency_mesh())

    def index_of(self, mode) -> tuple[int, ...]:
        """Array index of the integer frequency ``mode`` (int or length-``dim`` sequence)."""
        mode = np.atleast_1d(np.asarray(mode, dtype=np.int64))
        if mode.size != self.dim:
            raise InvalidParam(f"mode {mode.tolist()} does not have {self.dim} components")
        half = self.K // 2
        if np.any(mode < -half) or np.any(mode >= half):
            raise InvalidParam(f"mode {mode.tolist()} outside the resolved band [-{half}, {half})")
        return tuple(int(m) % self.K for m in mode)

    def shift_phase(self) -> np.ndarray:
        """``exp(i n.x_0)`` correcting the raw DFT for the grid origin at ``-pi``."""
        # n.x_0 = -pi * sum(n); exp(-i pi n) = (-1)^n for integer n
        total = sum(self.frequency_mesh())
        return np.where(total % 2 == 0, 1.0, -1.0)


def _as_grid_array(grid: GridSpec, values) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if arr.size != grid.size:
        raise InvalidParam(f"expected {grid.size} values for {grid}, got {arr.size}")
    return arr.reshape(grid.shape)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on ``grid`` (physical space)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        arr = _as_grid_array(self.grid, self.values)
        if not np.all(np.isfinite(arr)):
            raise InvalidParam("field contains NaN or Inf values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_function(cls, grid: GridSpec, func: Callable[..., np.ndarray]) -> "Field":
        """Sample ``func(x1, ..., xd)`` on the grid."""
        return cls(grid, func(*grid.mesh()))

    @classmethod
    def constant(cls, grid: GridSpec, value: complex) -> "Field":
        return cls(grid, np.full(grid.shape, value, dtype=np.complex128))

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients of a field, FFT-ordered along every axis."""

    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self):
        arr = _as_grid_array(self.grid, self.coefficients)
        arr.flags.writeable = False
        object.__setattr__(self, "coefficients", arr)

    def __getitem__(self, mode) -> complex:
        """Coefficient at integer frequency ``mode``."""
        return complex(self.coefficients[self.grid.index_of(mode)])

    @classmethod
    def from_modes(cls, grid: GridSpec, modes: dict) -> "Spectrum":
        """Spectrum with the given ``{mode: coefficient}`` entries, zero elsewhere."""
        c = np.zeros(grid.shape, dtype=np.complex128)
        for mode, value in modes.items():
            c[grid.index_of(mode)] = value
        return cls(grid, c)


# -- raw-array transforms, shared with the integrator's inner loop ----------


def fft_coefficients(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    return np.fft.fftn(values) * (grid.shift_phase() / grid.size)


def ifft_values(grid: GridSpec, coefficients: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(coefficients * grid.shift_phase()) * grid.size


def forward_transform(f: Field) -> Spectrum:
    return Spectrum(f.grid, fft_coefficients(f.grid, f.values))


def inverse_transform(s: Spectrum) -> Field:
    return Field(s.grid, ifft_values(s.grid, s.coefficients))


def l2_norm(f: Field) -> float:
    """``(mean |f|^2)^(1/2)``, equal to ``(sum |f_n|^2)^(1/2)``."""
    v = f.values
    return float(np.sqrt(np.mean(v.real**2 + v.imag**2)))


def hs_norm(s: Spectrum, sobolev_s: float) -> float:
    """``(sum (1+|n|^2)^s |u_n|^2)^(1/2)``."""
    if sobolev_s < 0:
        raise InvalidParam("Sobolev exponent must be non-negative")
    weight = (1.0 + s.grid.frequency_norm_sq()) ** sobolev_s
    c = s.coefficients
    return float(np.sqrt(np.sum(weight * (c.real**2 + c.imag**2))))


def mean(f: Field) -> complex:
    """Frequency-0 coefficient (the grid average)."""
    return complex(np.mean(f.values))


@dataclass(frozen=True, eq=False)
class PolarDecomposition:
    """``f = exp(i theta) (a + w)`` with ``a > 0`` and zero-mean ``w``."""

    a: float
    theta: float
    w: Spectrum

    def reconstruct(self) -> Field:
        w = ifft_values(self.w.grid, self.w.coefficients)
        return Field(self.w.grid, np.exp(1j * self.theta) * (self.a + w))


def polar_decompose(f: Field, eps_mean: float = DEFAULT_MEAN_EPS) -> PolarDecomposition:
    m = mean(f)
    a = abs(m)
    if a <= eps_mean:
        raise ZeroMean(f"|mean| = {a:.3e} <= {eps_mean:.1e}; polar decomposition undefined")
    theta = float(np.angle(m))
    c = fft_coefficients(f.grid, f.values) * np.exp(-1j * theta)
    c[(0,) * f.grid.dim] = 0.0
    return PolarDecomposition(a=a, theta=theta, w=Spectrum(f.grid, c))


def domain_check(
    f: Field,
    sobolev_s: float | None = None,
    *,
    delta: float = DEFAULT_DELTA,
    eps_mean: float = DEFAULT_MEAN_EPS,
) -> bool:
    """Pointwise admissibility test for the logarithm.

    True iff ``|mean(f)| > eps_mean`` and ``min |f(x)| > delta * |mean(f)|``.
    The pointwise bound stands in for a Sobolev-ball condition on ``w / a``;
    ``sobolev_s`` is accepted for interface symmetry and does not enter the test.
    """
    return _domain_ok(f.values, delta, eps_mean)


def _domain_ok(values: np.ndarray, delta: float, eps_mean: float) -> bool:
    m = abs(complex(np.mean(values)))
    if m <= eps_mean:
        return False
    return bool(np.min(np.abs(values)) > delta * m)


def field_log(
    f: Field, *, delta: float = DEFAULT_DELTA, eps_mean: float = DEFAULT_MEAN_EPS
) -> Field:
    """Logarithm continued from the mean: ``log<f> + Log(f / <f>)`` pointwise."""
    if not domain_check(f, delta=delta, eps_mean=eps_mean):
        raise DomainViolation("field outside the admissible domain of the logarithm")
    m = mean(f)
    return Field(f.grid, np.log(abs(m)) + 1j * np.angle(m) + np.log(f.values / m))
