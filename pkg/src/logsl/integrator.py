"""Split-step integration of the logarithmic Schrodinger-Langevin equation.

The equation ``i psi_t = -Lap psi + lambda psi log|psi|^2 + mu arg(psi) psi``
is split into three exactly solvable pieces:

* free flow ``psi_t = i Lap psi``: a phase ``exp(-i |j|^2 t)`` per Fourier mode;
* logarithmic flow ``i v_t = lambda v log|v|^2``: ``v0 exp(-i lambda t log|v0|^2)``;
* phase damping ``w_t = -i mu arg(w) w``: the modulus is frozen and the
  principal phase relaxes as ``arg(w0) exp(-mu t)``.

Every piece preserves the modulus pointwise or per mode, so the composed
schemes conserve the L2 norm up to roundoff.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from . import _kernels
from .errors import BranchWarning, DomainViolation, InvalidParam, LogSLError, ZeroModulus
from .spectral import (
    DEFAULT_DELTA,
    DEFAULT_MEAN_EPS,
    Field,
    GridSpec,
    Spectrum,
    _domain_ok,
    fft_coefficients,
    forward_transform,
    ifft_values,
    polar_decompose,
)

ZERO_MODULUS = 1e-300
BRANCH_MARGIN = 1e-6


class SchemeKind(str, enum.Enum):
    LIE_TROTTER = "LieTrotter"
    STRANG = "Strang"


@dataclass(frozen=True)
class SplitScheme:
    kind: SchemeKind = SchemeKind.LIE_TROTTER
    dt: float = 1e-2

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        # dt = 0 is a valid (identity) step; evolve() insists on dt > 0
        if not (math.isfinite(self.dt) and self.dt >= 0):
            raise InvalidParam(f"time step must be a non-negative finite number, got {self.dt}")


@dataclass(frozen=True)
class ModelParams:
    lam: float
    mu: float = 0.0
    exploratory: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.mu)):
            raise InvalidParam("lambda and mu must be finite")
        if self.mu < 0:
            raise InvalidParam(f"mu must be non-negative, got {self.mu}")
        if self.lam <= -0.5 and not self.exploratory:
            raise InvalidParam(
                f"lambda = {self.lam} violates lambda > -1/2; pass exploratory=True to run anyway"
            )

    @property
    def z(self) -> complex:
        """``lambda + mu/(2i)``."""
        return complex(self.lam, -self.mu / 2.0)


@dataclass
class Trajectory:
    times: np.ndarray
    observations: dict[str, np.ndarray] = field(default_factory=dict)
    snapshots: list[Field] = field(default_factory=list)
    snapshot_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    final: Field | None = None


# -- exact subflows ----------------------------------------------------------


def flow_free(s: Spectrum, t: float) -> Spectrum:
    return Spectrum(s.grid, s.coefficients * np.exp(-1j * t * s.grid.frequency_norm_sq()))


def _substep(values: np.ndarray, c1: float, decay: float, c2: float) -> np.ndarray:
    flat = np.ascontiguousarray(values).reshape(-1)
    out, min_mod, max_phase = _kernels.nonlinear_substep(flat, c1, decay, c2)
    if min_mod < ZERO_MODULUS:
        raise ZeroModulus(f"grid value with modulus {min_mod:.3e}; logarithm undefined")
    if decay != 1.0 and max_phase > math.pi - BRANCH_MARGIN:
        warnings.warn(
            f"pointwise phase within {BRANCH_MARGIN:g} of the branch cut (|arg| = {max_phase:.12f})",
            BranchWarning,
            stacklevel=3,
        )
    return out.reshape(values.shape)


def flow_log(f: Field, t: float, lam: float) -> Field:
    """``v0 exp(-i lambda t log|v0|^2)`` pointwise."""
    return Field(f.grid, _substep(f.values, lam * t, 1.0, 0.0))


def flow_damp(f: Field, t: float, mu: float) -> Field:
    """``|w0| exp(i arg(w0) exp(-mu t))`` pointwise, principal ``arg``."""
    if t < 0:
        raise InvalidParam("phase damping is only defined forward in time")
    return Field(f.grid, _substep(f.values, 0.0, math.exp(-mu * t), 0.0))


class _Stepper:
    """Precomputed propagators for repeated steps on one grid."""

    def __init__(self, grid: GridSpec, params: ModelParams, scheme: SplitScheme):
        self.grid = grid
        self.params = params
        self.scheme = scheme
        self._k2 = grid.frequency_norm_sq()
        self._cache: dict[float, tuple] = {}

    def _ops(self, dt):
        ops = self._cache.get(dt)
        if ops is None:
            lam, mu = self.params.lam, self.params.mu
            decay = math.exp(-mu * dt)
            if self.scheme.kind is SchemeKind.LIE_TROTTER:
                ops = (np.exp(-1j * dt * self._k2), lam * dt, decay, 0.0)
            else:
                ops = (np.exp(-0.5j * dt * self._k2), 0.5 * lam * dt, decay, 0.5 * lam * dt)
            self._cache[dt] = ops
        return ops

    def __call__(self, values: np.ndarray, dt: float) -> np.ndarray:
        if dt == 0:
            return values
        free, c1, decay, c2 = self._ops(dt)
        # raw FFTs suffice here: the grid-origin phase cancels in a diagonal multiply
        if self.scheme.kind is SchemeKind.LIE_TROTTER:
            v = np.fft.ifftn(free * np.fft.fftn(values))
            return _substep(v, c1, decay, c2)
        v = np.fft.ifftn(free * np.fft.fftn(values))
        v = _substep(v, c1, decay, c2)
        return np.fft.ifftn(free * np.fft.fftn(v))


def _guard_domain(values, params: ModelParams, delta, eps_mean):
    if delta is None:
        delta = 0.0 if params.exploratory else DEFAULT_DELTA
    if delta > 0 and not _domain_ok(values, delta, eps_mean):
        raise DomainViolation(
            f"field left the admissible domain (min|psi| <= {delta:g} |mean| or |mean| <= {eps_mean:g})"
        )


def step(
    f: Field,
    params: ModelParams,
    scheme: SplitScheme,
    *,
    domain_delta: float | None = None,
    eps_mean: float = DEFAULT_MEAN_EPS,
) -> Field:
    """One Lie-Trotter (free, log, damp) or Strang step.

    ``domain_delta`` sets the pointwise admissibility margin checked before the
    step; ``None`` means the package default, or no margin for exploratory runs
    (only the zero-modulus guard of the subflows applies then).
    """
    _guard_domain(f.values, params, domain_delta, eps_mean)
    return Field(f.grid, _Stepper(f.grid, params, scheme)(f.values, scheme.dt))


Observer = Callable[[Field], object]


def evolve(
    f0: Field,
    params: ModelParams,
    scheme: SplitScheme,
    t_max: float,
    observers: Mapping[str, Observer] | Iterable[tuple[str, Observer]] = (),
    *,
    snapshot_stride: int | None = None,
    domain_delta: float | None = None,
    eps_mean: float = DEFAULT_MEAN_EPS,
    max_steps: int = 10**7,
) -> Trajectory:
    """Integrate from ``f0`` to ``t_max``, evaluating every observer after each step.

    When ``t_max`` is not a multiple of ``dt`` the last step is shortened so the
    trajectory ends exactly at ``t_max``.  Errors raised by a step carry the time
    at which the step started in their ``time`` attribute.
    """
    if not t_max > 0:
        raise InvalidParam(f"t_max must be positive, got {t_max}")
    if not scheme.dt > 0:
        raise InvalidParam("evolve requires a positive time step")
    n_full = int(math.floor(t_max / scheme.dt + 1e-9))
    remainder = t_max - n_full * scheme.dt
    if remainder <= 1e-12 * max(1.0, t_max):
        remainder = 0.0
    n_steps = n_full + (1 if remainder > 0 else 0)
    if n_steps > max_steps:
        raise InvalidParam(f"{n_steps} steps exceed the step budget {max_steps}")

    obs = list(observers.items()) if isinstance(observers, Mapping) else list(observers)
    times = np.empty(n_steps + 1)
    collected: dict[str, list] = {name: [] for name, _ in obs}
    snaps: list[Field] = []
    snap_times: list[float] = []

    grid = f0.grid
    stepper = _Stepper(grid, params, scheme)
    values = np.array(f0.values)

    def record(i, t, vals):
        times[i] = t
        if obs or (snapshot_stride and i % snapshot_stride == 0):
            current = Field(grid, vals)
            for name, fn in obs:
                collected[name].append(fn(current))
            if snapshot_stride and i % snapshot_stride == 0:
                snaps.append(current)
                snap_times.append(t)

    record(0, 0.0, values)
    t = 0.0
    for i in range(1, n_steps + 1):
        dt = scheme.dt if i <= n_full else remainder
        try:
            _guard_domain(values, params, domain_delta, eps_mean)
            values = stepper(values, dt)
        except LogSLError as exc:
            exc.time = t
            exc.args = (f"{exc.args[0] if exc.args else exc} (at t = {t:.6g})",)
            raise
        t = i * scheme.dt if i <= n_full else t_max
        record(i, t, values)

    observations = {name: np.asarray(vals) for name, vals in collected.items()}
    return Trajectory(times, observations, snaps, np.asarray(snap_times), Field(grid, values))


# -- analytic solutions ------------------------------------------------------


def plane_wave_solution(
    grid: GridSpec, rho: float, m, theta0: float, lam: float, t: float
) -> Field:
    """``rho exp(i theta0) exp(i m.x) exp(-i(|m|^2 + 2 lambda log rho) t)`` (undamped)."""
    if not rho > 0:
        raise InvalidParam("plane-wave amplitude must be positive")
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    if m.size != grid.dim:
        raise InvalidParam(f"mode {m.tolist()} does not match dimension {grid.dim}")
    phase_x = sum(int(mi) * xi for mi, xi in zip(m, grid.mesh()))
    omega = float(m @ m) + 2.0 * lam * math.log(rho)
    return Field(grid, rho * np.exp(1j * (theta0 + phase_x - omega * t)))


def constant_solution(rho: float, lam: float, mu: float) -> complex:
    """Stationary constant ``rho exp(-2i lambda log(rho) / mu)``."""
    if not rho > 0:
        raise InvalidParam("rho must be positive")
    if not mu > 0:
        raise InvalidParam("the stationary constant needs mu > 0")
    return rho * complex(math.cos(-2.0 * lam * math.log(rho) / mu), math.sin(-2.0 * lam * math.log(rho) / mu))


# -- symmetries ---------------------------------------------------------------


def gauge_transform(f: Field, kappa: float, params: ModelParams, t: float) -> Field:
    """Image at time ``t`` of a solution under ``psi0 -> kappa psi0`` (damped case)."""
    if not kappa > 0:
        raise InvalidParam("kappa must be positive")
    if params.mu == 0:
        raise InvalidParam("gauge_transform needs mu > 0; use scaling_transform for mu = 0")
    phase = -2.0 * (params.lam / params.mu) * math.log(kappa) * (1.0 - math.exp(-params.mu * t))
    return Field(f.grid, kappa * np.exp(1j * phase) * f.values)


def scaling_transform(f: Field, kappa: float, lam: float, t: float) -> Field:
    """Image at time ``t`` of a solution under ``psi0 -> kappa psi0`` (undamped case)."""
    if not kappa > 0:
        raise InvalidParam("kappa must be positive")
    return Field(f.grid, kappa * np.exp(-2j * t * lam * math.log(kappa)) * f.values)


def galilean_transform(f: Field, v, t: float) -> Field:
    """Boost by an integer velocity ``v``: ``psi(t, x - 2vt) exp(i(v.x - |v|^2 t))``.

    The shift is applied spectrally, exact for grid-resolved data.
    """
    grid = f.grid
    v = np.atleast_1d(np.asarray(v))
    if v.size != grid.dim or np.any(v != np.round(v)):
        raise InvalidParam(f"velocity must be an integer vector of length {grid.dim}")
    v = v.astype(np.int64)
    c = fft_coefficients(grid, f.values)
    shift = sum(int(vi) * ki for vi, ki in zip(v, grid.frequency_mesh()))
    shifted = ifft_values(grid, c * np.exp(-2j * t * shift))
    phase_x = sum(int(vi) * xi for vi, xi in zip(v, grid.mesh()))
    return Field(grid, shifted * np.exp(1j * (phase_x - float(v @ v) * t)))


# -- functionals -------------------------------------------------------------


def energy(f: Field, lam: float) -> float:
    """``sum |j|^2 |psi_j|^2 + lambda * mean(|psi|^2 (log|psi|^2 - 1))``."""
    r2 = f.values.real**2 + f.values.imag**2
    if np.sqrt(r2.min()) < ZERO_MODULUS:
        raise ZeroModulus("energy needs a nowhere-vanishing field")
    c = fft_coefficients(f.grid, f.values)
    kinetic = float(np.sum(f.grid.frequency_norm_sq() * (c.real**2 + c.imag**2)))
    potential = float(np.mean(r2 * (np.log(r2) - 1.0)))
    return kinetic + lam * potential


# -- stock observers -----------------------------------------------------------


def l2_observer(f: Field) -> float:
    v = f.values
    return float(np.sqrt(np.mean(v.real**2 + v.imag**2)))


def energy_observer(lam: float) -> Observer:
    return lambda f: energy(f, lam)


def actions_observer(modes: Iterable) -> Observer:
    """``|psi_j|`` for each tracked mode ``j``."""
    modes = list(modes)
    index: dict[GridSpec, tuple] = {}

    def observe(f: Field) -> np.ndarray:
        idx = index.get(f.grid)
        if idx is None:
            idx = index[f.grid] = tuple(np.array([f.grid.index_of(j) for j in modes]).T)
        c = fft_coefficients(f.grid, f.values)
        return np.abs(c[idx]) if modes else np.empty(0)

    return observe


def theta_observer(m=0) -> Observer:
    """Principal argument of the mean of ``exp(-i m.x) psi``."""

    def observe(f: Field) -> float:
        mm = np.atleast_1d(np.asarray(m, dtype=np.int64))
        phase_x = sum(int(mi) * xi for mi, xi in zip(mm, f.grid.mesh()))
        return float(np.angle(np.mean(np.exp(-1j * phase_x) * f.values)))

    return observe


def polar_observer(f: Field) -> tuple[float, float]:
    p = polar_decompose(f)
    return p.a, p.theta

