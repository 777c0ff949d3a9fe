"""Configured simulations: action tracking, decay-rate fits and result files.

An :class:`ExperimentConfig` is a flat record (every field is one key of the
YAML config file).  :func:`run_experiment` evolves the field, records a
per-step diagnostic row, fits exponential rates for the tracked modes and
compares them with the linear predictions.  :func:`write_outputs` persists
the report; the files depend only on the configuration.
"""
from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .errors import DegenerateWindow, InvalidParam, LogSLError
from .integrator import ModelParams, SplitScheme, Trajectory, constant_solution, energy, evolve
from .linear import (
    RatePrediction,
    RegimeTag,
    block_matrix,
    classify,
    diagonalize,
    global_rate,
    mode_rate,
)
from .spectral import Field, GridSpec, fft_coefficients, ifft_values

NUMERICAL_FLOOR = 1e-13
DEFAULT_WINDOW = (10.0, 60.0)
MIN_FIT_SAMPLES = 10
L2_DRIFT_BOUND = 1e-8

INITIAL_KINDS = ("paper-psi0", "perturbed-plane-wave", "coefficients")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    name: str = "custom"
    lam: float = 0.5
    mu: float = 2.0
    exploratory: bool = False
    dim: int = 1
    K: int = 128
    scheme: str = "LieTrotter"
    dt: float = 1e-2
    t_max: float = 100.0
    max_steps: int = 10**6
    # initial condition
    initial: str = "paper-psi0"
    rho: float = 1.0
    m: int = 0
    amplitude: float = 1e-3
    perturb_modes: list = field(default_factory=lambda: [1])
    random_phases: bool = False
    coefficients: list = field(default_factory=list)  # [[mode, re, im], ...]
    seed: int = 0
    # observation and analysis
    modes: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    observe_actions: bool = True
    observe_norms: bool = True
    observe_energy: bool = False
    observe_theta: bool = True
    fit_window: list = field(default_factory=lambda: list(DEFAULT_WINDOW))
    floor: float = NUMERICAL_FLOOR
    domain_delta: float | None = None
    output: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.initial not in INITIAL_KINDS:
            raise InvalidParam(f"unknown initial condition {self.initial!r}; choose from {INITIAL_KINDS}")
        if not (isinstance(self.t_max, (int, float)) and self.t_max > 0):
            raise InvalidParam(f"t_max must be positive, got {self.t_max!r}")
        if len(self.fit_window) != 2 or not self.fit_window[0] < self.fit_window[1]:
            raise InvalidParam(f"fit_window must be [t_lo, t_hi] with t_lo < t_hi, got {self.fit_window!r}")
        if self.initial == "perturbed-plane-wave":
            if not self.rho > 0:
                raise InvalidParam("rho must be positive")
            if self.mu > 0 and _mode_norm_sq(self.m) != 0:
                raise InvalidParam("moving plane waves (m != 0) are only supported for mu = 0")
        # raise early on bad model, grid or scheme values
        _ = self.params, self.grid, self.split_scheme
        if self.t_max / self.dt > self.max_steps:
            raise InvalidParam(
                f"t_max / dt = {self.t_max / self.dt:.0f} exceeds the step budget {self.max_steps}"
            )

    @property
    def reference_mode(self):
        """Mode carrying the background state: ``m`` for plane waves, else 0."""
        return self.m if self.initial == "perturbed-plane-wave" else 0

    @property
    def params(self) -> ModelParams:
        return ModelParams(float(self.lam), float(self.mu), bool(self.exploratory))

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.dim, self.K)

    @property
    def split_scheme(self) -> SplitScheme:
        return SplitScheme(self.scheme, float(self.dt))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, data: dict, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        """Overlay ``data`` on ``base`` (or the defaults); unknown keys are an error."""
        unknown = sorted(set(data) - set(cls.keys()))
        if unknown:
            raise InvalidParam(f"unknown config keys: {', '.join(unknown)}")
        merged = (base or cls()).to_dict()
        for key, value in data.items():
            merged[key] = _coerce(key, value, merged[key])
        return cls(**merged)


_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key, value, default):
    kind = _TYPES[key]
    if value is None:
        if "None" in kind:
            return None
        raise InvalidParam(f"config key {key!r} may not be null")
    try:
        if kind.startswith("float"):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind == "int":
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind == "list":
            if not isinstance(value, (list, tuple)):
                raise TypeError
            return list(value)
        if kind.startswith("str"):
            if not isinstance(value, str):
                raise TypeError
            return value
    except (TypeError, ValueError):
        raise InvalidParam(f"config key {key!r}: malformed value {value!r} (expected {kind})") from None
    return value


PRESETS: dict[str, dict] = {
    "paper-fig2": dict(lam=0.5, mu=2.0, modes=[0, 1, 2, 3, 4, 5]),
    "paper-fig3": dict(lam=0.5, mu=0.0, modes=[0, 1, 2, 3, 4, 5], observe_energy=True),
    "paper-fig5": dict(lam=0.5, mu=8.0, modes=[0, 1, 2, 3, 4, 5]),
    # outside lambda > -1/2: only the zero-modulus guard applies
    "paper-fig6": dict(lam=-1.0, mu=2.0, exploratory=True, domain_delta=0.0, modes=[0, 1, 2, 3, 4, 5]),
    "single-mode-overdamped": dict(
        lam=0.5,
        mu=8.0,
        initial="perturbed-plane-wave",
        rho=1.0,
        m=0,
        amplitude=1e-3,
        perturb_modes=[1],
        modes=[0, 1],
    ),
    "plane-wave-undamped": dict(
        lam=0.5,
        mu=0.0,
        initial="perturbed-plane-wave",
        rho=1.0,
        m=0,
        amplitude=1e-2,
        perturb_modes=[1],
        modes=[0, 1],
    ),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise InvalidParam(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return ExperimentConfig.from_dict({"name": name, **PRESETS[name], **overrides})


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------


def paper_psi0(grid: GridSpec) -> Field:
    """``1 / (1 + 0.2 cos x_1)``."""
    return Field.from_function(grid, lambda *x: 1.0 / (1.0 + 0.2 * np.cos(x[0])))


def _mode_vector(mode, dim) -> np.ndarray:
    v = np.atleast_1d(np.asarray(mode, dtype=np.int64))
    if v.size == 1 and dim > 1:
        v = np.concatenate([v, np.zeros(dim - 1, dtype=np.int64)])
    if v.size != dim:
        raise InvalidParam(f"mode {mode!r} does not match dimension {dim}")
    return v


def perturbed_plane_wave(
    grid: GridSpec, rho: float, m, amplitude: float, modes: Sequence, phases=None
) -> Field:
    """``rho exp(i m.x) (1 + amplitude * sum_k exp(i (k.x + phase_k)))``."""
    xs = grid.mesh()

    def dot(v):
        return sum(int(vi) * xi for vi, xi in zip(v, xs))

    pert = np.zeros(grid.shape, dtype=np.complex128)
    for i, k in enumerate(modes):
        ph = 0.0 if phases is None else phases[i]
        pert += np.exp(1j * (dot(_mode_vector(k, grid.dim)) + ph))
    return Field(grid, rho * np.exp(1j * dot(_mode_vector(m, grid.dim))) * (1.0 + amplitude * pert))


def initial_field(cfg: ExperimentConfig) -> Field:
    grid = cfg.grid
    if cfg.initial == "paper-psi0":
        return paper_psi0(grid)
    if cfg.initial == "perturbed-plane-wave":
        phases = None
        if cfg.random_phases:
            rng = np.random.default_rng(cfg.seed)
            phases = rng.uniform(-np.pi, np.pi, size=len(cfg.perturb_modes))
        return perturbed_plane_wave(grid, cfg.rho, cfg.m, cfg.amplitude, cfg.perturb_modes, phases)
    c = np.zeros(grid.shape, dtype=np.complex128)
    for entry in cfg.coefficients:
        if len(entry) != 3:
            raise InvalidParam(f"coefficient entries are [mode, re, im], got {entry!r}")
        mode, re, im = entry
        c[grid.index_of(_mode_vector(mode, grid.dim))] += complex(float(re), float(im))
    return Field(grid, ifft_values(grid, c))


# ---------------------------------------------------------------------------
# series, fits and predictions
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ActionSeries:
    mode: Any
    times: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.float64)
        if self.times.shape != self.amplitudes.shape:
            raise InvalidParam("times and amplitudes differ in length")
        if np.any(self.amplitudes < 0):
            raise InvalidParam("amplitudes must be non-negative")


@dataclass(frozen=True)
class RateFit:
    mode: Any
    window: tuple[float, float]
    alpha_hat: float
    r_squared: float
    floor_hit: bool
    n_samples: int


def fit_rate(
    series: ActionSeries,
    window: Sequence[float] = DEFAULT_WINDOW,
    *,
    floor: float = NUMERICAL_FLOOR,
    min_samples: int = MIN_FIT_SAMPLES,
) -> RateFit:
    """Least-squares slope of ``log|psi_j|`` against ``t`` on ``window``.

    If the series drops to ``floor`` inside the window, the window ends at the
    last sample before the first such point and ``floor_hit`` is set.
    """
    t, y = series.times, series.amplitudes
    if t.size == 0:
        raise DegenerateWindow("empty series")
    lo, hi = float(window[0]), float(window[1])
    lo, hi = max(lo, float(t[0])), min(hi, float(t[-1]))
    if not lo < hi:
        raise InvalidParam(f"window {tuple(window)} does not overlap the series range [{t[0]}, {t[-1]}]")
    sel = np.flatnonzero((t >= lo) & (t <= hi))
    floor_hit = False
    low = np.flatnonzero(y[sel] <= floor)
    if low.size:
        floor_hit = True
        sel = sel[: low[0]]
    if sel.size < min_samples:
        raise DegenerateWindow(
            f"mode {series.mode}: only {sel.size} samples above {floor:g} in [{lo}, {hi}]"
        )
    ts, ls = t[sel], np.log(y[sel])
    A = np.column_stack([np.ones_like(ts), ts])
    coef, *_ = np.linalg.lstsq(A, ls, rcond=None)
    resid = ls - A @ coef
    ss_tot = float(np.sum((ls - ls.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(series.mode, (float(ts[0]), float(ts[-1])), float(-coef[1]), r2, floor_hit, int(sel.size))


def _mode_norm_sq(mode) -> int:
    v = np.atleast_1d(np.asarray(mode, dtype=np.int64))
    return int(v @ v)


def _block_exponential(n: int, params: ModelParams, t: np.ndarray):
    """``exp(-i t A_n)`` for every ``t``, shape ``(len(t), 2, 2)``."""
    blk = block_matrix(n, params.lam, params.mu, exploratory=params.exploratory)
    diag = diagonalize(blk)
    D = diag.D
    if diag.regime.tag is RegimeTag.JORDAN:
        # exp(-i t [[h, c], [0, h]]) = exp(-i t h) [[1, -i t c], [0, 1]]
        h, c = D[0, 0], D[0, 1]
        E = np.zeros((t.size, 2, 2), dtype=np.complex128)
        E[:, 0, 0] = E[:, 1, 1] = 1.0
        E[:, 0, 1] = -1j * t * c
        E *= np.exp(-1j * t * h)[:, None, None]
    else:
        E = np.zeros((t.size, 2, 2), dtype=np.complex128)
        E[:, 0, 0] = np.exp(-1j * t * D[0, 0])
        E[:, 1, 1] = np.exp(-1j * t * D[1, 1])
    return diag.P[None] @ E @ diag.P_inv[None]


def linearized_oracle(
    j, params: ModelParams, init, t_max: float, *, dt: float = 1e-2
) -> ActionSeries:
    """``|xi_j(t)|`` under the exact linear block flow ``exp(-i t A_{|j|^2})``."""
    n = _mode_norm_sq(j)
    if n == 0:
        raise InvalidParam("the linearized oracle is defined for j != 0")
    init = np.asarray(init, dtype=np.complex128).reshape(2)
    t = np.linspace(0.0, t_max, int(round(t_max / dt)) + 1)
    x = _block_exponential(n, params, t) @ init
    return ActionSeries(j, t, np.abs(x[:, 0]))


def predictions_for(params: ModelParams, modes: Sequence) -> dict:
    """Linear-theory rate prediction per nonzero mode; ``None`` where none applies."""
    out = {}
    for j in modes:
        n = _mode_norm_sq(j)
        if n == 0 or params.mu == 0 or params.lam <= -0.5:
            out[_label(j)] = None
        else:
            out[_label(j)] = mode_rate(n, params.lam, params.mu)
    return out


def compare_rates(report: "Report", predictions: dict | None = None) -> list[dict]:
    """Rows of fitted vs predicted rates, plus a final global-rate row."""
    params = report.params
    if predictions is None:
        predictions = predictions_for(params, [f.mode for f in report.fits])
    rows = []
    if params.mu == 0 or params.lam <= -0.5:
        status = "not-applicable" if params.mu == 0 else "exploratory"
        for fit in report.fits:
            rows.append(dict(mode=_label(fit.mode), alpha_hat=fit.alpha_hat, alpha_theory=None,
                             rel_dev=None, status=status))
        return rows
    alpha1 = mode_rate(1, params.lam, params.mu).alpha_j
    overdamped_1 = classify(1, params.lam, params.mu).tag is RegimeTag.OVERDAMPED
    for fit in report.fits:
        label = _label(fit.mode)
        pred: RatePrediction | None = predictions.get(label)
        n = _mode_norm_sq(fit.mode)
        row = dict(mode=label, alpha_hat=fit.alpha_hat, alpha_theory=None, rel_dev=None,
                   status="zero-mode" if n == 0 else "ok")
        if pred is not None:
            row["alpha_theory"] = pred.alpha_j
            row["beta"] = pred.beta_j
            row["rel_dev"] = (fit.alpha_hat - pred.alpha_j) / pred.alpha_j
        if overdamped_1 and n >= 1:
            k = int(round(math.sqrt(n)))
            row["alpha_cascade"] = k * alpha1
            row["rel_dev_cascade"] = (fit.alpha_hat - k * alpha1) / (k * alpha1)
        rows.append(row)
    g_alpha, g_beta = global_rate(params.lam, params.mu)
    rows.append(dict(mode="global", alpha_theory=g_alpha, beta=g_beta, status="prediction"))
    return rows


# ---------------------------------------------------------------------------
# theta drift
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaDrift:
    regime: str  # "undamped" or "damped"
    theta: np.ndarray  # unwrapped
    predicted: float  # phase velocity (undamped) or limit angle (damped)
    mean_residual: float
    sup_residual: float


def unwrap_phase(theta) -> np.ndarray:
    """Nearest-branch continuation of a sampled phase."""
    return np.unwrap(np.asarray(theta, dtype=np.float64))


def theta_drift(
    trajectory: Trajectory, params: ModelParams, *, rho: float, m=0, key: str = "theta"
) -> ThetaDrift:
    """Phase of the mean against its predicted behavior.

    Undamped: residual of the phase velocity against ``-(|m|^2 + 2 lambda log rho)``;
    ``mean_residual`` uses the end-to-end average velocity and ``sup_residual`` the
    step-wise finite differences.  Damped: distance of ``theta(t)`` to the limit
    ``-2 lambda log(rho) / mu`` at the final time (mean) and over the last
    quarter of the run (sup).
    """
    t = np.asarray(trajectory.times)
    th = unwrap_phase(trajectory.observations[key])
    if params.mu == 0:
        pred = -(_mode_norm_sq(m) + 2.0 * params.lam * math.log(rho))
        mean_vel = (th[-1] - th[0]) / (t[-1] - t[0])
        vel = np.diff(th) / np.diff(t)
        return ThetaDrift("undamped", th, pred, abs(mean_vel - pred), float(np.max(np.abs(vel - pred))))
    limit = -2.0 * params.lam * math.log(rho) / params.mu
    # the limit is defined modulo 2 pi
    dev = th - limit
    dev = dev - 2 * np.pi * np.round(dev[-1] / (2 * np.pi))
    tail = t >= t[0] + 0.75 * (t[-1] - t[0])
    return ThetaDrift("damped", th, limit, abs(float(dev[-1])), float(np.max(np.abs(dev[tail]))))


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

# fixed diagnostic columns recorded every step
ROW_FIELDS = ("l2", "a", "theta", "w_h1", "distance", "energy")


def _label(mode) -> str:
    v = np.atleast_1d(np.asarray(mode, dtype=np.int64))
    return "_".join(str(int(x)) for x in v)


@dataclass(eq=False)
class Report:
    config: dict
    params: ModelParams
    rho: float
    times: np.ndarray
    actions: list[ActionSeries]
    fits: list[RateFit]
    fit_errors: dict
    predictions: dict
    comparison: list[dict]
    diagnostics: dict
    flags: dict
    series: dict  # name -> array, aligned with times
    theta: ThetaDrift | None = None
    notes: list[str] = field(default_factory=list)


def _row_observer(cfg: ExperimentConfig, nu: complex | None):
    grid = cfg.grid
    ref = _mode_vector(cfg.reference_mode, grid.dim)
    # H1 weights relative to the background mode
    k2 = sum((k - int(r)) ** 2 for k, r in zip(grid.frequency_mesh(), ref)).astype(np.float64)
    zero = grid.index_of(ref)
    idx = tuple(np.array([grid.index_of(_mode_vector(j, grid.dim)) for j in cfg.modes]).T) if cfg.modes else None
    lam = cfg.lam

    def observe(f: Field) -> np.ndarray:
        c = fft_coefficients(grid, f.values)
        p = c.real**2 + c.imag**2
        c0 = c[zero]
        total = float(np.sum(p))
        rest = total - float(p[zero])
        w_h1 = math.sqrt(max(0.0, float(np.sum((1.0 + k2) * p)) - float(p[zero])))
        dist = math.nan if nu is None else math.sqrt(max(0.0, abs(c0 - nu) ** 2 + rest))
        en = energy(f, lam) if cfg.observe_energy else math.nan
        v = f.values
        l2 = math.sqrt(float(np.mean(v.real**2 + v.imag**2)))
        row = [l2, abs(c0), math.atan2(c0.imag, c0.real), w_h1, dist, en]
        if idx is not None:
            row.extend(np.sqrt(p[idx]))
        return np.array(row)

    return observe


def _variation(x: np.ndarray) -> float:
    return float(x.max() - x.min()) if x.size else math.nan


def run_experiment(cfg: ExperimentConfig) -> Report:
    cfg.validate()
    params, scheme = cfg.params, cfg.split_scheme
    f0 = initial_field(cfg)
    c_init = fft_coefficients(f0.grid, f0.values)
    rho = math.sqrt(float(np.mean(np.abs(f0.values) ** 2)))
    ref_idx = cfg.grid.index_of(_mode_vector(cfg.reference_mode, cfg.dim))
    domain_delta = cfg.domain_delta
    if domain_delta is None and _mode_norm_sq(cfg.reference_mode) != 0:
        # the mean of a moving plane wave vanishes; keep only the zero-modulus guard
        domain_delta = 0.0
    nu = constant_solution(rho, params.lam, params.mu) if params.mu > 0 else None
    observers = {}
    if cfg.observe_actions or cfg.observe_norms or cfg.observe_energy or cfg.observe_theta:
        observers["row"] = _row_observer(cfg, nu)
    try:
        traj = evolve(
            f0, params, scheme, cfg.t_max, observers,
            domain_delta=domain_delta, max_steps=cfg.max_steps,
        )
    except LogSLError as exc:
        exc.args = (f"experiment {cfg.name!r}: {exc.args[0] if exc.args else exc}",)
        raise

    times = traj.times
    series: dict[str, np.ndarray] = {}
    actions: list[ActionSeries] = []
    if observers:
        rows = traj.observations["row"]
        for i, name in enumerate(ROW_FIELDS):
            series[name] = rows[:, i]
        if cfg.observe_actions:
            for k, j in enumerate(cfg.modes):
                actions.append(ActionSeries(j, times, rows[:, len(ROW_FIELDS) + k]))
        if not cfg.observe_energy:
            del series["energy"]
        if nu is None:
            del series["distance"]

    fits, fit_errors = [], {}
    for s in actions:
        if _mode_norm_sq(s.mode) == 0:
            continue
        try:
            fits.append(fit_rate(s, cfg.fit_window, floor=cfg.floor))
        except (DegenerateWindow, InvalidParam) as exc:
            fit_errors[_label(s.mode)] = str(exc)

    predictions = predictions_for(params, [f.mode for f in fits])
    diagnostics: dict[str, Any] = {"rho": rho}
    flags: dict[str, bool] = {}
    notes: list[str] = []
    theta = None

    if "l2" in series:
        drift = float(np.max(np.abs(series["l2"] - series["l2"][0])) / series["l2"][0])
        diagnostics["l2_drift"] = drift
        flags["l2_conservation"] = drift <= L2_DRIFT_BOUND
    if "energy" in series:
        e = series["energy"]
        diagnostics["energy_drift"] = float(np.max(np.abs(e - e[0])) / abs(e[0]))
    if "w_h1" in series:
        w = series["w_h1"]
        diagnostics["w_h1_initial"] = float(w[0])
        diagnostics["w_h1_sup"] = float(w.max())
        if params.mu == 0:
            flags["actions_near_conserved"] = bool(w.max() <= 3.0 * w[0])
    if "a" in series:
        a = series["a"]
        w0_sq = float(np.sum(np.abs(c_init) ** 2) - abs(c_init[ref_idx]) ** 2)
        lo, hi = cfg.fit_window
        win = (times >= lo) & (times <= hi)
        diagnostics["mode0_variation"] = _variation(a)
        diagnostics["mode0_bound"] = w0_sq
        diagnostics["mode0_rel_variation_window"] = _variation(a[win]) / float(a[win].mean()) if win.any() else math.nan
        if params.mu > 0:
            flags["mode0_within_parseval_bound"] = diagnostics["mode0_variation"] <= w0_sq
    if "distance" in series:
        diagnostics["distance_final"] = float(series["distance"][-1])
    if "theta" in series and cfg.observe_theta:
        traj_theta = Trajectory(times, {"theta": series["theta"]})
        theta = theta_drift(traj_theta, params, rho=rho, m=cfg.reference_mode)
        diagnostics["theta_predicted"] = theta.predicted
        diagnostics["theta_mean_residual"] = theta.mean_residual
        diagnostics["theta_sup_residual"] = theta.sup_residual
        series["theta"] = theta.theta

    if params.lam <= -0.5:
        notes.append("exploratory: lambda <= -1/2, no rate predictions available")
        tail = times >= 0.5 * cfg.t_max
        for s in actions:
            if _mode_norm_sq(s.mode) <= 1:
                amp = s.amplitudes[tail]
                rel = _variation(amp) / float(amp.mean()) if amp.size and amp.mean() > 0 else math.nan
                key = f"mode_{_label(s.mode)}"
                diagnostics[f"{key}_tail_mean"] = float(amp.mean()) if amp.size else math.nan
                diagnostics[f"{key}_tail_rel_variation"] = rel
                flags[f"{key}_settles"] = bool(rel <= 1e-3)

    report = Report(
        config=cfg.to_dict(), params=params, rho=rho, times=times, actions=actions, fits=fits,
        fit_errors=fit_errors, predictions=predictions, comparison=[], diagnostics=diagnostics,
        flags=flags, series=series, theta=theta, notes=notes,
    )
    report.comparison = compare_rates(report, predictions)
    return report


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        if columns and columns[0].size:
            np.savetxt(fh, np.column_stack(columns), fmt="%.17g", delimiter=",", newline="\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def summary_dict(report: Report) -> dict:
    return _jsonable(
        {
            "config": report.config,
            "rho": report.rho,
            "fits": [
                dict(mode=_label(f.mode), window=list(f.window), alpha_hat=f.alpha_hat,
                     r_squared=f.r_squared, floor_hit=f.floor_hit, n_samples=f.n_samples)
                for f in report.fits
            ],
            "fit_errors": report.fit_errors,
            "rates": report.comparison,
            "diagnostics": report.diagnostics,
            "flags": report.flags,
            "notes": report.notes,
        }
    )


def write_outputs(report: Report, cfg: ExperimentConfig, outdir=None) -> dict[str, Path]:
    """Write ``actions.csv``, ``diagnostics.csv``, ``summary.json`` and ``config.yaml``."""
    outdir = Path(outdir or cfg.output or os.environ.get("LOGSL_OUTPUT_DIR") or ".")
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        paths = {
            "actions": outdir / "actions.csv",
            "diagnostics": outdir / "diagnostics.csv",
            "summary": outdir / "summary.json",
            "config": outdir / "config.yaml",
        }
        has_obs = bool(report.series) or bool(report.actions)
        _write_csv(
            paths["actions"],
            ["t"] + [f"mode_{_label(s.mode)}" for s in report.actions],
            [report.times] + [s.amplitudes for s in report.actions] if has_obs else [],
        )
        names = list(report.series)
        _write_csv(
            paths["diagnostics"],
            ["t"] + names,
            [report.times] + [report.series[n] for n in names] if has_obs else [],
        )
        with open(paths["summary"], "w", newline="\n") as fh:
            json.dump(summary_dict(report), fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
        with open(paths["config"], "w", newline="\n") as fh:
            yaml.safe_dump(report.config, fh, sort_keys=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write experiment outputs: {exc.strerror}", exc.filename) from exc
    return paths


def read_actions_csv(path) -> list[ActionSeries]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        body = fh.read()
    if body.strip():
        data = np.loadtxt(body.splitlines(), delimiter=",", ndmin=2)
    else:
        data = np.empty((0, len(header)))
    times = data[:, 0]
    out = []
    for i, name in enumerate(header[1:], start=1):
        parts = name[len("mode_"):].split("_")
        mode = int(parts[0]) if len(parts) == 1 else tuple(int(p) for p in parts)
        out.append(ActionSeries(mode, times, data[:, i]))
    return out


def load_config(path) -> dict:
    """Flat key-value YAML file as a dict."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidParam(f"{path}: config must be a mapping of keys to values")
    return data
