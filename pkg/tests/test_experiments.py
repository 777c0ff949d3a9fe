import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from logsl.errors import DegenerateWindow, InvalidParam
from logsl.experiments import (
    ActionSeries,
    ExperimentConfig,
    Report,
    compare_rates,
    fit_rate,
    linearized_oracle,
    preset,
    read_actions_csv,
    run_experiment,
    theta_drift,
    write_outputs,
)
from logsl.integrator import ModelParams, SplitScheme, Trajectory, evolve, plane_wave_solution, theta_observer
from logsl.linear import block_matrix

T = np.linspace(0, 100, 10001)


def short(name="paper-fig2", **kw):
    kw.setdefault("t_max", 12.0)
    kw.setdefault("fit_window", [2.0, 12.0])
    return preset(name, **kw)


# -- fit_rate ---------------------------------------------------------------------


def test_fit_exact_exponential():
    fit = fit_rate(ActionSeries(1, T, np.exp(-1.5 * T)))
    assert fit.alpha_hat == pytest.approx(1.5, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    # the series reaches the 1e-13 floor near t = 20
    assert fit.floor_hit and fit.window[1] < 20.0
    assert not fit_rate(ActionSeries(1, T, np.exp(-1.5 * T)), (2, 15)).floor_hit


def test_fit_constant_series():
    fit = fit_rate(ActionSeries(2, T, np.full_like(T, 0.3)))
    assert fit.alpha_hat == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("window", [(2.0, 6.0), (10.0, 20.0), (30.0, 40.0)])
def test_fit_jordan_profile_against_closed_form(window):
    t = np.linspace(0, 40, 4001)
    series = ActionSeries(1, t, (1 + t) * np.exp(-2 * t))
    fit = fit_rate(series, window, floor=0.0)
    # oracle: least-squares slope of log(1+t) - 2t over the same samples
    sel = (t >= window[0]) & (t <= window[1])
    slope = np.polyfit(t[sel], np.log1p(t[sel]) - 2 * t[sel], 1)[0]
    assert fit.alpha_hat == pytest.approx(-slope, rel=1e-10)
    assert fit.alpha_hat < 2.0


def test_fit_jordan_profile_approaches_asymptote():
    t = np.linspace(0, 200, 20001)
    series = ActionSeries(1, t, (1 + t) * np.exp(-2 * t))
    early = fit_rate(series, (2, 6), floor=0.0).alpha_hat
    late = fit_rate(series, (150, 200), floor=0.0).alpha_hat
    assert early < late < 2.0
    assert 2.0 - late < 0.01


def test_fit_floor_shrinks_window():
    fit = fit_rate(ActionSeries(1, T, np.exp(-1.0 * T)), (10, 60))
    assert fit.floor_hit
    assert fit.window[1] < -math.log(1e-13) + 0.01
    assert fit.alpha_hat == pytest.approx(1.0, abs=1e-10)


def test_fit_degenerate_window():
    with pytest.raises(DegenerateWindow):
        fit_rate(ActionSeries(1, T, np.exp(-3.0 * T)), (10, 60))
    with pytest.raises(DegenerateWindow):
        fit_rate(ActionSeries(1, T[:5], np.ones(5)), (0, 1))


def test_fit_window_outside_series():
    with pytest.raises(InvalidParam):
        fit_rate(ActionSeries(1, T, np.ones_like(T)), (200, 300))


def test_action_series_validation():
    with pytest.raises(InvalidParam):
        ActionSeries(1, [0, 1], [1.0])
    with pytest.raises(InvalidParam):
        ActionSeries(1, [0, 1], [1.0, -1.0])


# -- linearized oracle -----------------------------------------------------------------


def block_ode(n, lam, mu, init, t_eval):
    A = block_matrix(n, lam, mu).entries

    def rhs(_, y):
        x = y[:2] + 1j * y[2:]
        dx = -1j * (A @ x)
        return np.concatenate([dx.real, dx.imag])

    y0 = np.concatenate([np.real(init), np.imag(init)]).astype(float)
    sol = solve_ivp(rhs, (0, t_eval[-1]), y0, t_eval=t_eval, method="DOP853", rtol=1e-12, atol=1e-16)
    return np.abs(sol.y[0] + 1j * sol.y[2])


@pytest.mark.parametrize("lam,mu", [(0.5, 2.0), (0.5, 8.0), (0.5, 2 * math.sqrt(2)), (1.0, 0.0)])
def test_oracle_matches_generic_ode(lam, mu):
    s = linearized_oracle(1, ModelParams(lam, mu), (1.0, 0.3j), 10.0, dt=0.1)
    ref = block_ode(1, lam, mu, np.array([1.0, 0.3j]), s.times)
    assert np.abs(s.amplitudes - ref).max() < 1e-8


def test_oracle_rate_case_i():
    s = linearized_oracle(1, ModelParams(0.5, 2.0), (1.0, 1.0), 60.0)
    assert fit_rate(s, (10, 60)).alpha_hat == pytest.approx(1.0, abs=2e-2)


def test_oracle_rate_overdamped():
    s = linearized_oracle(1, ModelParams(0.5, 8.0), (1.0, 0.0), 100.0)
    assert fit_rate(s, (10, 60)).alpha_hat == pytest.approx(4 - math.sqrt(14), rel=1e-6)


def test_oracle_undamped_bounded():
    s = linearized_oracle(2, ModelParams(0.5, 0.0), (1.0, 0.0), 200.0)
    assert s.amplitudes.max() < 2.0 and s.amplitudes.min() > 0.5


def test_oracle_rejects_zero_mode():
    with pytest.raises(InvalidParam):
        linearized_oracle(0, ModelParams(0.5, 1.0), (1, 0), 1.0)


# -- theta drift -----------------------------------------------------------------------


def test_theta_drift_exact_plane_wave(grid):
    f0 = plane_wave_solution(grid, 1.0, 0, 0.0, 0.5, 0.0)
    tr = evolve(f0, ModelParams(0.5, 0.0), SplitScheme("LieTrotter", 0.01), 5.0, {"theta": theta_observer()})
    d = theta_drift(tr, ModelParams(0.5, 0.0), rho=1.0)
    assert d.mean_residual < 1e-14 and d.sup_residual < 1e-10


def test_theta_drift_moving_plane_wave(grid):
    rho = 1.5
    f0 = plane_wave_solution(grid, rho, 2, 0.0, 0.5, 0.0)
    tr = evolve(f0, ModelParams(0.5, 0.0), SplitScheme("LieTrotter", 0.01), 5.0,
                {"theta": theta_observer(2)}, domain_delta=0.0)
    d = theta_drift(tr, ModelParams(0.5, 0.0), rho=rho, m=2)
    assert d.predicted == pytest.approx(-(4 + math.log(rho)))
    assert d.sup_residual < 1e-8


def test_theta_drift_damped_limit(psi0):
    tr = evolve(psi0, ModelParams(0.5, 2.0), SplitScheme("Strang", 0.01), 30.0, {"theta": theta_observer()})
    rho = 0.96**-0.75
    d = theta_drift(tr, ModelParams(0.5, 2.0), rho=rho)
    assert d.predicted == pytest.approx(-math.log(rho) / 2.0)
    assert d.mean_residual < 1e-4


def test_unwrap_continues_across_cut():
    t = np.linspace(0, 10, 1001)
    raw = np.angle(np.exp(-3j * t))
    tr = Trajectory(t, {"theta": raw})
    d = theta_drift(tr, ModelParams(0.0, 0.0), rho=1.0, m=np.array([0]))
    assert np.allclose(d.theta, -3 * t)


# -- configs and runs ----------------------------------------------------------------------


def test_config_rejects_unknown_and_malformed():
    with pytest.raises(InvalidParam):
        ExperimentConfig.from_dict({"lamda": 0.5})
    with pytest.raises(InvalidParam):
        ExperimentConfig.from_dict({"K": "big"})
    with pytest.raises(InvalidParam):
        ExperimentConfig.from_dict({"K": 100})
    with pytest.raises(InvalidParam):
        ExperimentConfig.from_dict({"observe_energy": "yes"})
    with pytest.raises(InvalidParam):
        ExperimentConfig.from_dict({"lam": -1.0})
    with pytest.raises(InvalidParam):
        ExperimentConfig.from_dict({"dt": 1e-6, "max_steps": 1000})


def test_config_requires_still_plane_wave_when_damped():
    with pytest.raises(InvalidParam):
        ExperimentConfig(initial="perturbed-plane-wave", m=1, mu=2.0)


def test_presets_exist():
    assert preset("paper-fig2").mu == 2.0
    assert preset("paper-fig3").mu == 0.0
    assert preset("paper-fig5").mu == 8.0
    assert preset("paper-fig6").exploratory
    with pytest.raises(InvalidParam):
        preset("fig7")


def test_undamped_actions_near_constant():
    rep = run_experiment(short("paper-fig3", t_max=30.0, fit_window=[5.0, 30.0]))
    for fit in rep.fits:
        assert abs(fit.alpha_hat) < 0.01
    assert all(row["status"] == "not-applicable" for row in rep.comparison)
    assert rep.flags["actions_near_conserved"]
    assert "energy_drift" in rep.diagnostics


def test_damped_actions_decay_mode0_constant():
    rep = run_experiment(short())
    for row in rep.comparison[:-1]:
        assert row["alpha_theory"] == pytest.approx(1.0)
        assert row["alpha_hat"] > 0.5
    assert rep.comparison[-1]["mode"] == "global"
    assert rep.flags["mode0_within_parseval_bound"]
    assert rep.flags["l2_conservation"]


def test_overdamped_distinct_rates():
    rep = run_experiment(short("paper-fig5", t_max=40.0, fit_window=[10.0, 40.0]))
    rates = [f.alpha_hat for f in rep.fits]
    assert len(set(np.round(rates, 2))) == len(rates)
    assert "alpha_cascade" in rep.comparison[1]


def test_compare_rates_prediction_override():
    rep = run_experiment(short())
    rows = compare_rates(rep, {"1": None})
    assert rows[0]["alpha_theory"] is None


def test_random_phases_are_seeded():
    a = run_experiment(short(initial="perturbed-plane-wave", perturb_modes=[1, 2], random_phases=True, seed=4, t_max=1.0))
    b = run_experiment(short(initial="perturbed-plane-wave", perturb_modes=[1, 2], random_phases=True, seed=4, t_max=1.0))
    c = run_experiment(short(initial="perturbed-plane-wave", perturb_modes=[1, 2], random_phases=True, seed=5, t_max=1.0))
    assert np.array_equal(a.series["theta"], b.series["theta"])
    assert not np.array_equal(a.series["theta"], c.series["theta"])


def test_explicit_coefficients():
    cfg = short(initial="coefficients", coefficients=[[0, 1.0, 0.0], [1, 0.05, 0.0], [-1, 0.0, 0.02]], t_max=1.0)
    rep = run_experiment(cfg)
    assert rep.actions[1].amplitudes[0] == pytest.approx(0.05)


def test_exploratory_run_notes():
    rep = run_experiment(short("paper-fig6", t_max=5.0, fit_window=[1.0, 5.0]))
    assert rep.notes and all(row["status"] == "exploratory" for row in rep.comparison)


def test_runtime_errors_carry_experiment_name():
    cfg = short(initial="coefficients", coefficients=[[0, 0.1, 0.0], [1, 1.0, 0.0]], t_max=1.0)
    with pytest.raises(Exception) as info:
        run_experiment(cfg)
    assert "paper-fig2" in str(info.value)


# -- outputs ---------------------------------------------------------------------------


def test_outputs_round_trip_and_determinism(tmp_path):
    cfg = short(t_max=2.0, fit_window=[0.5, 2.0])
    rep = run_experiment(cfg)
    p1 = write_outputs(rep, cfg, tmp_path / "a")
    p2 = write_outputs(run_experiment(cfg), cfg, tmp_path / "b")
    for key in p1:
        assert p1[key].read_bytes() == p2[key].read_bytes()
    back = read_actions_csv(p1["actions"])
    for s_in, s_out in zip(rep.actions, back):
        assert s_in.mode == s_out.mode
        assert np.array_equal(s_in.times, s_out.times)
        assert np.array_equal(s_in.amplitudes, s_out.amplitudes)
    raw = p1["actions"].read_bytes()
    assert b"\r" not in raw
    assert raw.splitlines()[0] == b"t,mode_0,mode_1,mode_2,mode_3,mode_4,mode_5"


def test_header_only_without_observers(tmp_path):
    cfg = short(observe_actions=False, observe_norms=False, observe_theta=False, t_max=0.5)
    rep = run_experiment(cfg)
    paths = write_outputs(rep, cfg, tmp_path)
    assert paths["actions"].read_text() == "t\n"
    assert read_actions_csv(paths["actions"]) == []


def test_output_error_has_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = short(t_max=0.5)
    with pytest.raises(OSError) as info:
        write_outputs(run_experiment(cfg), cfg, blocker / "sub")
    assert "file" in str(info.value)


def test_report_type():
    assert isinstance(run_experiment(short(t_max=0.5, fit_window=[0.0, 0.5])), Report)
