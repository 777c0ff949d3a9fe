"""Command-line entry point: ``logsl {simulate,analyze,scan,verify}``.

Exit codes: 0 success, 1 invalid input, 2 runtime or numerical failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import yaml

from . import experiments, linear, resonance, verify
from .errors import BudgetExceeded, InvalidParam, LogSLError

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3
OUTPUT_ENV = "LOGSL_OUTPUT_DIR"

log = logging.getLogger("logsl")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="logsl", description="Logarithmic Schrodinger-Langevin toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run an experiment and write CSV/JSON outputs")
    sim.add_argument("--preset", choices=sorted(experiments.PRESETS))
    sim.add_argument("--config", type=Path, help="YAML file of ExperimentConfig keys")
    sim.add_argument("--lambda", dest="lam", type=float)
    sim.add_argument("--mu", type=float)
    sim.add_argument("--K", type=int)
    sim.add_argument("--dt", type=float)
    sim.add_argument("--t-max", dest="t_max", type=float)
    sim.add_argument("--scheme", choices=["LieTrotter", "Strang"])
    sim.add_argument("--initial", choices=list(experiments.INITIAL_KINDS))
    sim.add_argument("--seed", type=int)
    sim.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                     help="override any config key (value parsed as YAML)")
    sim.add_argument("--exploratory", action="store_true", help="allow lambda <= -1/2")
    sim.add_argument("--output", type=Path, help=f"output directory (default: ${OUTPUT_ENV} or .)")
    _add_common(sim)

    ana = sub.add_parser("analyze", help="per-mode regimes and predicted rates")
    ana.add_argument("--lambda", dest="lam", type=float, required=True)
    ana.add_argument("--mu", type=float, required=True)
    ana.add_argument("--n-min", type=int, default=1)
    ana.add_argument("--n-max", type=int, default=5)
    _add_common(ana)

    sc = sub.add_parser("scan", help="small-divisor scan of the frequencies")
    sc.add_argument("--lambda", dest="lam", type=float, required=True)
    sc.add_argument("--r", type=int, default=4)
    sc.add_argument("--n-max", type=int, default=30)
    sc.add_argument("--cap", type=int, default=resonance.DEFAULT_CAP)
    sc.add_argument("--output", type=Path, help=f"directory for scan.csv (default: ${OUTPUT_ENV} or .)")
    _add_common(sc)

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", choices=sorted(verify.SUITES) + ["all"])
    _add_common(ver)
    return parser


def _output_dir(arg, fallback=None) -> Path:
    if arg is not None:
        return Path(arg)
    if fallback:
        return Path(fallback)
    return Path(os.environ.get(OUTPUT_ENV) or ".")


def _resolve_config(args) -> experiments.ExperimentConfig:
    data: dict = {}
    if args.preset:
        data.update(name=args.preset, **experiments.PRESETS[args.preset])
    if args.config:
        try:
            data.update(experiments.load_config(args.config))
        except OSError as exc:
            raise InvalidParam(f"cannot read config {args.config}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise InvalidParam(f"malformed config {args.config}: {exc}") from None
    for key in ("lam", "mu", "K", "dt", "t_max", "scheme", "initial", "seed"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    for item in args.overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise InvalidParam(f"--set expects KEY=VALUE, got {item!r}")
        data[key.strip()] = yaml.safe_load(raw)
    if args.exploratory:
        data["exploratory"] = True
    lam = data.get("lam", experiments.ExperimentConfig.lam)
    if isinstance(lam, (int, float)) and lam <= -0.5 and not data.get("exploratory", False):
        raise InvalidParam(
            f"lambda = {lam} violates the requirement lambda > -1/2; rerun with --exploratory"
        )
    data["output"] = str(_output_dir(args.output, data.get("output")))
    return experiments.ExperimentConfig.from_dict(data)


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    log.info("running %s", cfg.name)
    report = experiments.run_experiment(cfg)
    paths = experiments.write_outputs(report, cfg, cfg.output)
    print(f"experiment {cfg.name}: lambda={cfg.lam} mu={cfg.mu} K={cfg.K} dt={cfg.dt} T={cfg.t_max}")
    print(f"{'mode':>6} {'alpha_hat':>12} {'theory':>12} {'rel_dev':>10} {'cascade':>12}  status")
    for row in report.comparison:
        print(
            f"{row['mode']:>6} {_fmt(row.get('alpha_hat')):>12} {_fmt(row.get('alpha_theory')):>12} "
            f"{_fmt(row.get('rel_dev')):>10} {_fmt(row.get('alpha_cascade')):>12}  {row['status']}"
        )
    for key, value in sorted(report.diagnostics.items()):
        print(f"  {key} = {_fmt(value)}")
    for key, ok in sorted(report.flags.items()):
        print(f"  [{'PASS' if ok else 'FAIL'}] {key}")
    for note in report.notes:
        print(f"  note: {note}")
    for label, path in paths.items():
        print(f"wrote {label}: {path}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    lam, mu = args.lam, args.mu
    if not lam > -0.5:
        raise InvalidParam(f"lambda must exceed -1/2, got {lam}")
    if not (math.isfinite(mu) and mu >= 0):
        raise InvalidParam(f"mu must be non-negative, got {mu}")
    if args.n_min < 1 or args.n_max < args.n_min:
        raise InvalidParam("need 1 <= n-min <= n-max")
    print(f"lambda = {lam}, mu = {mu}")
    print(f"{'n':>5} {'regime':>12} {'eig+':>26} {'eig-':>26} {'alpha_n':>12} {'beta_n':>6}")
    for n in range(args.n_min, args.n_max + 1):
        regime = linear.classify(n, lam, mu)
        e1, e2 = linear.closed_form_eigenvalues(n, lam, mu)
        if mu > 0:
            pred = linear.mode_rate(n, lam, mu)
            alpha, beta = pred.alpha_j, pred.beta_j
        else:
            alpha, beta = 0.0, 0
        print(f"{n:>5} {regime.tag.value:>12} {e1:>26.12g} {e2:>26.12g} {alpha:>12.10g} {beta:>6}")
    if mu > 0:
        g_alpha, g_beta = linear.global_rate(lam, mu)
        print(f"global: alpha = {g_alpha:.12g}, beta = {g_beta}")
    else:
        print("global: no decay (mu = 0)")
    return EXIT_OK


def cmd_scan(args) -> int:
    res = resonance.scan(args.lam, args.r, args.n_max, cap=args.cap)
    outdir = _output_dir(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "scan.csv"
    resonance.write_scan_csv(res, path)
    print(f"lambda = {res.lam}, r = {res.r}, n_max = {res.n_max}")
    print(f"minimum |divisor| = {res.minimum:.17g}")
    print(f"cancelling combinations excluded: {res.n_cancelling} (max |value| {res.cancel_max_abs:g})")
    print(f"non-cancelling below {res.guard:g}: {res.anomalies} (exact zeros: {res.n_exact_zero})")
    print(f"fit min|divisor| ~ gamma / mu3^alpha: gamma = {res.gamma_fit:.6g}, alpha = {res.alpha_fit:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_suite(args.suite)
    for r in results:
        print(r.line())
    ok = verify.all_passed(results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"simulate": cmd_simulate, "analyze": cmd_analyze, "scan": cmd_scan, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvalidParam as exc:
        print(f"logsl: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceeded as exc:
        print(f"logsl: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except LogSLError as exc:
        print(f"logsl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"logsl: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
