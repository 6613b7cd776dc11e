"""Batch entry point: configure, run evaluations and verification suites,
emit machine-readable reports.

Commands
--------
evaluate : run one evaluation; writes rounds.csv, summary.json, oracle.json.
sweep    : evaluate cells of (n, seed) over the noise-scale grid, reusing the
           same subsample sequence for every scale; writes sweep.csv.
verify   : run a named Monte-Carlo / exhaustive verification suite and write
           a pass/fail JSON.

Exit codes: 0 ok, 1 verification failure, 2 config error, 3 runtime error.
All files are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .core import (
    BadConfigError,
    EvaluationConfig,
    PredictorHandle,
    RegressionDataset,
    derive_rng,
    derive_seed,
    estimate_tau,
    warm_up,
)
from .metrics import empirical_norm, ht_average
from .refit import RiskBoundReport, estimate_radius, evaluate_with_state, _run_rounds
from .sampling import Subsample, srswor
from .synth import (
    EXPERIMENT_IDS,
    ExperimentSpec,
    empirical_excess_risk,
    generate,
    population_excess_risk,
)
from .theory import decay_constant, fourier_coefficients, norm_equivalence_check, spectral_norm
from .trainers import MlpSpec, make_trainer, mlp_fit

__all__ = ["RunConfig", "ConfigError", "cmd_evaluate", "cmd_sweep", "cmd_verify", "main",
           "VERIFY_SUITES"]

VERIFY_SUITES = ("unbias", "norm_equiv", "decay", "radius")

ROUNDS_COLUMNS = ["k", "m", "rho1", "rho2", "opt_tilde", "opt_check",
                  "norm_tilde", "norm_check", "trainer_tol"]
SWEEP_COLUMNS = ["n", "rho", "seed", "bound", "oracle_excess_risk", "ratio"]


class ConfigError(ValueError):
    """The run configuration failed to parse or validate."""


@dataclass
class RunConfig:
    """Parsed batch-run configuration."""

    experiment: Optional[str]
    dataset_file: Optional[str]
    n: List[int]
    seeds: List[int]
    trainer_name: str
    trainer_params: dict
    evaluation: dict
    n_mc: int
    output_dir: Path
    formats: List[str] = field(default_factory=lambda: ["csv", "json"])

    @staticmethod
    def from_file(path, out_override=None, seed_override=None, formats_override=None) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return RunConfig.from_dict(raw, out_override, seed_override, formats_override)

    @staticmethod
    def from_dict(raw: dict, out_override=None, seed_override=None, formats_override=None) -> "RunConfig":
        experiment = raw.get("experiment")
        dataset_file = raw.get("dataset_file")
        if (experiment is None) == (dataset_file is None):
            raise ConfigError("exactly one of 'experiment' and 'dataset_file' is required")
        if experiment is not None and experiment not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment {experiment!r}; pick one of {EXPERIMENT_IDS}")

        n_raw = raw.get("n", 1000)
        n_list = [int(x) for x in (n_raw if isinstance(n_raw, list) else [n_raw])]
        if any(x < 1 for x in n_list):
            raise ConfigError("sample sizes must be >= 1")

        trainer = raw.get("trainer", {})
        if not isinstance(trainer, dict) or "name" not in trainer:
            raise ConfigError("config needs trainer: {name, params}")

        seed = int(seed_override if seed_override is not None else raw.get("seed", 0))
        seeds = [int(s) for s in raw.get("seeds", [seed])]
        if seed_override is not None:
            seeds = [seed]

        evaluation = dict(raw.get("evaluation", {}))
        evaluation["seed"] = seed

        formats = formats_override or raw.get("formats", ["csv", "json"])
        bad = set(formats) - {"csv", "json"}
        if bad:
            raise ConfigError(f"unknown output formats: {sorted(bad)}")

        return RunConfig(
            experiment=experiment,
            dataset_file=dataset_file,
            n=n_list,
            seeds=seeds,
            trainer_name=trainer["name"],
            trainer_params=dict(trainer.get("params", {})),
            evaluation=evaluation,
            n_mc=int(raw.get("oracle", {}).get("n_mc", 10000)),
            output_dir=Path(out_override if out_override is not None else raw.get("output_dir", ".")),
            formats=list(formats),
        )

    def eval_config(self, seed: int) -> EvaluationConfig:
        params = dict(self.evaluation)
        params["seed"] = seed
        if "rho_grid" in params:
            params["rho_grid"] = tuple(params["rho_grid"])
        try:
            return EvaluationConfig(**params)
        except (BadConfigError, TypeError) as exc:
            raise ConfigError(f"bad evaluation settings: {exc}") from exc

    def load_data(self, n: int, seed: int):
        """Returns (dataset, truth-or-None)."""
        if self.experiment is not None:
            dataset, truth = generate(ExperimentSpec(id=self.experiment, n=n, seed=seed))
            return dataset, truth
        return _read_dataset_csv(self.dataset_file), None


def _read_dataset_csv(path) -> RegressionDataset:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(cell) for cell in row] for row in reader if row]
    except (OSError, StopIteration, ValueError) as exc:
        raise ConfigError(f"cannot read dataset file {path}: {exc}") from exc
    if "y" not in header:
        raise ConfigError("dataset file needs a 'y' column")
    data = np.asarray(rows, dtype=float)
    ycol = header.index("y")
    xcols = [i for i in range(len(header)) if i != ycol]
    return RegressionDataset(data[:, xcols], data[:, ycol])


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _report_json(report: RiskBoundReport) -> dict:
    return {
        "n": report.n,
        "m": report.m,
        "d": report.d,
        "k_rounds_used": report.k_rounds_used,
        "mean_opt_tilde": report.mean_opt_tilde,
        "mean_opt_check": report.mean_opt_check,
        "wild_optimism_bound": report.wild_optimism_bound,
        "deviation": report.deviation,
        "pilot_proxy": report.pilot_proxy,
        "r": report.r,
        "r_tilde": report.r_tilde,
        "fixed_design_bound": report.fixed_design_bound,
        "random_design_bound": report.random_design_bound,
        "log_term": report.log_term,
        "tau": report.tau,
        "t": report.t,
        "delta": report.delta,
        "confidence_fixed": report.confidence_fixed,
        "confidence_random": report.confidence_random,
        "pilot_flags": list(report.pilot_flags),
    }


def _rounds_rows(reports) -> list:
    rows = []
    for report in reports:
        for rd in report.rounds:
            rows.append([rd.k, rd.sub.m, rd.rho1, rd.rho2,
                         rd.optimism.opt_tilde, rd.optimism.opt_check,
                         rd.norm_tilde, rd.norm_check, rd.trainer_tol])
    return rows


def _run_cell(run: RunConfig, n: int, seed: int):
    dataset, truth = run.load_data(n, seed)
    trainer = make_trainer(run.trainer_name, run.trainer_params)
    config = run.eval_config(seed)
    fstar = truth.fstar if truth is not None else None
    reports, state = evaluate_with_state(dataset, trainer, config, fstar=fstar)
    return dataset, truth, config, reports, state


def cmd_evaluate(config_path, out_dir=None, seed=None, formats=None) -> int:
    """Run one evaluation and write rounds.csv / summary.json / oracle.json."""
    try:
        run = RunConfig.from_file(config_path, out_dir, seed, formats)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        start = time.perf_counter()
        n = run.n[0]
        dataset, truth, config, reports, state = _run_cell(run, n, run.seeds[0])
        wall = time.perf_counter() - start

        out = run.output_dir
        if "csv" in run.formats:
            _atomic_write_text(out / "rounds.csv", _csv_text(ROUNDS_COLUMNS, _rounds_rows(reports)))
        if "json" in run.formats:
            summary = {
                "version": __version__,
                "wall_clock_seconds": wall,
                "config": {
                    "experiment": run.experiment,
                    "dataset_file": run.dataset_file,
                    "n": n,
                    "seed": run.seeds[0],
                    "trainer": {"name": run.trainer_name, "params": run.trainer_params},
                    "evaluation": run.evaluation,
                },
                "bounds": {report.label: _report_json(report) for report in reports},
            }
            _atomic_write_text(out / "summary.json", json.dumps(summary, indent=2) + "\n")
            if truth is not None:
                oracle = {
                    "empirical_excess_risk": empirical_excess_risk(state.breve_f, truth, dataset.xs),
                    "population_excess_risk": population_excess_risk(
                        state.breve_f, truth, run.n_mc, seed=run.seeds[0]),
                    "n_mc": run.n_mc,
                    "seed": run.seeds[0],
                }
                _atomic_write_text(out / "oracle.json", json.dumps(oracle, indent=2) + "\n")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return 3


def cmd_sweep(config_path, out_dir=None, seed=None) -> int:
    """Evaluate every (n, seed) cell over the noise-scale grid.

    Within a cell all scales share the same subsample sequence and sign
    vector, so the per-scale bounds are directly comparable.  The reported
    bound is the wild-optimism sum, the quantity compared against the
    Monte-Carlo excess risk.
    """
    try:
        run = RunConfig.from_file(config_path, out_dir, seed)
        if run.experiment is None:
            raise ConfigError("sweep needs a synthetic experiment (oracle required)")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        rows = []
        for n in run.n:
            for cell_seed in run.seeds:
                dataset, truth, config, reports, state = _run_cell(run, n, cell_seed)
                oracle = population_excess_risk(state.breve_f, truth, run.n_mc, seed=cell_seed)
                for report in reports:
                    bound = report.wild_optimism_bound
                    ratio = bound / oracle["estimate"] if oracle["estimate"] > 0 else math.inf
                    rows.append([n, float(report.label) if report.label != "tuned" else report.label,
                                 cell_seed, bound, oracle["estimate"], ratio])
        _atomic_write_text(run.output_dir / "sweep.csv", _csv_text(SWEEP_COLUMNS, rows))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return 3


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

def _suite_unbias(seed: int = 0) -> dict:
    """Exhaustive check that subsample averages are unbiased for the
    full-sample average, over every (n, m) with n <= 8."""
    rng = derive_rng(seed, "verify-unbias")
    worst = 0.0
    for n in range(1, 9):
        signs = rng.integers(0, 2, size=n) * 2.0 - 1.0
        res = rng.normal(size=n)
        diff = rng.normal(size=n)
        a_n = float(np.mean(signs * res * diff))
        for m in range(1, n + 1):
            vals = [ht_average(signs, res, diff, Subsample(indices=np.array(combo), n=n))
                    for combo in itertools.combinations(range(n), m)]
            worst = max(worst, abs(float(np.mean(vals)) - a_n))
    return {"suite": "unbias", "max_error": worst, "threshold": 1e-12,
            "pass": bool(worst < 1e-12)}


def _random_decay_poly(rng: np.random.Generator, n_freq: int, v: float, m_v: float):
    """Trig polynomial with |coef(k)| <= m_v / k^v, random phases."""
    ks = np.arange(1, n_freq + 1)
    mags = m_v / ks.astype(float) ** v * rng.uniform(0.5, 1.0, size=n_freq)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_freq)
    c0 = rng.uniform(-1.0, 1.0)

    def h(x):
        angles = 2.0 * np.pi * np.outer(x, ks) + phases
        return c0 + 2.0 * (np.cos(angles) * mags).sum(axis=1)

    return h


def _max_truncation_frequency(n: int, beta: float, delta: float) -> int:
    n_beta = n ** beta
    N = 1
    while 2 * (N + 1) * math.log(2 * (N + 1) / delta) <= n_beta:
        N += 1
    return N


def _suite_norm_equiv(draws: int = 500, n: int = 10_000, beta: float = 0.6,
                      delta: float = 0.05, seed: int = 0) -> dict:
    """Monte-Carlo coverage of the norm-equivalence inequality."""
    v, m_v = 1.0, 1.0
    N = _max_truncation_frequency(n, beta, delta)
    m = int(round(n ** beta))
    held = 0
    rng = derive_rng(seed, "verify-norm-equiv")
    for i in range(draws):
        h = _random_decay_poly(rng, n_freq=4 * N, v=v, m_v=m_v)
        xs = rng.uniform(0.0, 1.0, size=n)
        sub = srswor(n, m, "permutation", derive_rng(seed, "verify-ne-sub", i))
        result = norm_equivalence_check(h(xs), sub, N=N, delta=delta, beta=beta,
                                        w_bar=1.0, w_under=1.0, v=v, M_v=m_v)
        held += int(result.holds)
    coverage = held / draws
    return {"suite": "norm_equiv", "draws": draws, "n": n, "N": N,
            "coverage": coverage, "threshold": 0.88, "claimed": 1.0 - 2.0 * delta,
            "pass": bool(coverage >= 0.88)}


def _suite_decay(seed: int = 0) -> dict:
    """Analytic decay constant plus the ReLU-network coefficient bound."""
    sine = PredictorHandle(lambda xs: np.sin(2.0 * np.pi * xs[:, 0]), name="sine")
    profile = fourier_coefficients(sine, N=8, grid_size=64)
    m1 = decay_constant(profile, v=1.0)
    sine_ok = abs(m1 - 0.5) < 1e-9

    rng = derive_rng(seed, "verify-decay-data")
    xs = rng.uniform(0.0, 1.0, size=(200, 1))
    ys = np.sin(2.0 * np.pi * xs[:, 0]) + rng.normal(0.0, 0.1, size=200)
    net = mlp_fit(RegressionDataset(xs, ys), MlpSpec(widths=(16, 16), max_iter=300), seed=seed)
    weight_product = 1.0
    for w in net.meta["weights"]:
        weight_product *= spectral_norm(w)
    net_profile = fourier_coefficients(net, N=48, grid_size=400)
    m2 = decay_constant(net_profile, v=2.0)
    net_ok = m2 <= 2.0 * weight_product
    return {"suite": "decay", "sine_M1": m1, "sine_pass": bool(sine_ok),
            "mlp_M2": m2, "mlp_weight_product": weight_product,
            "safety_factor": 2.0, "mlp_pass": bool(net_ok),
            "pass": bool(sine_ok and net_ok)}


def _suite_radius(seeds: int = 20, n: int = 1000, k1: int = 5, seed0: int = 0) -> dict:
    """Radius estimate covers the realized full-data error distance."""
    covered = 0
    details = []
    for s in range(seeds):
        dataset, truth = generate(ExperimentSpec(id="exp1", n=n, seed=seed0 + s))
        trainer = make_trainer("fourier_ridge", {"N": 8, "lam": 1e-6})
        state = warm_up(dataset, trainer, seed=seed0 + s)
        tau = estimate_tau(state.residuals)
        t = max(3.0, 4.0 * tau) + 0.1
        m = int(round(n ** 0.6))
        subs = [srswor(n, m, "permutation", derive_seed(seed0 + s, "subsample", k))
                for k in range(k1)]
        rounds = _run_rounds(state, dataset, trainer, subs, 1.0, 1.0, seed0 + s, range(k1))
        est = estimate_radius(state, dataset, trainer, rounds, t, tau)
        r_hat = empirical_norm(state.breve_vals - truth.fstar.predict(dataset.xs))
        covered += int(est.r >= r_hat)
        details.append({"seed": seed0 + s, "r": est.r, "r_hat": r_hat})
    return {"suite": "radius", "seeds": seeds, "covered": covered,
            "required": 18, "details": details, "pass": bool(covered >= 18)}


_SUITES = {
    "unbias": _suite_unbias,
    "norm_equiv": _suite_norm_equiv,
    "decay": _suite_decay,
    "radius": _suite_radius,
}


def cmd_verify(suite: str, out_dir=".") -> int:
    """Run a named verification suite; writes verify_<suite>.json."""
    if suite not in _SUITES:
        print(f"config error: unknown suite {suite!r}; pick one of {VERIFY_SUITES}",
              file=sys.stderr)
        return 2
    try:
        result = _SUITES[suite]()
        _atomic_write_text(Path(out_dir) / f"verify_{suite}.json",
                           json.dumps(result, indent=2) + "\n")
        status = "pass" if result["pass"] else "FAIL"
        print(f"{suite}: {status}")
        return 0 if result["pass"] else 1
    except Exception as exc:
        print(f"verification error: {exc}", file=sys.stderr)
        return 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wildriff",
                                     description="Excess-risk bounds via wild refitting on subsamples")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="run one evaluation from a JSON config")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--out", default=None)
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.add_argument("--format", default=None, help="comma-separated: csv,json")

    p_sweep = sub.add_parser("sweep", help="sweep (n, seed) cells over the noise-scale grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--seed", type=int, default=None)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--suite", required=True, choices=VERIFY_SUITES)
    p_verify.add_argument("--out", default=".")

    args = parser.parse_args(argv)
    if args.command == "evaluate":
        formats = args.format.split(",") if args.format else None
        return cmd_evaluate(args.config, args.out, args.seed, formats)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.out, args.seed)
    return cmd_verify(args.suite, args.out)


if __name__ == "__main__":
    sys.exit(main())
