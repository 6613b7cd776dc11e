"""Evaluation engines and excess-risk bound assembly.

`evaluate` drives the full pipeline: warm-up, K resampling rounds of wild
refitting (at fixed noise scales or with per-round tuning), and assembly of
the fixed-design and random-design risk bounds with every additive term
itemized.

Suprema over function balls are approximated by maximizing over the fitted
predictors the procedure materializes (the wild predictors attain the
sub-scale suprema for exact solvers, which makes them the canonical
candidates).  Every report flags these quantities as proxies, not exact
suprema.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .core import (
    BadConfigError,
    TrainerFailedError,
    EvaluationConfig,
    PredictorHandle,
    RefitState,
    RegressionDataset,
    TrainerOracle,
    derive_seed,
    estimate_tau,
    warm_up,
)
from .metrics import OptimismPair, empirical_norm, wild_optimism, wild_responses
from .sampling import Subsample, srswor

__all__ = [
    "BoundError",
    "BadParamError",
    "DecayRegimeError",
    "NoCandidatesError",
    "TuneError",
    "NoBracketError",
    "NonMonotoneWarning",
    "WildRound",
    "RadiusEstimate",
    "RiskBoundReport",
    "TuneResult",
    "run_round",
    "deviation_term",
    "r_tilde",
    "tune_noise_scale",
    "estimate_radius",
    "pilot_error_proxy",
    "process_sup_proxy",
    "evaluate",
    "evaluate_with_state",
    "max_round_threads",
]

THREADS_ENV = "WILDRIFF_THREADS"


class BoundError(ValueError):
    """Base class for bound-assembly failures."""


class BadParamError(BoundError):
    pass


class DecayRegimeError(BoundError):
    """Decay exponent too small for the requested dimension."""


class NoCandidatesError(BoundError):
    """A candidate-set supremum was requested with no candidates."""


class TuneError(RuntimeError):
    """Base class for noise-scale tuning failures."""


class NoBracketError(TuneError):
    """No noise scale brackets the target norm within the refit budget."""


class NonMonotoneWarning(UserWarning):
    """Refit distance decreased noticeably while the noise scale grew."""


@dataclass(frozen=True)
class WildRound:
    """Artifacts of one resample-and-refit round."""

    k: int
    sub: Subsample
    rho1: float
    rho2: float
    tilde_f: PredictorHandle
    check_f: PredictorHandle
    optimism: OptimismPair
    norm_tilde: float
    norm_check: float
    trainer_tol: float


@dataclass(frozen=True)
class RadiusEstimate:
    """High-probability upper bound on the full-data distance to the truth."""

    r: float
    branch: str
    components: dict
    t: float
    valid: bool


@dataclass
class RiskBoundReport:
    """Assembled excess-risk upper bound with every additive term itemized.

    ``fixed_design_bound`` is exactly ``mean_opt_tilde + mean_opt_check +
    deviation + pilot_proxy``; ``wild_optimism_bound`` is the optimism sum
    alone, the quantity the synthetic experiments compare against the
    Monte-Carlo excess risk.
    """

    label: str
    n: int
    m: int
    d: int
    k_rounds_used: int
    mean_opt_tilde: float
    mean_opt_check: float
    wild_optimism_bound: float
    deviation: float
    pilot_proxy: float
    r: float
    r_tilde: float
    fixed_design_bound: float
    random_design_bound: float
    log_term: float
    tau: float
    t: float
    delta: float
    confidence_fixed: float
    confidence_random: float
    pilot_flags: List[str] = field(default_factory=list)
    rounds: List[WildRound] = field(default_factory=list)
    config: Optional[EvaluationConfig] = None


class TuneResult(NamedTuple):
    rho: float
    predictor: PredictorHandle
    achieved_norm: float
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# Closed-form terms
# ---------------------------------------------------------------------------

def deviation_term(r: float, tau: float, delta: float, n: int, K: int) -> float:
    """Probability deviation term of the fixed-design bound.

    r * 10*sqrt(2)*tau*sqrt(log(1/delta))/sqrt(n)
      + 32*r*tau*sqrt(log(K/delta))/sqrt(K)
    """
    if r < 0 or tau < 0 or not (0.0 < delta < 1.0) or n < 1 or K < 1:
        raise BadParamError(
            f"need r >= 0, tau >= 0, delta in (0,1), n >= 1, K >= 1; "
            f"got r={r}, tau={tau}, delta={delta}, n={n}, K={K}"
        )
    first = r * 10.0 * math.sqrt(2.0) * tau * math.sqrt(math.log(1.0 / delta)) / math.sqrt(n)
    second = 32.0 * r * tau * math.sqrt(math.log(K / delta)) / math.sqrt(K)
    return first + second


def _shell_constant(d: int) -> float:
    # Integer points on a max-norm shell of radius rho: at most 2d(3 rho)^(d-1).
    return 2.0 * d * 3.0 ** (d - 1)


def r_tilde(r: float, n: int, beta: float, d: int, v: float, M_v: float,
            w_bar: float = 1.0, w_under: float = 1.0) -> float:
    """Inflated target radius for the subsample-norm noise-scale condition.

    d = 1:  3*sqrt(w_bar/w_under)*r
            + 7*sqrt(w_bar)*M_v/sqrt((2v-1)*w_under)
              * (log n)^(v-1/2) / sqrt(n^(beta*(2v-1)))
    d > 1:  3*sqrt(w_bar/w_under)*r
            + 4*M_v*sqrt(w_bar*S_d/(w_under*(2v-d)))
              * (log n)^(v-d/2) / n^((v-d/2)*beta/(2d+1)),  S_d = 2d*3^(d-1)

    The decay term vanishes when M_v = 0; otherwise v > d/2 is required.
    """
    if r < 0 or n < 1 or not (0.0 < beta < 1.0) or d < 1 or M_v < 0:
        raise BadParamError(
            f"need r >= 0, n >= 1, beta in (0,1), d >= 1, M_v >= 0; "
            f"got r={r}, n={n}, beta={beta}, d={d}, M_v={M_v}"
        )
    if w_under <= 0 or w_bar < w_under:
        raise BadParamError(f"need 0 < w_under <= w_bar; got w_under={w_under}, w_bar={w_bar}")
    main = 3.0 * math.sqrt(w_bar / w_under) * r
    if M_v == 0:
        return main
    if v <= d / 2.0:
        raise DecayRegimeError(f"decay exponent v={v} must exceed d/2={d / 2.0} when M_v > 0")
    logn = math.log(n)
    if d == 1:
        decay = (7.0 * math.sqrt(w_bar) * M_v / math.sqrt((2.0 * v - 1.0) * w_under)
                 * logn ** (v - 0.5) / math.sqrt(n ** (beta * (2.0 * v - 1.0))))
    else:
        s_d = _shell_constant(d)
        decay = (4.0 * M_v * math.sqrt(w_bar * s_d / (w_under * (2.0 * v - d)))
                 * logn ** (v - d / 2.0) / n ** ((v - d / 2.0) * beta / (2.0 * d + 1.0)))
    return main + decay


def _log_term(n: int, d: int, v: float, delta: float, w_bar: float, w_under: float,
              constant: float) -> float:
    """Random-design localization slack, clamped at zero for degenerate n."""
    if n < 2:
        return 0.0
    raw = (constant * (w_bar / w_under) * math.log(n) * math.log(math.log(n))
           * math.log(1.0 / delta) / n ** (1.0 - d / (2.0 * v)))
    return max(0.0, raw)


# ---------------------------------------------------------------------------
# Candidate-set suprema
# ---------------------------------------------------------------------------

def _candidate_sup(weights: np.ndarray, breve_vals: np.ndarray,
                   cand_vals: Sequence[np.ndarray], dists: Sequence[float],
                   radius: float, negate: bool) -> float:
    # The trained predictor itself sits at distance zero and scores zero,
    # so the proxy is never negative.
    best = 0.0
    for vals, dist in zip(cand_vals, dists):
        if dist > radius:
            continue
        diff = vals - breve_vals
        score = float(np.mean(weights * (-diff if negate else diff)))
        best = max(best, score)
    return best


def process_sup_proxy(state: RefitState, dataset: RegressionDataset,
                      candidates: Sequence[PredictorHandle], radius: float,
                      direction: str = "plus") -> float:
    """Candidate-set proxy for the full-data noise complexity at a radius.

    ``plus`` maximizes (1/n) sum eps*v*(f - breve); ``minus`` the negated
    difference.  Only candidates within ``radius`` of the trained predictor
    in the full-data norm participate.
    """
    if direction not in ("plus", "minus"):
        raise BadParamError(f"direction must be 'plus' or 'minus', got {direction!r}")
    weights = state.signs * state.residuals
    cand_vals = [f.predict(dataset.xs) for f in candidates]
    dists = [empirical_norm(v - state.breve_vals) for v in cand_vals]
    return _candidate_sup(weights, state.breve_vals, cand_vals, dists, radius,
                          negate=(direction == "minus"))


# ---------------------------------------------------------------------------
# Rounds
# ---------------------------------------------------------------------------

def run_round(state: RefitState, dataset: RegressionDataset, trainer: TrainerOracle,
              sub: Subsample, rho1: float, rho2: float, seed: int, k: int = 0) -> WildRound:
    """One resample-and-refit round at fixed noise scales.

    Builds the two perturbed pseudo-datasets on the subsample, refits the
    black box on each, and records optimisms and subsample-norm distances.
    """
    idx = sub.indices
    breve_sub = state.breve_vals[idx]
    signs_sub = state.signs[idx]
    res_sub = state.residuals[idx]
    xs_sub = dataset.xs[idx]

    y_tilde = wild_responses(breve_sub, signs_sub, res_sub, rho1, "plus")
    y_check = wild_responses(breve_sub, signs_sub, res_sub, rho2, "minus")

    try:
        tilde_f = trainer.fit(RegressionDataset(xs_sub, y_tilde),
                              derive_seed(seed, "refit-tilde", k))
        check_f = trainer.fit(RegressionDataset(xs_sub, y_check),
                              derive_seed(seed, "refit-check", k))
    except TrainerFailedError as exc:
        raise TrainerFailedError(f"round {k}: {exc}") from exc

    tilde_vals = tilde_f.predict(xs_sub)
    check_vals = check_f.predict(xs_sub)

    opt_tilde = wild_optimism(signs_sub, res_sub, tilde_vals, breve_sub)
    # The minus-direction optimism carries the mirrored difference breve - f.
    opt_check = wild_optimism(signs_sub, res_sub, breve_sub, check_vals)

    return WildRound(
        k=k,
        sub=sub,
        rho1=float(rho1),
        rho2=float(rho2),
        tilde_f=tilde_f,
        check_f=check_f,
        optimism=OptimismPair(opt_tilde=opt_tilde, opt_check=opt_check),
        norm_tilde=empirical_norm(tilde_vals - breve_sub),
        norm_check=empirical_norm(check_vals - breve_sub),
        trainer_tol=trainer.optimization_tol,
    )


def max_round_threads(trainer: TrainerOracle, n_jobs: int) -> int:
    """Worker count for round execution, honoring the threads cap."""
    if not trainer.concurrent_safe:
        return 1
    cap = os.environ.get(THREADS_ENV)
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_jobs, 8))


def _run_rounds(state, dataset, trainer, subs, rho1, rho2, seed, ks) -> List[WildRound]:
    jobs = list(zip(ks, subs))
    workers = max_round_threads(trainer, len(jobs))
    if workers <= 1:
        rounds = [run_round(state, dataset, trainer, sub, rho1, rho2, seed, k)
                  for k, sub in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rounds = list(pool.map(
                lambda job: run_round(state, dataset, trainer, job[1], rho1, rho2, seed, job[0]),
                jobs,
            ))
    return sorted(rounds, key=lambda rd: rd.k)


# ---------------------------------------------------------------------------
# Noise-scale tuning
# ---------------------------------------------------------------------------

def tune_noise_scale(state: RefitState, dataset: RegressionDataset, trainer: TrainerOracle,
                     sub: Subsample, target: float, direction: str = "plus",
                     tol_rel: float = 0.05, max_iter: int = 40, seed: int = 0) -> TuneResult:
    """Find rho so the refit lands at the target subsample-norm distance.

    Geometric bracketing (double/halve rho until the achieved norm brackets
    the target) followed by bisection.  Assumes the achieved norm is
    nondecreasing in rho; a decrease of more than 10x the tolerance across
    a doubling emits `NonMonotoneWarning` and continues best-effort.
    """
    if target <= 0:
        raise TuneError(f"target must be positive, got {target}")
    idx = sub.indices
    res_sub = state.residuals[idx]
    if np.all(res_sub == 0.0):
        raise TuneError("residuals on the subsample are all zero; nothing to scale")
    breve_sub = state.breve_vals[idx]
    signs_sub = state.signs[idx]
    xs_sub = dataset.xs[idx]
    fit_seed = derive_seed(seed, "tune-fit", 0 if direction == "plus" else 1)

    evals = [0]

    def achieved(rho: float):
        y = wild_responses(breve_sub, signs_sub, res_sub, rho, direction)
        f = trainer.fit(RegressionDataset(xs_sub, y), fit_seed)
        evals[0] += 1
        return empirical_norm(f.predict(xs_sub) - breve_sub), f

    tol_abs = tol_rel * target
    rho = target / empirical_norm(res_sub)   # exact for interpolating solvers
    norm, pred = achieved(rho)
    best = (abs(norm - target), rho, pred, norm)

    lo = hi = None   # lo: (rho, norm) below target; hi: at/above target
    if norm >= target:
        hi = (rho, norm)
    else:
        lo = (rho, norm)
    grow = norm < target
    prev_norm = norm
    while (lo is None or hi is None) and evals[0] < max_iter:
        rho = rho * 2.0 if grow else rho / 2.0
        norm, pred = achieved(rho)
        if abs(norm - target) < best[0]:
            best = (abs(norm - target), rho, pred, norm)
        if grow and norm < prev_norm - 10.0 * tol_abs:
            warnings.warn(
                f"achieved norm fell from {prev_norm:.3g} to {norm:.3g} while doubling rho",
                NonMonotoneWarning,
            )
        prev_norm = norm
        if norm >= target:
            hi = (rho, norm)
            if not grow:
                break
        else:
            lo = (rho, norm)
            if grow:
                break
    if lo is None or hi is None:
        if best[0] <= tol_abs:
            return TuneResult(best[1], best[2], best[3], evals[0], True)
        side = ("the class saturates below the target" if hi is None
                else "the refit error floor sits above the target")
        raise NoBracketError(
            f"no bracket for target {target:.6g} within {max_iter} refits "
            f"(closest achieved norm {best[3]:.6g}); {side}"
        )

    while best[0] > tol_abs and evals[0] < max_iter:
        rho = math.sqrt(lo[0] * hi[0])
        norm, pred = achieved(rho)
        if abs(norm - target) < best[0]:
            best = (abs(norm - target), rho, pred, norm)
        if norm >= target:
            hi = (rho, norm)
        else:
            lo = (rho, norm)

    return TuneResult(best[1], best[2], best[3], evals[0], best[0] <= tol_abs)


# ---------------------------------------------------------------------------
# Radius estimation
# ---------------------------------------------------------------------------

def estimate_radius(state: RefitState, dataset: RegressionDataset, trainer: TrainerOracle,
                    rounds: Sequence[WildRound], t: float, tau: float,
                    C: float = 1.0) -> RadiusEstimate:
    """Upper bound on the full-data distance between the trained predictor
    and the truth, from the warm-up rounds.

    Takes the maximum of the t^2/sqrt(n) floor, the two mean refit
    distances, and twice the summed slope proxies, adds the concentration
    additives, and divides by (1 - 4 tau / t).  Requires t > max(3, 4 tau).
    """
    if len(rounds) < 1:
        raise BadParamError("radius estimation needs at least one round")
    if not (t > 4.0 * tau and t > 3.0):
        raise BadParamError(f"need t > max(3, 4*tau) = {max(3.0, 4.0 * tau)}, got t={t}")
    n = dataset.n
    sqrt_n = math.sqrt(n)

    r_diamond = float(np.mean([rd.norm_tilde for rd in rounds]))
    r_sharp = float(np.mean([rd.norm_check for rd in rounds]))

    inflate = 2.0 + 1.0 / t
    weights = state.signs * state.residuals
    cand_vals = [f.predict(dataset.xs) for rd in rounds for f in (rd.tilde_f, rd.check_f)]
    dists = [empirical_norm(v - state.breve_vals) for v in cand_vals]

    if r_diamond > 0:
        w_sup = _candidate_sup(weights, state.breve_vals, cand_vals, dists,
                               inflate * r_diamond, negate=False)
        slope_w = w_sup / r_diamond
    else:
        w_sup, slope_w = 0.0, 0.0
    if r_sharp > 0:
        h_sup = _candidate_sup(weights, state.breve_vals, cand_vals, dists,
                               inflate * r_sharp, negate=True)
        slope_h = h_sup / r_sharp
    else:
        h_sup, slope_h = 0.0, 0.0

    branches = {
        "t2_over_sqrt_n": t * t / sqrt_n,
        "r_diamond": r_diamond,
        "r_sharp": r_sharp,
        "slope": 2.0 * (slope_w + slope_h),
    }
    branch = max(branches, key=branches.get)

    additive = (inflate * 4.0 * math.sqrt(2.0) * tau * t / sqrt_n
                + 2.0 * tau * t / sqrt_n
                + C * inflate * tau * t / sqrt_n)
    denom = 1.0 - 4.0 * tau / t
    r = (branches[branch] + additive) / denom

    return RadiusEstimate(
        r=r,
        branch=branch,
        components={
            **branches,
            "slope_w": slope_w,
            "slope_h": slope_h,
            "w_sup": w_sup,
            "h_sup": h_sup,
            "additive": additive,
            "denominator": denom,
            "C": C,
        },
        t=t,
        valid=denom > 0,
    )


# ---------------------------------------------------------------------------
# Pilot error proxy
# ---------------------------------------------------------------------------

def pilot_error_proxy(state: RefitState, dataset: RegressionDataset,
                      fstar: Optional[PredictorHandle] = None,
                      candidates: Sequence[PredictorHandle] = (),
                      radius: float = math.inf) -> float:
    """Candidate-set proxy for the pilot error term.

    With a known truth (synthetic mode) this evaluates both supremands over
    the passed candidate predictors restricted to the full-data ball of the
    given radius around the trained predictor; the canonical candidate set
    is the wild predictors plus the pilot and the truth.  With no truth
    available the term is omitted (returns 0); callers record the omission
    flag in the report.
    """
    if fstar is None:
        return 0.0
    if len(candidates) == 0:
        raise NoCandidatesError("pilot error proxy needs at least one candidate predictor")

    xs = dataset.xs
    pilot_gap = state.pilot_f.predict(xs) - fstar.predict(xs)
    weights = state.signs * pilot_gap
    cand_vals = [f.predict(xs) for f in candidates]
    dists = [empirical_norm(v - state.breve_vals) for v in cand_vals]
    sup_plus = _candidate_sup(weights, state.breve_vals, cand_vals, dists, radius, negate=False)
    sup_minus = _candidate_sup(weights, state.breve_vals, cand_vals, dists, radius, negate=True)
    return sup_plus + sup_minus


# ---------------------------------------------------------------------------
# Full evaluation
# ---------------------------------------------------------------------------

def _resolve_tau(config: EvaluationConfig, state: RefitState) -> float:
    if config.tau == "estimate":
        return estimate_tau(state.residuals)
    return float(config.tau)


def _assemble_report(label, state, dataset, config, rounds_for_bound, all_rounds,
                     r_value, rt_value, tau, t, fstar) -> RiskBoundReport:
    n, d = dataset.n, dataset.d
    k_used = len(rounds_for_bound)
    mean_opt_tilde = float(np.mean([rd.optimism.opt_tilde for rd in rounds_for_bound]))
    mean_opt_check = float(np.mean([rd.optimism.opt_check for rd in rounds_for_bound]))
    deviation = deviation_term(r_value, tau, config.delta, n, k_used)

    flags = ["sup-terms-are-candidate-proxies"]
    if fstar is None:
        pilot = 0.0
        flags.append("pilot-term-omitted")  # pilot equals the trained predictor;
        # the pilot error is dominated by the wild optimism for rich classes.
    else:
        candidates = [f for rd in all_rounds for f in (rd.tilde_f, rd.check_f)]
        candidates += [state.pilot_f, fstar]
        pilot = pilot_error_proxy(state, dataset, fstar, candidates, radius=2.0 * r_value)

    fixed = mean_opt_tilde + mean_opt_check + deviation + pilot
    ratio = config.w_bar / config.w_under
    log_term = _log_term(n, d, config.v, config.delta, config.w_bar, config.w_under,
                         config.log_term_constant)
    random_design = 4.0 * ratio * (mean_opt_tilde + mean_opt_check + deviation + pilot) + log_term

    return RiskBoundReport(
        label=label,
        n=n,
        m=config.subsample_size(n),
        d=d,
        k_rounds_used=k_used,
        mean_opt_tilde=mean_opt_tilde,
        mean_opt_check=mean_opt_check,
        wild_optimism_bound=mean_opt_tilde + mean_opt_check,
        deviation=deviation,
        pilot_proxy=pilot,
        r=r_value,
        r_tilde=rt_value,
        fixed_design_bound=fixed,
        random_design_bound=random_design,
        log_term=log_term,
        tau=tau,
        t=t,
        delta=config.delta,
        confidence_fixed=1.0 - 5.0 * config.delta,
        confidence_random=1.0 - 6.0 * config.delta,
        pilot_flags=flags,
        rounds=list(rounds_for_bound),
        config=config,
    )


def evaluate_with_state(dataset: RegressionDataset, trainer: TrainerOracle,
                        config: EvaluationConfig, pilot: Optional[PredictorHandle] = None,
                        fstar: Optional[PredictorHandle] = None):
    """Like `evaluate`, additionally returning the warm-up state."""
    state = warm_up(dataset, trainer, pilot, config.seed)
    n = dataset.n
    m = config.subsample_size(n)
    tau = _resolve_tau(config, state)
    t = config.t if config.t is not None else max(3.0, 4.0 * tau) + 0.1

    subs = [srswor(n, m, config.srswor_strategy, derive_seed(config.seed, "subsample", k))
            for k in range(config.K)]

    reports: List[RiskBoundReport] = []
    if config.rho_mode == "fixed-grid":
        for rho in config.rho_grid:
            rounds = _run_rounds(state, dataset, trainer, subs, rho, rho,
                                 config.seed, ks=range(config.K))
            est = estimate_radius(state, dataset, trainer, rounds, t, tau,
                                  C=config.radius_constant)
            rt = r_tilde(est.r, n, config.beta, dataset.d, config.v, config.M_v,
                         config.w_bar, config.w_under)
            reports.append(_assemble_report(
                f"{rho:g}", state, dataset, config, rounds, rounds, est.r, rt, tau, t, fstar))
    else:
        if config.K1 < 1:
            raise BadConfigError("tuned mode needs K1 >= 1 warm-up rounds")
        rho0 = config.rho_grid[0] if config.rho_grid else 1.0
        warm_rounds = _run_rounds(state, dataset, trainer, subs[:config.K1], rho0, rho0,
                                  config.seed, ks=range(config.K1))
        est = estimate_radius(state, dataset, trainer, warm_rounds, t, tau,
                              C=config.radius_constant)
        rt = r_tilde(est.r, n, config.beta, dataset.d, config.v, config.M_v,
                     config.w_bar, config.w_under)
        target = 2.0 * rt
        tuned_rounds = []
        for k in range(config.K1, config.K):
            sub = subs[k]
            plus = tune_noise_scale(state, dataset, trainer, sub, target, "plus",
                                    config.tol_rho, config.tune_max_iter,
                                    derive_seed(config.seed, "tune", k))
            minus = tune_noise_scale(state, dataset, trainer, sub, target, "minus",
                                     config.tol_rho, config.tune_max_iter,
                                     derive_seed(config.seed, "tune", k))
            idx = sub.indices
            breve_sub = state.breve_vals[idx]
            signs_sub = state.signs[idx]
            res_sub = state.residuals[idx]
            xs_sub = dataset.xs[idx]
            opt_tilde = wild_optimism(signs_sub, res_sub, plus.predictor.predict(xs_sub), breve_sub)
            opt_check = wild_optimism(signs_sub, res_sub, breve_sub, minus.predictor.predict(xs_sub))
            tuned_rounds.append(WildRound(
                k=k,
                sub=sub,
                rho1=plus.rho,
                rho2=minus.rho,
                tilde_f=plus.predictor,
                check_f=minus.predictor,
                optimism=OptimismPair(opt_tilde=opt_tilde, opt_check=opt_check),
                norm_tilde=plus.achieved_norm,
                norm_check=minus.achieved_norm,
                trainer_tol=trainer.optimization_tol,
            ))
        all_rounds = warm_rounds + tuned_rounds
        reports.append(_assemble_report(
            "tuned", state, dataset, config, tuned_rounds, all_rounds, est.r, rt, tau, t, fstar))
    return reports, state


def evaluate(dataset: RegressionDataset, trainer: TrainerOracle, config: EvaluationConfig,
             pilot: Optional[PredictorHandle] = None,
             fstar: Optional[PredictorHandle] = None) -> List[RiskBoundReport]:
    """Run the full evaluation pipeline.

    Fixed-grid mode runs K rounds at each noise scale in the grid (the same
    subsamples and signs are reused across scales) and returns one report
    per scale.  Tuned mode spends K1 rounds on radius estimation, tunes the
    noise scales so each refit lands at twice the inflated radius, and
    returns a single report over the remaining K - K1 rounds.
    """
    reports, _ = evaluate_with_state(dataset, trainer, config, pilot, fstar)
    return reports
