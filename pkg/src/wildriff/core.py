"""Domain types, the black-box trainer interface, and the warm-up phase.

The warm-up trains the full-scale predictor, computes recentering residuals
against a pilot predictor, and draws the Rademacher sign sequence that every
later resampling round reuses.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "EvaluationError",
    "TrainerFailedError",
    "NonFiniteDataError",
    "EmptyInputError",
    "BadConfigError",
    "RegressionDataset",
    "PredictorHandle",
    "TrainerOracle",
    "RefitState",
    "EvaluationConfig",
    "derive_rng",
    "derive_seed",
    "warm_up",
    "estimate_tau",
]


class EvaluationError(Exception):
    """Base class for evaluation-pipeline failures."""


class TrainerFailedError(EvaluationError):
    """The black-box trainer raised during a fit call."""


class NonFiniteDataError(EvaluationError):
    """A dataset, prediction, or residual contains NaN or infinity."""


class EmptyInputError(EvaluationError):
    """An operation received an empty vector."""


class BadConfigError(EvaluationError):
    """An evaluation configuration violates its invariants."""


_SEED_MASK = (1 << 64) - 1


def _tag_to_int(tag: str) -> int:
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_rng(seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Build a generator from (master seed, string tag, indices).

    Every source of randomness in the package flows through this derivation,
    so results do not depend on the order in which rounds execute.
    """
    entropy = [int(seed) & _SEED_MASK, _tag_to_int(tag)]
    entropy.extend(int(i) & _SEED_MASK for i in indices)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, tag: str, *indices: int) -> int:
    """Collapse (seed, tag, indices) to a single reproducible integer seed."""
    return int(derive_rng(seed, tag, *indices).integers(0, _SEED_MASK, dtype=np.uint64))


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RegressionDataset:
    """Covariates in the unit cube plus real responses.

    Parameters
    ----------
    xs : array-like of shape (n, d)
        Covariates; every coordinate must lie in [0, 1].
    ys : array-like of shape (n,)
        Real responses.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        ys = np.asarray(self.ys, dtype=float).ravel()
        if xs.shape[0] != ys.shape[0]:
            raise NonFiniteDataError(
                f"covariates ({xs.shape[0]}) and responses ({ys.shape[0]}) disagree in length"
            )
        if xs.shape[0] < 1 or xs.shape[1] < 1:
            raise EmptyInputError("dataset needs n >= 1 and d >= 1")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise NonFiniteDataError("dataset contains non-finite entries")
        if xs.min() < 0.0 or xs.max() > 1.0:
            raise NonFiniteDataError("covariate coordinates must lie in [0, 1]")
        object.__setattr__(self, "xs", _frozen_array(xs))
        object.__setattr__(self, "ys", _frozen_array(ys))

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    def restrict(self, indices: Sequence[int]) -> "RegressionDataset":
        """Dataset restricted to the given row indices."""
        idx = np.asarray(indices, dtype=int)
        return RegressionDataset(self.xs[idx], self.ys[idx])


class PredictorHandle:
    """Opaque evaluable map from points in [0, 1]^d to real predictions.

    Wraps a vectorized function taking an (n, d) array and returning an
    (n,) array.  Handles are deterministic and total on the unit cube.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], name: str = "predictor",
                 meta: Optional[dict] = None):
        self._fn = fn
        self.name = name
        self.meta = dict(meta or {})

    def predict(self, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        out = np.asarray(self._fn(xs), dtype=float).ravel()
        if out.shape[0] != xs.shape[0]:
            raise NonFiniteDataError(
                f"{self.name}: expected {xs.shape[0]} predictions, got {out.shape[0]}"
            )
        return out

    __call__ = predict

    def __repr__(self):
        return f"PredictorHandle({self.name!r})"


@dataclass(frozen=True)
class TrainerOracle:
    """A black-box fitting procedure: (dataset, seed) -> PredictorHandle.

    ``optimization_tol`` declares how far the achieved empirical risk may sit
    above the class minimum; exact solvers declare a solver-precision value.
    ``concurrent_safe`` tells the refit engine whether fit calls on distinct
    datasets may run in parallel.
    """

    name: str
    fit_fn: Callable[[RegressionDataset, int], PredictorHandle] = field(repr=False)
    deterministic: bool = True
    concurrent_safe: bool = True
    optimization_tol: float = 0.0

    def fit(self, dataset: RegressionDataset, seed: int) -> PredictorHandle:
        try:
            return self.fit_fn(dataset, int(seed))
        except EvaluationError:
            raise
        except Exception as exc:
            raise TrainerFailedError(f"trainer {self.name!r} failed: {exc}") from exc


@dataclass(frozen=True)
class RefitState:
    """Warm-up outputs shared by every resampling round."""

    breve_f: PredictorHandle
    pilot_f: PredictorHandle
    residuals: np.ndarray
    signs: np.ndarray
    breve_vals: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "residuals", _frozen_array(self.residuals))
        object.__setattr__(self, "breve_vals", _frozen_array(self.breve_vals))
        signs = _frozen_array(self.signs)
        if not np.all(np.abs(signs) == 1.0):
            raise NonFiniteDataError("signs must take values in {-1, +1}")
        if signs.shape != self.residuals.shape or self.breve_vals.shape != self.residuals.shape:
            raise NonFiniteDataError("residuals, signs, and predictions must share a length")
        object.__setattr__(self, "signs", signs)

    @property
    def n(self) -> int:
        return self.residuals.shape[0]


@dataclass(frozen=True)
class EvaluationConfig:
    """Knobs for one evaluation run.

    ``tau`` may be a positive float or the string ``"estimate"``, in which
    case the residual-maximum estimate is used wherever the noise bound
    appears.  ``t`` defaults to ``max(3, 4*tau) + 0.1`` when omitted.
    """

    K: int = 30
    K1: int = 0
    beta: float = 0.6
    rho_mode: str = "fixed-grid"          # "fixed-grid" | "tuned"
    rho_grid: tuple = (0.1, 0.5, 1.0, 2.0, 5.0)
    delta: float = 0.05
    tau: Union[float, str] = "estimate"
    t: Optional[float] = None
    w_bar: float = 1.0
    w_under: float = 1.0
    v: float = 1.0
    M_v: float = 0.0
    tol_rho: float = 0.05
    seed: int = 0
    srswor_strategy: str = "permutation"
    radius_constant: float = 1.0          # unnamed constant in the radius additives
    log_term_constant: float = 1.0
    tune_max_iter: int = 40

    def __post_init__(self):
        if self.K < 1:
            raise BadConfigError("K must be a positive integer")
        if not (0 <= self.K1 < self.K):
            raise BadConfigError("K1 must satisfy 0 <= K1 < K")
        if not (0.0 < self.beta < 1.0):
            raise BadConfigError("beta must lie in (0, 1)")
        if self.rho_mode not in ("fixed-grid", "tuned"):
            raise BadConfigError(f"unknown rho_mode {self.rho_mode!r}")
        if self.rho_mode == "fixed-grid" and len(self.rho_grid) == 0:
            raise BadConfigError("fixed-grid mode needs a non-empty rho_grid")
        if any(r <= 0 for r in self.rho_grid):
            raise BadConfigError("rho values must be positive")
        if not (0.0 < self.delta < 1.0):
            raise BadConfigError("delta must lie in (0, 1)")
        if isinstance(self.tau, str):
            if self.tau != "estimate":
                raise BadConfigError("tau must be a positive number or 'estimate'")
        elif self.tau <= 0:
            raise BadConfigError("tau must be a positive number or 'estimate'")
        if self.tol_rho <= 0:
            raise BadConfigError("tol_rho must be positive")
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))

    def subsample_size(self, n: int) -> int:
        m = int(round(n ** self.beta))
        m = max(1, min(m, n))
        return m


def warm_up(dataset: RegressionDataset, trainer: TrainerOracle,
            pilot: Optional[PredictorHandle] = None, seed: int = 0) -> RefitState:
    """Train the full-scale predictor and prepare residuals and signs.

    The pilot predictor defaults to the trained predictor itself.  Signs are
    i.i.d. uniform on {-1, +1}, drawn once here and reused by every round.
    """
    breve_f = trainer.fit(dataset, seed)
    pilot_f = pilot if pilot is not None else breve_f

    breve_vals = breve_f.predict(dataset.xs)
    pilot_vals = breve_vals if pilot is None else pilot_f.predict(dataset.xs)
    residuals = dataset.ys - pilot_vals
    if not np.all(np.isfinite(residuals)) or not np.all(np.isfinite(breve_vals)):
        raise NonFiniteDataError("non-finite residual or prediction in warm-up")

    rng = derive_rng(seed, "signs")
    signs = rng.integers(0, 2, size=dataset.n).astype(float) * 2.0 - 1.0

    return RefitState(
        breve_f=breve_f,
        pilot_f=pilot_f,
        residuals=residuals,
        signs=signs,
        breve_vals=breve_vals,
        seed=int(seed),
    )


def estimate_tau(residuals: np.ndarray) -> float:
    """Noise-bound estimate: the maximum absolute residual."""
    v = np.asarray(residuals, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInputError("cannot estimate a noise bound from no residuals")
    if not np.all(np.isfinite(v)):
        raise NonFiniteDataError("residuals contain non-finite entries")
    return float(np.max(np.abs(v)))
