"""Synthetic data from the 24-term mixture-process-noise model and the replication study."""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .advi import BayesianLassoTarget, StepConfig, advi_fit_target, advi_posterior_summary
from .cavi import Hyperparams, cavi_fit, cavi_posterior_summary
from .distributions import RngStream
from .freq import lasso_cv
from .gibbs import GibbsConfig, gibbs_fit, gibbs_posterior_summary
from .model import (
    CoefficientBlocks,
    Dataset,
    DesignMatrix,
    FactorSpec,
    ModelFormula,
    TermLabel,
    build_design_matrix,
    simulation_factor_spec,
    term_labels,
)
from .selection import ConfusionCounts, bai, confusion, select_ci, select_nonzero, select_sn

METHODS = ("lasso", "cavi", "advi", "gibbs")
CRITERIA = ("ci", "sn")
DISPLAY = {"lasso": "LASSO", "gibbs": "BL-MCMC (Gibbs)", "cavi": "BL-CAVI", "advi": "BL-ADVI"}

OPEN_QUESTIONS = (
    "observations per replication are not reported for the original study; n_obs is a declared default",
    "lambda selection for the classical lasso is not reported; 10-fold CV over a log grid is used",
    "the MCMC backend is an exact Gibbs sampler, not NUTS; MCMC columns are not expected to match exactly",
)


@dataclass(frozen=True)
class SimTruth:
    spec: FactorSpec = field(default_factory=simulation_factor_spec)
    formula: ModelFormula = field(default_factory=ModelFormula.simulation)
    sigma: float = 0.5

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")

    @property
    def labels(self) -> list[TermLabel]:
        return term_labels(self.spec, self.formula)

    @property
    def coefficients(self) -> CoefficientBlocks:
        """alpha = delta = 1 (singles and blends), eta = 0."""
        return CoefficientBlocks({lab: (0.0 if lab.block in ("gamma", "eta") else 1.0) for lab in self.labels})

    @property
    def nonzero(self) -> np.ndarray:
        return self.coefficients.to_vector(self.labels) != 0.0


def _draw_mixture(spec: FactorSpec, n: int, rng: RngStream) -> np.ndarray:
    """Uniform draws of the first q - 1 proportions, rejected unless the last one is in bounds."""
    lo = np.array([b[0] for b in spec.mixture_bounds[:-1]])
    hi = np.array([b[1] for b in spec.mixture_bounds[:-1]])
    lo_q, hi_q = spec.mixture_bounds[-1]
    rows: list[np.ndarray] = []
    have = 0
    while have < n:
        free = lo + (hi - lo) * rng.uniform((max(2 * (n - have), 16), lo.size))
        last = 1.0 - free.sum(axis=1)
        ok = (last >= lo_q) & (last <= hi_q)
        rows.append(np.column_stack([free[ok], last[ok]]))
        have += int(ok.sum())
    return np.concatenate(rows)[:n]


def generate_dataset(
    truth: SimTruth, n: int, rng: RngStream, fixed_w: float | None = None, zero_noise_vars: bool = False
) -> Dataset:
    """Draw n rows: bounded-simplex mixtures, two-level process variables, N(0,1) noise variables.

    ``fixed_w`` and ``zero_noise_vars`` pin w and z for debugging checks.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    spec = truth.spec
    x = _draw_mixture(spec, n, rng)
    w = np.empty((n, spec.n_process))
    for p, var in enumerate(spec.process):
        levels = np.asarray(var.levels if var.levels else (var.low, var.high))
        w[:, p] = levels[rng.gen.integers(0, levels.size, n)] if fixed_w is None else fixed_w
    z = np.zeros((n, spec.n_noise)) if zero_noise_vars else rng.normal((n, spec.n_noise))
    labels = truth.labels
    X = np.column_stack([lab.column(x, w, z) for lab in labels])
    y = X @ truth.coefficients.to_vector(labels) + truth.sigma * rng.normal(n)
    return Dataset(x, w, z, y)


@dataclass(frozen=True)
class StudyConfig:
    n_replications: int = 1000
    n_obs: int = 100
    methods: tuple[str, ...] = METHODS
    criteria: tuple[str, ...] = CRITERIA
    seed: int = 0
    hyper: Hyperparams = field(default_factory=Hyperparams)
    cavi_tol: float = 1e-8
    gibbs_chains: int = 4
    gibbs_warmup: int = 1000
    gibbs_kept: int = 2000
    gibbs_force: bool = False
    advi_samples: int = 10
    advi_max_iter: int = 10_000
    advi_draws: int = 20_000
    lasso_folds: int = 10
    sigma: float = 0.5
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        if self.n_replications < 1:
            raise ValueError("n_replications must be at least 1")
        if self.n_obs < 2:
            raise ValueError("n_obs must be at least 2")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        for c in self.criteria:
            if c not in CRITERIA:
                raise ValueError(f"unknown criterion {c!r}")
        if self.n_obs <= len(SimTruth().labels):
            warnings.warn("n_obs does not exceed the number of model terms", RuntimeWarning, stacklevel=2)

    def combos(self) -> list[str]:
        out = []
        for m in self.methods:
            out += ["lasso"] if m == "lasso" else [f"{m}-{c}" for c in self.criteria]
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        d["criteria"] = list(self.criteria)
        return d


@dataclass
class StudyReport:
    labels: list[TermLabel]
    config: StudyConfig
    truth: np.ndarray
    masks: dict[str, np.ndarray]
    replications: dict[str, list[int]]
    failures: dict[str, list[tuple[int, str]]]
    timings: dict[str, float] = field(default_factory=dict)

    def frequency(self, combo: str) -> np.ndarray:
        m = self.masks[combo]
        return m.mean(axis=0) if m.shape[0] else np.full(len(self.labels), np.nan)

    def confusion(self, combo: str) -> ConfusionCounts:
        total = ConfusionCounts(0, 0, 0, 0)
        for row in self.masks[combo]:
            total = total + _counts(row, self.truth)
        return total

    def bai(self, combo: str) -> float:
        return bai(self.confusion(combo))

    def per_replication_bai(self, combo: str) -> np.ndarray:
        return np.array([bai(_counts(row, self.truth)) for row in self.masks[combo]])

    @property
    def combos(self) -> list[str]:
        return list(self.masks)


def _counts(mask, truth) -> ConfusionCounts:
    mask = np.asarray(mask, dtype=bool)
    return ConfusionCounts(
        int(np.sum(mask & truth)), int(np.sum(mask & ~truth)), int(np.sum(~mask & truth)), int(np.sum(~mask & ~truth))
    )


def _select(summary, criteria):
    out = {}
    if "ci" in criteria:
        out["ci"] = select_ci(summary).included
    if "sn" in criteria:
        out["sn"] = select_sn(summary).included
    return out


def run_method(method: str, design: DesignMatrix, config: StudyConfig, rng: RngStream) -> dict[str, np.ndarray]:
    """Fit one method on one replication; returns inclusion masks keyed by criterion."""
    if method == "lasso":
        seed = int(rng.gen.integers(0, 2**63 - 1))
        _, fit, _ = lasso_cv(design, k=config.lasso_folds, seed=seed)
        return {"": select_nonzero(design.labels, fit.beta).included}
    if method == "cavi":
        state = cavi_fit(design, config.hyper, tol=config.cavi_tol)
        return _select(cavi_posterior_summary(state), config.criteria)
    if method == "advi":
        target = BayesianLassoTarget(design, config.hyper)
        params, _ = advi_fit_target(target, S=config.advi_samples, max_iter=config.advi_max_iter, rng=rng.split(0))
        return _select(advi_posterior_summary(params, target, config.advi_draws, rng.split(1)), config.criteria)
    if method == "gibbs":
        gcfg = GibbsConfig(config.gibbs_chains, config.gibbs_warmup, config.gibbs_kept, hyper=config.hyper)
        samples = gibbs_fit(design, gcfg, rng)
        return _select(gibbs_posterior_summary(samples, force=config.gibbs_force), config.criteria)
    raise ValueError(f"unknown method {method!r}")


def run_replication(config: StudyConfig, rep: int):
    """Data generation and every configured method for replication ``rep``.

    Stream layout: RngStream(seed, rep) -> split(0) data, split(1 + k) method k.
    """
    truth = SimTruth(sigma=config.sigma)
    root = RngStream(config.seed, rep)
    data = generate_dataset(truth, config.n_obs, root.split(0))
    design = build_design_matrix(data, truth.spec, truth.formula)
    results, errors, timings = {}, {}, {}
    for k, method in enumerate(config.methods):
        start = time.perf_counter()
        try:
            results[method] = run_method(method, design, config, root.split(1 + METHODS.index(method)))
        except Exception as exc:  # noqa: BLE001 - recorded per replication, study continues
            errors[method] = f"{type(exc).__name__}: {exc}"
        timings[method] = time.perf_counter() - start
    return rep, results, errors, timings


def run_study(config: StudyConfig, progress=None) -> StudyReport:
    truth = SimTruth(sigma=config.sigma)
    labels = truth.labels
    combos = config.combos()
    masks: dict[str, list] = {c: [] for c in combos}
    reps_ok: dict[str, list[int]] = {c: [] for c in combos}
    failures: dict[str, list] = {c: [] for c in combos}
    timings = {m: 0.0 for m in config.methods}
    reps = range(config.n_replications)
    if config.n_jobs > 1:
        with ProcessPoolExecutor(config.n_jobs) as pool:
            outcomes = list(pool.map(run_replication, [config] * len(reps), reps))
    else:
        outcomes = (run_replication(config, r) for r in reps)
    for rep, results, errors, times in outcomes:
        for m, t in times.items():
            timings[m] += t
        for method in config.methods:
            keys = [""] if method == "lasso" else list(config.criteria)
            for crit in keys:
                combo = method if method == "lasso" else f"{method}-{crit}"
                if method in errors:
                    failures[combo].append((rep, errors[method]))
                else:
                    masks[combo].append(results[method][crit])
                    reps_ok[combo].append(rep)
        if progress is not None:
            progress(rep)
    arrays = {c: np.array(v, dtype=bool).reshape(-1, len(labels)) for c, v in masks.items()}
    return StudyReport(labels, config, truth.nonzero, arrays, reps_ok, failures, timings)
