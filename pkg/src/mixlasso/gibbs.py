"""Exact-conditional Gibbs sampler for the Bayesian lasso, with split-R-hat.

Systematic scan beta -> s2 -> tau -> lambda:

    beta | .      ~ N(A^-1 X'y, s2 A^-1),          A = X'X + diag(1/tau)
    1/s2 | .      ~ Ga(a0 + (n+p)/2, b0 + (|y - X beta|^2 + beta' diag(1/tau) beta) / 2)
    1/tau_j | .   ~ InvGauss(sqrt(2 lam s2 / beta_j^2), 2 lam)
    lam | .       ~ Ga(c0 + p, d0 + sum tau)

beta_j^2 is floored at 1e-300 in the tau conditional so an exact zero cannot
produce an infinite inverse-Gaussian mean.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cavi import Hyperparams, NumericalError
from .distributions import RngStream, sample_gamma, sample_inverse_gaussian
from .model import DesignMatrix
from .selection import PosteriorSummary

BETA2_FLOOR = 1e-300
RHAT_THRESHOLD = 1.1


class DiagnosticsError(RuntimeError):
    pass


@dataclass(frozen=True)
class GibbsConfig:
    n_chains: int = 4
    warmup: int = 1000
    kept: int = 2000
    thin: int = 1
    seed: int = 0
    hyper: Hyperparams = field(default_factory=Hyperparams)
    init: str = "ridge"

    def __post_init__(self):
        if self.n_chains < 1 or self.warmup < 0 or self.kept < 2 or self.thin < 1:
            raise ValueError(f"invalid Gibbs configuration: {self}")
        if self.init not in ("ridge", "prior"):
            raise ValueError(f"unknown init mode {self.init!r}")


@dataclass(frozen=True, eq=False)
class PosteriorSamples:
    """Kept draws, shaped (chains, kept[, p])."""

    beta: np.ndarray
    sigma2: np.ndarray
    tau: np.ndarray
    lam: np.ndarray
    labels: tuple = ()

    @property
    def n_chains(self) -> int:
        return self.beta.shape[0]

    def parameters(self) -> dict[str, np.ndarray]:
        """Scalar parameter name -> (chains, kept) draws."""
        names = [str(lab) for lab in self.labels] or [str(j) for j in range(self.beta.shape[2])]
        out = {f"beta:{nm}": self.beta[:, :, j] for j, nm in enumerate(names)}
        out["sigma2"] = self.sigma2
        out.update({f"tau:{nm}": self.tau[:, :, j] for j, nm in enumerate(names)})
        out["lambda"] = self.lam
        return out

    def write_csv(self, prefix) -> list[str]:
        """One CSV per chain, header = flattened parameter names."""
        params = self.parameters()
        paths = []
        for c in range(self.n_chains):
            path = f"{prefix}_chain{c + 1}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(list(params))
                cols = np.column_stack([v[c] for v in params.values()])
                for row in cols:
                    writer.writerow([repr(float(v)) for v in row])
            paths.append(path)
        return paths


def _initial_values(design: DesignMatrix, config: GibbsConfig, rng: RngStream, XtX, Xty):
    p, n = design.p, design.n
    h = config.hyper
    if config.init == "prior":
        lam = float(sample_gamma(h.c0, h.d0, rng))
        tau = rng.gen.exponential(1.0 / lam, p)
        sigma2 = 1.0 / float(sample_gamma(h.a0, h.b0, rng))
        beta = rng.normal(p) * np.sqrt(sigma2 * tau)
        return beta, sigma2, tau, lam
    beta = np.linalg.solve(XtX + np.eye(p), Xty)
    resid = design.y - design.X @ beta
    sigma2 = float(resid @ resid / n) if n > 0 and resid @ resid > 0 else 1.0
    return beta, sigma2, np.ones(p), 1.0


def gibbs_sweep(beta, sigma2, tau, lam, XtX, Xty, yy, n, hyper: Hyperparams, rng: RngStream, it: int = 0):
    """One systematic scan beta -> s2 -> tau -> lambda; returns the new (beta, s2, tau, lam)."""
    p = Xty.size
    inv_tau = 1.0 / tau
    A = XtX + np.diag(inv_tau)
    try:
        L = scipy.linalg.cholesky(A, lower=True)
    except np.linalg.LinAlgError:
        raise NumericalError(f"Cholesky of X'X + D_tau^-1 failed at iteration {it}") from None
    mean = scipy.linalg.cho_solve((L, True), Xty)
    beta = mean + np.sqrt(sigma2) * scipy.linalg.solve_triangular(L, rng.normal(p), lower=True, trans="T")
    rss = max(yy - 2.0 * beta @ Xty + beta @ XtX @ beta, 0.0)
    phi = sample_gamma(hyper.a0 + 0.5 * (n + p), hyper.b0 + 0.5 * (rss + inv_tau @ (beta * beta)), rng)
    sigma2 = 1.0 / float(phi)
    b2 = np.maximum(beta * beta, BETA2_FLOOR)
    tau = 1.0 / sample_inverse_gaussian(np.sqrt(2.0 * lam * sigma2 / b2), 2.0 * lam, rng)
    lam = float(sample_gamma(hyper.c0 + p, hyper.d0 + tau.sum(), rng))
    return beta, sigma2, tau, lam


def _run_chain(design: DesignMatrix, config: GibbsConfig, rng: RngStream, XtX, Xty, yy):
    p = design.p
    state = _initial_values(design, config, rng, XtX, Xty)
    kept = config.kept
    out_beta = np.empty((kept, p))
    out_s2 = np.empty(kept)
    out_tau = np.empty((kept, p))
    out_lam = np.empty(kept)
    total = config.warmup + kept * config.thin
    k = 0
    for it in range(total):
        state = gibbs_sweep(*state, XtX, Xty, yy, design.n, config.hyper, rng, it)
        if it >= config.warmup and (it - config.warmup) % config.thin == config.thin - 1:
            out_beta[k], out_s2[k], out_tau[k], out_lam[k] = state
            k += 1
    return out_beta, out_s2, out_tau, out_lam


def gibbs_fit(design: DesignMatrix, config: GibbsConfig = GibbsConfig(), rng: RngStream | None = None) -> PosteriorSamples:
    """Sample the posterior with ``config.n_chains`` independent chains.

    Chain c uses ``rng.split(c)``; ``rng`` defaults to ``RngStream(config.seed)``.
    """
    rng = rng if rng is not None else RngStream(config.seed)
    if design.p < 1:
        raise ValueError("need at least one coefficient")
    XtX = design.X.T @ design.X
    Xty = design.X.T @ design.y
    yy = float(design.y @ design.y)
    chains = [_run_chain(design, config, rng.split(c), XtX, Xty, yy) for c in range(config.n_chains)]
    beta, s2, tau, lam = (np.stack(parts) for parts in zip(*chains))
    return PosteriorSamples(beta, s2, tau, lam, design.labels)


def split_rhat_array(draws) -> float:
    """Split-R-hat of one scalar from (chains, draws) samples."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 2 or draws.shape[0] < 2 or draws.shape[1] < 4:
        raise ValueError("split-R-hat needs at least 2 chains of 4 draws")
    half = draws.shape[1] // 2
    # odd lengths drop the middle draw
    split = np.concatenate([draws[:, :half], draws[:, -half:]], axis=0)
    n = split.shape[1]
    within = split.var(axis=1, ddof=1).mean()
    between = n * split.mean(axis=1).var(ddof=1)
    if within == 0.0:
        warnings.warn("degenerate chain: zero within-chain variance", RuntimeWarning, stacklevel=2)
        return float("inf")
    var_plus = (n - 1) / n * within + between / n
    return float(np.sqrt(var_plus / within))


def split_rhat(samples: PosteriorSamples) -> dict[str, float]:
    return {name: split_rhat_array(v) for name, v in samples.parameters().items()}


def gibbs_posterior_summary(samples: PosteriorSamples, force: bool = False, level: float = 0.95) -> PosteriorSummary:
    """Pooled-chain summaries; refuses unless every beta split-R-hat is below 1.1."""
    if not force and samples.n_chains >= 2:
        rhat = split_rhat(samples)
        bad = {k: v for k, v in rhat.items() if k.startswith("beta:") and not v < RHAT_THRESHOLD}
        if bad:
            worst = max(bad, key=bad.get)
            raise DiagnosticsError(f"{len(bad)} coefficients have split-R-hat >= {RHAT_THRESHOLD} (worst {worst}: {bad[worst]:.3f})")
    pooled = samples.beta.reshape(-1, samples.beta.shape[-1])
    mean = pooled.mean(axis=0)
    var = pooled.var(axis=0, ddof=1)
    tail = 50.0 * (1.0 - level)
    low, high = np.percentile(pooled, [tail, 100.0 - tail], axis=0)
    sn = np.mean(np.abs(pooled) <= np.sqrt(var), axis=0)
    return PosteriorSummary(
        samples.labels or tuple(range(pooled.shape[1])), mean, var, low, high, sn, "Gibbs",
        sigma2_mean=float(samples.sigma2.mean()),
    )


def mc_standard_error(samples: np.ndarray) -> np.ndarray:
    """Monte-Carlo standard error of the pooled mean from per-chain batch means.

    ``samples`` is (chains, draws[, ...]); each chain is cut into 10 batches.
    """
    samples = np.asarray(samples, dtype=float)
    c, n = samples.shape[:2]
    nb = 10
    size = n // nb
    batches = samples[:, : nb * size].reshape((c, nb, size) + samples.shape[2:]).mean(axis=2)
    batches = batches.reshape((c * nb,) + samples.shape[2:])
    return batches.std(axis=0, ddof=1) / np.sqrt(c * nb)
