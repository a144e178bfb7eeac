"""ADVI-style variational inference: Gaussian q over transformed parameters.

The Bayesian lasso parameters are mapped to the real line as

    zeta = (beta_1..beta_p, log s2, log tau_1..log tau_p, log lam)

and q(zeta) = N(m, L L') is fit by stochastic gradient ascent on the
reparametrized Monte-Carlo ELBO.  Gradients of the transformed log joint are
written out by hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .cavi import Hyperparams
from .distributions import RngStream
from .model import DesignMatrix
from .selection import PosteriorSummary

LOG_2PI = np.log(2.0 * np.pi)


class GradientError(FloatingPointError):
    def __init__(self, message: str, iteration: int, coordinate: int):
        super().__init__(message)
        self.iteration = iteration
        self.coordinate = coordinate


@dataclass(frozen=True)
class TransformMap:
    """Per-coordinate bijection tags: 'identity' or 'log' (theta = exp(zeta))."""

    tags: tuple[str, ...]

    @property
    def _log_mask(self) -> np.ndarray:
        return np.array([t == "log" for t in self.tags])

    def forward(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.where(self._log_mask, np.log(np.where(self._log_mask, theta, 1.0)), theta)

    def inverse(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        return np.where(self._log_mask, np.exp(np.where(self._log_mask, zeta, 0.0)), zeta)

    def log_det_jacobian(self, zeta) -> np.ndarray:
        """log |J_{T^-1}(zeta)|: the sum of the log-transformed coordinates."""
        zeta = np.asarray(zeta, dtype=float)
        return np.sum(np.where(self._log_mask, zeta, 0.0), axis=-1)


class BayesianLassoTarget:
    """Transformed log joint of the Bayesian lasso and its gradient."""

    def __init__(self, design: DesignMatrix, hyper: Hyperparams = Hyperparams()):
        self.design = design
        self.hyper = hyper
        self.p = design.p
        self.n = design.n
        self.G = design.X.T @ design.X
        self.Xty = design.X.T @ design.y
        self.yy = float(design.y @ design.y)
        self.transform = TransformMap(("identity",) * self.p + ("log",) * (self.p + 1) + ("log",))
        h = hyper
        self._const = (
            -0.5 * (self.n + self.p) * LOG_2PI
            + h.a0 * np.log(h.b0) - special.gammaln(h.a0)
            + h.c0 * np.log(h.d0) - special.gammaln(h.c0)
        )

    @property
    def dim(self) -> int:
        return 2 * self.p + 2

    def split(self, zeta):
        p = self.p
        return zeta[..., :p], zeta[..., p], zeta[..., p + 1 : 2 * p + 1], zeta[..., 2 * p + 1]

    def log_density(self, zeta) -> np.ndarray:
        return self.log_density_and_grad(zeta)[0]

    def log_density_and_grad(self, zeta):
        """log p(y, T^-1(zeta)) + log|J| and its zeta-gradient; zeta may be (S, dim)."""
        zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
        h, n, p = self.hyper, self.n, self.p
        beta, s, u, l = self.split(zeta)
        inv_s2 = np.exp(-s)
        inv_tau = np.exp(-u)
        tau = np.exp(u)
        lam = np.exp(l)
        Gb = beta @ self.G
        rss = np.maximum(self.yy - 2.0 * beta @ self.Xty + np.sum(beta * Gb, axis=1), 0.0)
        quad = np.sum(beta * beta * inv_tau, axis=1)
        sum_tau = tau.sum(axis=1)
        logp = (
            self._const
            - 0.5 * (n + p) * s - 0.5 * inv_s2 * (rss + quad)
            - 0.5 * u.sum(axis=1)
            + p * l - lam * sum_tau
            - (h.a0 + 1.0) * s - h.b0 * inv_s2
            + (h.c0 - 1.0) * l - h.d0 * lam
            + s + u.sum(axis=1) + l
        )
        g_beta = inv_s2[:, None] * (self.Xty - Gb - beta * inv_tau)
        g_s = -0.5 * (n + p) + 0.5 * inv_s2 * (rss + quad) - h.a0 - 1.0 + h.b0 * inv_s2 + 1.0
        g_u = 0.5 + 0.5 * inv_s2[:, None] * beta * beta * inv_tau - lam[:, None] * tau
        g_l = p - lam * sum_tau + h.c0 - h.d0 * lam
        grad = np.column_stack([g_beta, g_s, g_u, g_l])
        return logp, grad

    def initial_mean(self) -> np.ndarray:
        beta = np.linalg.solve(self.G + np.eye(self.p), self.Xty)
        rss = max(self.yy - 2.0 * beta @ self.Xty + beta @ self.G @ beta, 1e-12)
        s2 = rss / self.n if self.n else 1.0
        return np.concatenate([beta, [np.log(s2)], np.zeros(self.p), [0.0]])

    def labels(self) -> list[str]:
        names = [str(lab) for lab in self.design.labels]
        return [f"beta:{nm}" for nm in names] + ["log sigma2"] + [f"log tau:{nm}" for nm in names] + ["log lambda"]


class GaussianLinearTarget:
    """Linear regression with known noise variance and a N(0, prior_var I) prior.

    Fully conjugate: the posterior and the evidence are available in closed form,
    which makes it a reference problem for the stochastic optimizer.
    """

    def __init__(self, X, y, sigma2: float = 1.0, prior_var: float = 1.0):
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        self.y = np.asarray(y, dtype=float)
        self.sigma2 = float(sigma2)
        self.prior_var = float(prior_var)
        self.n, self.p = self.X.shape
        self.G = self.X.T @ self.X
        self.Xty = self.X.T @ self.y
        self.transform = TransformMap(("identity",) * self.p)

    @property
    def dim(self) -> int:
        return self.p

    def log_density_and_grad(self, zeta):
        beta = np.atleast_2d(np.asarray(zeta, dtype=float))
        r = self.y[None, :] - beta @ self.X.T
        logp = (
            -0.5 * self.n * np.log(2 * np.pi * self.sigma2) - 0.5 * np.sum(r * r, axis=1) / self.sigma2
            - 0.5 * self.p * np.log(2 * np.pi * self.prior_var) - 0.5 * np.sum(beta * beta, axis=1) / self.prior_var
        )
        grad = r @ self.X / self.sigma2 - beta / self.prior_var
        return logp, grad

    def log_density(self, zeta):
        return self.log_density_and_grad(zeta)[0]

    def posterior(self):
        prec = self.G / self.sigma2 + np.eye(self.p) / self.prior_var
        cov = np.linalg.inv(prec)
        return cov @ self.Xty / self.sigma2, cov

    def log_evidence(self) -> float:
        S = self.sigma2 * np.eye(self.n) + self.prior_var * self.X @ self.X.T
        _, logdet = np.linalg.slogdet(S)
        return float(-0.5 * (self.n * LOG_2PI + logdet + self.y @ np.linalg.solve(S, self.y)))

    def initial_mean(self) -> np.ndarray:
        return np.zeros(self.p)


@dataclass(frozen=True, eq=False)
class GaussianVarParams:
    """q(zeta) = N(mean, L L').  Mean-field stores log standard deviations only;
    full-rank stores the strictly-lower part of L plus log of its diagonal."""

    mean: np.ndarray
    log_sd: np.ndarray
    lower: np.ndarray | None = None

    @property
    def mode(self) -> str:
        return "meanfield" if self.lower is None else "fullrank"

    @property
    def dim(self) -> int:
        return self.mean.size

    def scale_matrix(self) -> np.ndarray:
        L = np.diag(np.exp(self.log_sd))
        if self.lower is not None:
            L = L + np.tril(self.lower, -1)
        return L

    def transform_noise(self, eps) -> np.ndarray:
        eps = np.atleast_2d(eps)
        if self.lower is None:
            return self.mean + eps * np.exp(self.log_sd)
        return self.mean + eps @ self.scale_matrix().T

    def entropy(self) -> float:
        return 0.5 * self.dim * (1.0 + LOG_2PI) + float(np.sum(self.log_sd))

    def marginal_sd(self) -> np.ndarray:
        return np.sqrt(np.sum(self.scale_matrix() ** 2, axis=1))


@dataclass(frozen=True)
class StepConfig:
    """Adaptive step: eta * k^(-1/2 + eps) / (offset + sqrt(s_k)), s_k an EWMA of g^2."""

    eta: float = 0.1
    alpha: float = 0.1
    offset: float = 1.0
    eps: float = 1e-16


@dataclass
class AdviTrace:
    elbo: list[float] = field(default_factory=list)
    smoothed_elbo: list[float] = field(default_factory=list)
    step_size: list[float] = field(default_factory=list)
    status: str = "max_iter"

    @property
    def n_iter(self) -> int:
        return len(self.elbo)


def _pack(params: GaussianVarParams) -> np.ndarray:
    parts = [params.mean, params.log_sd]
    if params.lower is not None:
        parts.append(params.lower[np.tril_indices(params.dim, -1)])
    return np.concatenate(parts)


def _unpack(vec: np.ndarray, dim: int, fullrank: bool) -> GaussianVarParams:
    mean, log_sd = vec[:dim], vec[dim : 2 * dim]
    lower = None
    if fullrank:
        lower = np.zeros((dim, dim))
        lower[np.tril_indices(dim, -1)] = vec[2 * dim :]
    return GaussianVarParams(mean.copy(), log_sd.copy(), lower)


def elbo_gradient(target, params: GaussianVarParams, eps: np.ndarray):
    """Reparametrized ELBO estimate and gradient for the S noise rows in ``eps``."""
    zeta = params.transform_noise(eps)
    logp, g = target.log_density_and_grad(zeta)
    S = eps.shape[0]
    g_mean = g.mean(axis=0)
    g_logsd = np.mean(g * eps, axis=0) * np.exp(params.log_sd) + 1.0
    parts = [g_mean, g_logsd]
    if params.lower is not None:
        outer = g.T @ eps / S
        parts.append(outer[np.tril_indices(params.dim, -1)])
    elbo = float(np.mean(logp)) + params.entropy()
    return elbo, np.concatenate(parts), logp


def elbo_estimate(target, params: GaussianVarParams, S: int, rng: RngStream):
    """Unbiased S-sample ELBO estimate and its Monte-Carlo standard error."""
    if S < 1:
        raise ValueError("S must be at least 1")
    eps = rng.normal((S, params.dim))
    logp = target.log_density(params.transform_noise(eps))
    se = float(np.std(logp, ddof=1) / np.sqrt(S)) if S > 1 else float("nan")
    return float(np.mean(logp)) + params.entropy(), se


def advi_fit_target(
    target,
    S: int = 10,
    mode: str = "meanfield",
    step: StepConfig = StepConfig(),
    tol: float = 1e-4,
    max_iter: int = 10_000,
    rng: RngStream | None = None,
    window: int = 10,
    init_log_sd: float = 0.0,
):
    """Stochastic-gradient ELBO ascent for any target exposing
    ``dim``, ``initial_mean()`` and ``log_density_and_grad(zeta)``."""
    if S < 1:
        raise ValueError("S must be at least 1")
    if mode not in ("meanfield", "fullrank"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = rng if rng is not None else RngStream(0)
    dim = target.dim
    fullrank = mode == "fullrank"
    params = GaussianVarParams(
        np.asarray(target.initial_mean(), dtype=float),
        np.full(dim, float(init_log_sd)),
        np.zeros((dim, dim)) if fullrank else None,
    )
    vec = _pack(params)
    s_k = None
    trace = AdviTrace()
    prev_window = None
    for k in range(1, max_iter + 1):
        eps = rng.normal((S, dim))
        elbo, grad, _ = elbo_gradient(target, params, eps)
        bad = np.flatnonzero(~np.isfinite(grad))
        if bad.size:
            raise GradientError(f"non-finite gradient at iteration {k}, coordinate {bad[0]}", k, int(bad[0]))
        s_k = grad * grad if s_k is None else step.alpha * grad * grad + (1.0 - step.alpha) * s_k
        rho = step.eta * k ** (-0.5 + step.eps) / (step.offset + np.sqrt(s_k))
        vec = vec + rho * grad
        params = _unpack(vec, dim, fullrank)
        trace.elbo.append(elbo)
        trace.smoothed_elbo.append(float(np.mean(trace.elbo[-window:])))
        trace.step_size.append(float(np.mean(rho)))
        if k % window == 0:
            current = trace.smoothed_elbo[-1]
            if prev_window is not None and abs(current - prev_window) <= tol * abs(current):
                trace.status = "converged"
                break
            prev_window = current
    assert np.all(np.exp(params.log_sd) > 0)
    return params, trace


def advi_fit(
    design: DesignMatrix,
    hyper: Hyperparams = Hyperparams(),
    S: int = 10,
    mode: str = "meanfield",
    step: StepConfig = StepConfig(),
    tol: float = 1e-4,
    max_iter: int = 10_000,
    rng: RngStream | None = None,
):
    """Fit the Bayesian lasso by ADVI; returns ``(params, trace)``."""
    return advi_fit_target(BayesianLassoTarget(design, hyper), S, mode, step, tol, max_iter, rng)


def advi_posterior_summary(
    params: GaussianVarParams, target, n_draws: int = 100_000, rng: RngStream | None = None, level: float = 0.95
) -> PosteriorSummary:
    """Empirical summaries of the coefficients from draws of q mapped through T^-1."""
    rng = rng if rng is not None else RngStream(0)
    theta = target.transform.inverse(params.transform_noise(rng.normal((n_draws, params.dim))))
    p = target.p
    beta = theta[:, :p]
    mean = beta.mean(axis=0)
    var = beta.var(axis=0, ddof=1)
    tail = 50.0 * (1.0 - level)
    low, high = np.percentile(beta, [tail, 100.0 - tail], axis=0)
    sn = np.mean(np.abs(beta) <= np.sqrt(var), axis=0)
    labels = tuple(target.design.labels) if hasattr(target, "design") else tuple(range(p))
    s2 = float(theta[:, p].mean()) if theta.shape[1] > p else float("nan")
    return PosteriorSummary(labels, mean, var, low, high, sn, "ADVI", sigma2_mean=s2)
