"""Ordinary least squares and the classical lasso by cyclic coordinate descent.

The lasso objective is ``||y - X b||^2 + lam * ||b||_1`` (squared error not
halved), so the per-coordinate update soft-thresholds at ``lam / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.linalg

from .distributions import RngStream
from .model import CoefficientBlocks, DesignMatrix, TermLabel


class SingularDesignError(np.linalg.LinAlgError):
    def __init__(self, message: str, dependent: list[TermLabel] | None = None):
        super().__init__(message)
        self.dependent = dependent or []


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, beta=None, change: float = np.nan):
        super().__init__(message)
        self.beta = beta
        self.change = change


@dataclass(frozen=True)
class OlsFit:
    beta_hat: CoefficientBlocks
    beta: np.ndarray
    sigma2_hat: float
    rss: float


@dataclass(frozen=True)
class LassoFit:
    beta_hat: CoefficientBlocks
    beta: np.ndarray
    lam: float
    active_set: tuple[TermLabel, ...]
    objective: float
    n_sweeps: int = 0
    objective_trace: tuple[float, ...] = field(default=(), repr=False)


def lasso_objective(X, y, beta, lam) -> float:
    r = y - X @ beta
    return float(r @ r + lam * np.abs(beta).sum())


def dependent_columns(X: np.ndarray, rtol: float = 1e-10) -> list[int]:
    """Indices of columns that are linear combinations of earlier-pivoted ones."""
    if X.shape[0] == 0:
        return list(range(X.shape[1]))
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    scale = diag[0] if diag.size and diag[0] > 0 else 1.0
    rank = int(np.sum(diag > rtol * scale))
    return sorted(int(j) for j in piv[rank:])


def fit_ols(design: DesignMatrix) -> OlsFit:
    X, y = design.X, design.y
    n, p = X.shape
    if n < p:
        raise SingularDesignError(
            f"under-determined: {n} rows for {p} terms; use the lasso or a Bayesian backend"
        )
    dep = dependent_columns(X)
    if dep:
        names = [design.labels[j] for j in dep]
        raise SingularDesignError(
            "rank-deficient design; dependent columns: " + ", ".join(map(str, names)), names
        )
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - p) if n > p else 0.0
    return OlsFit(CoefficientBlocks.from_vector(design.labels, beta), beta, sigma2, rss)


def lambda_max(design: DesignMatrix) -> float:
    """Smallest lam for which the lasso solution is identically zero."""
    return float(2.0 * np.max(np.abs(design.X.T @ design.y))) if design.p else 0.0


@numba.njit(cache=True)
def _cd_sweeps(G, c, yy, lam, beta, tol, max_iter, trace):
    p = c.size
    Gb = G @ beta
    half = 0.5 * lam
    trace[0] = yy - 2.0 * (c @ beta) + beta @ Gb + lam * np.abs(beta).sum()
    change = np.inf
    for sweep in range(1, max_iter + 1):
        change = 0.0
        for j in range(p):
            gjj = G[j, j]
            if gjj == 0.0:
                continue
            old = beta[j]
            rho = c[j] - Gb[j] + gjj * old
            mag = abs(rho) - half
            new = np.sign(rho) * mag / gjj if mag > 0.0 else 0.0
            if new != old:
                delta = new - old
                for i in range(p):
                    Gb[i] += G[i, j] * delta
                beta[j] = new
                if abs(delta) > change:
                    change = abs(delta)
        trace[sweep] = yy - 2.0 * (c @ beta) + beta @ Gb + lam * np.abs(beta).sum()
        if change < tol:
            return sweep, change
    return -1, change


def _coordinate_descent(G, c, yy, lam, beta, tol, max_iter):
    """Covariance-update coordinate descent on the Gram matrix G = X'X, c = X'y.

    Returns (beta, sweeps, objective per sweep, last change); ``beta`` is updated in place.
    """
    trace = np.empty(max_iter + 1)
    sweeps, change = _cd_sweeps(G, c, float(yy), float(lam), beta, float(tol), int(max_iter), trace)
    if sweeps < 0:
        raise ConvergenceError(
            f"coordinate descent did not converge in {max_iter} sweeps (last change {change:.3g})",
            beta.copy(),
            change,
        )
    trace = trace[: sweeps + 1]
    # exact coordinate minimization cannot raise the objective
    slack = 1e-9 * np.maximum(1.0, np.abs(trace[:-1]))
    assert np.all(np.diff(trace) <= slack), "lasso objective increased during a sweep"
    return beta, sweeps, trace.tolist(), change


def fit_lasso(
    design: DesignMatrix,
    lam: float,
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
    beta0=None,
    scale: bool = False,
) -> LassoFit:
    """Minimize ``RSS + lam * ||beta||_1``.

    With ``scale=True`` the penalty applies to coefficients of unit-norm
    columns; the returned coefficients are transformed back to raw scale.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    work, norms = design.scaled() if scale else (design, np.ones(design.p))
    X, y = work.X, work.y
    beta = np.zeros(design.p) if beta0 is None else np.asarray(beta0, dtype=float) * norms
    beta = np.ascontiguousarray(beta, dtype=float)
    G = X.T @ X
    c = X.T @ y
    beta, sweeps, trace, _ = _coordinate_descent(G, c, float(y @ y), float(lam), beta, tol, max_iter)
    beta = beta / norms
    return _lasso_result(design, beta, float(lam), sweeps, trace, norms if scale else None)


def _lasso_result(design, beta, lam, sweeps, trace, norms=None):
    penal = beta * norms if norms is not None else beta
    resid = design.y - design.X @ beta
    obj = float(resid @ resid + lam * np.abs(penal).sum())
    active = tuple(lab for lab, b in zip(design.labels, beta) if b != 0.0)
    return LassoFit(
        CoefficientBlocks.from_vector(design.labels, beta), beta, lam, active, obj, sweeps, tuple(trace)
    )


def kkt_residuals(design: DesignMatrix, beta, lam: float) -> np.ndarray:
    """Per-coordinate violation of the subgradient optimality conditions.

    With g = 2 X'(y - X beta): |g_j - lam sign(beta_j)| on the active set and
    max(0, |g_j| - lam) off it.
    """
    beta = np.asarray(beta, dtype=float)
    g = 2.0 * design.X.T @ (design.y - design.X @ beta)
    return np.where(beta != 0.0, np.abs(g - lam * np.sign(beta)), np.maximum(0.0, np.abs(g) - lam))


def lambda_grid(design: DesignMatrix, n: int = 100, ratio: float = 1e-4) -> np.ndarray:
    """Descending log-spaced grid from lambda_max down to ratio * lambda_max."""
    lmax = lambda_max(design)
    if lmax == 0.0:
        return np.zeros(1)
    return np.geomspace(lmax, ratio * lmax, n)


def lasso_path(design: DesignMatrix, lambdas, tol: float = 1e-10, max_iter: int = 1_000_000) -> np.ndarray:
    """Coefficients along ``lambdas`` (any order), computed with warm starts in descending order."""
    lambdas = np.asarray(lambdas, dtype=float)
    order = np.argsort(-lambdas, kind="stable")
    G = design.X.T @ design.X
    c = design.X.T @ design.y
    yy = float(design.y @ design.y)
    beta = np.zeros(design.p)
    out = np.empty((lambdas.size, design.p))
    for k in order:
        beta, *_ = _coordinate_descent(G, c, yy, lambdas[k], beta, tol, max_iter)
        out[k] = beta
    return out


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < k:
        raise ValueError(f"{n} rows cannot fill {k} folds with at least one row each")
    perm = RngStream(seed, 0).gen.permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


def cv_errors(design: DesignMatrix, lambdas, k: int, seed: int, tol: float = 1e-10) -> np.ndarray:
    """Mean held-out squared error per lambda, pooled over k folds."""
    lambdas = np.asarray(lambdas, dtype=float)
    sse = np.zeros(lambdas.size)
    for fold in kfold_indices(design.n, k, seed):
        train = np.setdiff1d(np.arange(design.n), fold)
        path = lasso_path(design.subset(train), lambdas, tol)
        resid = design.y[fold][:, None] - design.X[fold] @ path.T
        sse += (resid**2).sum(axis=0)
    return sse / design.n


def lasso_cv(design: DesignMatrix, lambdas=None, k: int = 10, seed: int = 0, tol: float = 1e-10):
    """Choose lam by k-fold CV (ties go to the larger lam) and refit on all rows.

    Returns ``(lambda_star, fit, cv_curve)``.
    """
    lambdas = lambda_grid(design) if lambdas is None else np.asarray(lambdas, dtype=float)
    if lambdas.size == 0 or np.any(lambdas < 0):
        raise ValueError("lambda grid must be non-empty and non-negative")
    errs = cv_errors(design, lambdas, k, seed, tol)
    best = errs.min()
    ties = np.flatnonzero(errs <= best)
    lam_star = float(lambdas[ties].max())
    return lam_star, fit_lasso(design, lam_star, tol), errs
