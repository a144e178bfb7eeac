"""Response mean/variance of a fitted model and desirability-based optimization.

The model is linear in the noise variables z (E z = 0, Cov z = Sigma_z), so with
g_t(x, w) the coefficient of z_t,

    E[Y]   = sum of the alpha and delta terms at (x, w)
    Var[Y] = g(x, w)' Sigma_z g(x, w) + sigma2

exactly; no Taylor approximation is involved.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .model import SUM_TOL, CoefficientBlocks, FactorSpec, ModelError, validate_point


class InfeasiblePointError(ModelError):
    pass


@dataclass(frozen=True, eq=False)
class ResponseSurfaceModel:
    coefficients: CoefficientBlocks
    sigma2: float
    spec: FactorSpec
    noise_cov: np.ndarray | None = None

    def __post_init__(self):
        T = self.spec.n_noise
        cov = np.eye(T) if self.noise_cov is None else np.asarray(self.noise_cov, dtype=float)
        if cov.shape != (T, T):
            raise ModelError(f"noise covariance must be {T}x{T}")
        if not np.allclose(cov, cov.T) or (T and np.linalg.eigvalsh(cov).min() < -1e-12):
            raise ModelError("noise covariance must be symmetric positive semi-definite")
        if self.sigma2 < 0:
            raise ModelError("sigma2 must be non-negative")
        object.__setattr__(self, "noise_cov", cov)
        q, P = self.spec.n_mixture, self.spec.n_process
        for lab in self.coefficients.labels:
            if max(lab.mix) > q or (lab.process or 0) > P or (lab.noise or 0) > T:
                raise ModelError(f"term {lab} does not fit the factor spec")
        object.__setattr__(self, "_mean_terms", [(l, v) for l, v in self.coefficients.values.items() if l.noise is None])
        object.__setattr__(self, "_noise_terms", [(l, v) for l, v in self.coefficients.values.items() if l.noise is not None])

    def block_matrices(self) -> dict[str, np.ndarray]:
        """Linear-blending blocks: alpha (q), delta (q x P), Delta (q x T), H (q x P x T)."""
        q, P, T = self.spec.n_mixture, self.spec.n_process, self.spec.n_noise
        out = {"alpha": np.zeros(q), "delta": np.zeros((q, P)), "Delta": np.zeros((q, T)), "H": np.zeros((q, P, T))}
        for lab, v in self.coefficients.values.items():
            if lab.is_blend:
                continue
            i = lab.mix[0] - 1
            if lab.block == "alpha":
                out["alpha"][i] = v
            elif lab.block == "delta":
                out["delta"][i, lab.process - 1] = v
            elif lab.block == "gamma":
                out["Delta"][i, lab.noise - 1] = v
            else:
                out["H"][i, lab.process - 1, lab.noise - 1] = v
        return out

    def _points(self, x, w):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        w = np.asarray(w, dtype=float).reshape(x.shape[0], -1) if self.spec.n_process else np.zeros((x.shape[0], 0))
        return x, w

    def noise_gradient(self, x, w) -> np.ndarray:
        """g_t(x, w) for each point, shape (N, T)."""
        x, w = self._points(x, w)
        g = np.zeros((x.shape[0], self.spec.n_noise))
        for lab, v in self._noise_terms:
            g[:, lab.noise - 1] += v * lab.xw_factor(x, w)
        return g

    def mean(self, x, w) -> np.ndarray:
        x, w = self._points(x, w)
        out = np.zeros(x.shape[0])
        for lab, v in self._mean_terms:
            out += v * lab.xw_factor(x, w)
        return out

    def variance(self, x, w) -> np.ndarray:
        g = self.noise_gradient(x, w)
        return np.einsum("nt,ts,ns->n", g, self.noise_cov, g) + self.sigma2


def _check_feasible(model: ResponseSurfaceModel, x, w):
    bad = validate_point(x, w, model.spec)
    if bad:
        raise InfeasiblePointError("infeasible point: " + "; ".join(bad))


def predict_mean(model: ResponseSurfaceModel, x, w) -> float:
    _check_feasible(model, x, w)
    return float(model.mean(x, w)[0])


def predict_variance(model: ResponseSurfaceModel, x, w) -> float:
    _check_feasible(model, x, w)
    return float(model.variance(x, w)[0])


@dataclass(frozen=True)
class DesirabilityTarget:
    """Minimum (``lower``) and maximum (``upper``) acceptable values and exponent r."""

    lower: float
    upper: float
    r: float = 1.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"desirability target needs lower < upper, got {self.lower}, {self.upper}")
        if not self.r > 0:
            raise ValueError("desirability exponent r must be positive")


def desirability_single(value, target: DesirabilityTarget):
    """0 at or below ``lower``, 1 at or above ``upper``, power ramp in between."""
    value = np.asarray(value, dtype=float)
    ramp = np.clip((value - target.lower) / (target.upper - target.lower), 0.0, 1.0) ** target.r
    out = np.where(value <= target.lower, 0.0, np.where(value >= target.upper, 1.0, ramp))
    return out if out.ndim else float(out)


def combine_desirabilities(ds) -> np.ndarray | float:
    """Geometric mean over the first axis."""
    ds = np.asarray(ds, dtype=float)
    out = np.prod(ds, axis=0) ** (1.0 / ds.shape[0])
    return out if out.ndim else float(out)


def _response_values(model: ResponseSurfaceModel, x, w, n_targets: int) -> list[np.ndarray]:
    # g1(Y) = Y and g2(Y) = -(Y - E Y)^2
    values = [model.mean(x, w), -model.variance(x, w)]
    if n_targets != 2:
        raise ValueError("targets must be given for exactly the mean and the negated variance")
    return values


def overall_desirability(model: ResponseSurfaceModel, x, w, targets: Sequence[DesirabilityTarget]):
    values = _response_values(model, x, w, len(targets))
    ds = [desirability_single(v, t) for v, t in zip(values, targets)]
    out = np.asarray(combine_desirabilities(ds))
    return float(out[0]) if out.size == 1 else out


@dataclass(frozen=True)
class OptimizerConfig:
    resolution: float = 0.01
    polish: bool = True
    polish_maxiter: int = 2000
    target_percentiles: tuple[float, float] = (5.0, 95.0)
    r: float = 1.0


@dataclass(frozen=True)
class OptimizationResult:
    x: np.ndarray
    w: np.ndarray
    mean: float
    sd: float
    cv: float
    desirability: float
    targets: tuple[DesirabilityTarget, ...]
    trace: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Row of the optimum table: x1..xq, w1..wP, mu_Y, sigma_Y, CV, D."""
        row = {f"x{i}": float(v) for i, v in enumerate(self.x, 1)}
        row.update({f"w{p}": float(v) for p, v in enumerate(self.w, 1)})
        row.update({"mu_Y": self.mean, "sigma_Y": self.sd, "CV": self.cv, "D": self.desirability})
        return row


def _lattice(lo: float, hi: float, res: float) -> np.ndarray:
    start = np.ceil(lo / res - 1e-9) * res
    return np.round(np.arange(start, hi + res * 1e-6, res), 12)


def feasibility_grid(spec: FactorSpec, resolution: float = 0.01):
    """Lattice points (x, w): q - 1 free proportions and every process variable at ``resolution``."""
    q = spec.n_mixture
    axes = [_lattice(lo, hi, resolution) for lo, hi in spec.mixture_bounds[:-1]]
    free = np.array(list(itertools.product(*axes))).reshape(-1, q - 1)
    last = np.round(1.0 - free.sum(axis=1), 12)
    lo_q, hi_q = spec.mixture_bounds[-1]
    ok = (last >= lo_q - SUM_TOL) & (last <= hi_q + SUM_TOL)
    xs = np.column_stack([free[ok], last[ok]])
    if xs.shape[0] == 0:
        raise ModelError("empty feasible region at this grid resolution")
    if spec.n_process == 0:
        return xs, np.zeros((xs.shape[0], 0))
    for var in spec.process:
        if not (np.isfinite(var.low) and np.isfinite(var.high)):
            raise ModelError("process variables need finite bounds for optimization")
    ws = np.array(list(itertools.product(*[_lattice(v.low, v.high, resolution) for v in spec.process])))
    xi = np.repeat(np.arange(xs.shape[0]), ws.shape[0])
    wi = np.tile(np.arange(ws.shape[0]), xs.shape[0])
    return xs[xi], ws[wi]


def default_targets(model: ResponseSurfaceModel, config: OptimizerConfig = OptimizerConfig()):
    """Targets from the spread of predictions over the feasibility grid.

    A response that is constant over the grid gets a target under which it is
    fully desirable everywhere.
    """
    xs, ws = feasibility_grid(model.spec, config.resolution)
    out = []
    for v in (model.mean(xs, ws), -model.variance(xs, ws)):
        lo, hi = np.percentile(v, config.target_percentiles)
        if hi - lo <= 1e-12 * max(1.0, abs(hi)):
            lo, hi = float(np.min(v)) - 1.0, float(np.min(v))
        out.append(DesirabilityTarget(float(lo), float(hi), config.r))
    return tuple(out)


def project_mixture(x, spec: FactorSpec) -> np.ndarray:
    """Euclidean projection onto {l <= x <= u, sum x = 1} by bisection on the shift."""
    x = np.asarray(x, dtype=float)
    lo = np.array([b[0] for b in spec.mixture_bounds])
    hi = np.array([b[1] for b in spec.mixture_bounds])
    a, b = np.min(x - hi), np.max(x - lo)
    for _ in range(200):
        mid = 0.5 * (a + b)
        if np.clip(x - mid, lo, hi).sum() > 1.0:
            a = mid
        else:
            b = mid
    out = np.clip(x - 0.5 * (a + b), lo, hi)
    # absorb rounding in the component with the most slack
    slack = np.minimum(out - lo, hi - out)
    k = int(np.argmax(slack))
    out[k] += 1.0 - out.sum()
    return out


def _project(v, spec: FactorSpec):
    q = spec.n_mixture
    x = project_mixture(np.append(v[: q - 1], 1.0 - np.sum(v[: q - 1])), spec)
    w = np.array([np.clip(v[q - 1 + p], var.low, var.high) for p, var in enumerate(spec.process)])
    return x, w


def optimize_desirability(
    model: ResponseSurfaceModel,
    targets: Sequence[DesirabilityTarget] | None = None,
    config: OptimizerConfig = OptimizerConfig(),
    seed: int = 0,
) -> OptimizationResult:
    """Maximize overall desirability: dense lattice search, then a projected Nelder-Mead polish.

    Ties on the lattice go to the higher predicted mean, then the lower variance.
    The search is deterministic; ``seed`` is only recorded.
    """
    targets = tuple(targets) if targets is not None else default_targets(model, config)
    xs, ws = feasibility_grid(model.spec, config.resolution)
    means = model.mean(xs, ws)
    variances = model.variance(xs, ws)
    D = combine_desirabilities(
        [desirability_single(means, targets[0]), desirability_single(-variances, targets[1])]
    )
    order = np.lexsort((variances, -means, -D))
    best = int(order[0])
    trace = {"grid_points": int(xs.shape[0]), "grid_best_D": float(D[best]), "seed": seed, "warnings": []}
    if not np.any(D > 0):
        warnings.warn("desirability is zero over the whole grid", RuntimeWarning, stacklevel=2)
        trace["warnings"].append("flat-desirability")
    x_best, w_best, d_best = xs[best], ws[best], float(D[best])
    if config.polish:
        q = model.spec.n_mixture

        def neg_d(v):
            x, w = _project(v, model.spec)
            return -overall_desirability(model, x, w, targets)

        v0 = np.concatenate([x_best[: q - 1], w_best])
        simplex = np.vstack([v0] + [v0 + config.resolution * e for e in np.eye(v0.size)])
        res = optimize.minimize(
            neg_d, v0, method="Nelder-Mead",
            options={"initial_simplex": simplex, "maxiter": config.polish_maxiter, "xatol": 1e-8, "fatol": 1e-12},
        )
        x_pol, w_pol = _project(res.x, model.spec)
        d_pol = overall_desirability(model, x_pol, w_pol, targets)
        trace.update({"polish_D": float(d_pol), "polish_nfev": int(res.nfev)})
        if d_pol > d_best:
            x_best, w_best, d_best = x_pol, w_pol, float(d_pol)
    mu = float(model.mean(x_best, w_best)[0])
    sd = float(np.sqrt(model.variance(x_best, w_best)[0]))
    assert not validate_point(x_best, w_best, model.spec)
    return OptimizationResult(
        np.asarray(x_best, dtype=float), np.asarray(w_best, dtype=float), mu, sd,
        sd / mu if mu != 0 else float("inf"), d_best, targets, trace,
    )
