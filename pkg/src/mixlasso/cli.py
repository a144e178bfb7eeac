"""Command-line interface: simulate, fit, optimize, loocv.

Configuration is resolved as defaults < ``--config`` JSON file < explicit flags,
and the resolved dictionary is echoed into every output file. Feeding that
dictionary back through ``--config`` reproduces the outputs byte for byte.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import warnings
from pathlib import Path

import numba
import numpy as np
import scipy

from . import __version__, formats
from .advi import AdviTrace, BayesianLassoTarget, GradientError, advi_fit_target, advi_posterior_summary
from .cavi import DivergenceError, Hyperparams, NumericalError, cavi_fit, cavi_posterior_summary
from .distributions import RngStream
from .freq import ConvergenceError, fit_lasso, fit_ols, kkt_residuals, lasso_cv
from .gibbs import DiagnosticsError, GibbsConfig, gibbs_fit, gibbs_posterior_summary, mc_standard_error, split_rhat
from .model import (
    CoefficientBlocks,
    Dataset,
    FactorSpec,
    ModelFormula,
    build_design_matrix,
    load_model_config,
    simulation_factor_spec,
)
from .response import DesirabilityTarget, OptimizerConfig, ResponseSurfaceModel, optimize_desirability
from .selection import LooError, loo_cv, select_ci, select_sn
from .simulation import CRITERIA, METHODS, OPEN_QUESTIONS, StudyConfig, run_study

ENV_OUTDIR = "MIXLASSO_OUTDIR"
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
FIT_METHODS = ("ols", "lasso", "cavi", "advi", "gibbs")

_HYPER = {"a0": 0.01, "b0": 0.01, "c0": 0.01, "d0": 0.01}

DEFAULTS: dict[str, dict] = {
    "simulate": {
        "reps": 1000, "n": 100, "methods": list(METHODS), "criteria": list(CRITERIA), "seed": 0, "sigma": 0.5,
        **_HYPER, "cavi_tol": 1e-8, "gibbs_chains": 4, "gibbs_warmup": 1000, "gibbs_kept": 2000,
        "gibbs_force": False, "advi_samples": 10, "advi_max_iter": 10_000, "advi_draws": 20_000,
        "lasso_folds": 10, "jobs": 1, "timings": False,
    },
    "fit": {
        "data": None, "model": None, "method": "cavi", "criteria": [], "seed": 0, **_HYPER,
        "tol": None, "max_iter": None, "lam": None, "folds": 10, "chains": 4, "warmup": 1000, "kept": 2000,
        "force": False, "write_draws": False, "advi_samples": 10, "advi_mode": "meanfield",
        "advi_draws": 100_000, "level": 0.95,
    },
    "optimize": {
        "coefficients": None, "data": None, "model": None, "method": "cavi", "use": "estimate", "seed": 0,
        "targets": None, "default_targets": True, "resolution": 0.01, "polish": True, "r": 1.0, "noise_cov": None,
    },
    "loocv": {
        "data": None, "model": None, "methods": ["ols", "cavi"], "seed": 0, **_HYPER, "folds": 10,
        "chains": 4, "warmup": 1000, "kept": 2000, "force": False, "advi_samples": 10, "advi_draws": 20_000,
    },
}

NUMERICAL_ERRORS = (
    np.linalg.LinAlgError, ConvergenceError, DivergenceError, GradientError, DiagnosticsError,
    NumericalError, LooError, FloatingPointError,
)


class ConfigError(ValueError):
    pass


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in _csv_list(text)]


def _flag(value: str) -> bool:
    low = value.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixlasso", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mixlasso {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(p):
        p.add_argument("--config", default=None, help="JSON file of parameters; flags override it")
        p.add_argument("--outdir", default=None, help=f"output directory (default ${ENV_OUTDIR} or .)")
        p.add_argument("--seed", type=int, default=S)

    def hyper(p):
        for name in _HYPER:
            p.add_argument(f"--{name}", type=float, default=S)

    p = sub.add_parser("simulate", help="run the replication study")
    common(p)
    hyper(p)
    p.add_argument("--reps", type=int, default=S)
    p.add_argument("--n", type=int, default=S, help="observations per replication")
    p.add_argument("--methods", type=_csv_list, default=S)
    p.add_argument("--criteria", type=_csv_list, default=S)
    p.add_argument("--sigma", type=float, default=S)
    p.add_argument("--cavi-tol", dest="cavi_tol", type=float, default=S)
    p.add_argument("--gibbs-chains", dest="gibbs_chains", type=int, default=S)
    p.add_argument("--gibbs-warmup", dest="gibbs_warmup", type=int, default=S)
    p.add_argument("--gibbs-kept", dest="gibbs_kept", type=int, default=S)
    p.add_argument("--gibbs-force", dest="gibbs_force", type=_flag, default=S)
    p.add_argument("--advi-samples", dest="advi_samples", type=int, default=S)
    p.add_argument("--advi-max-iter", dest="advi_max_iter", type=int, default=S)
    p.add_argument("--advi-draws", dest="advi_draws", type=int, default=S)
    p.add_argument("--lasso-folds", dest="lasso_folds", type=int, default=S)
    p.add_argument("--jobs", type=int, default=S)
    p.add_argument("--timings", type=_flag, default=S, help="record wall-clock times (breaks byte determinism)")

    p = sub.add_parser("fit", help="fit one backend to a dataset")
    common(p)
    hyper(p)
    p.add_argument("--data", default=S)
    p.add_argument("--model", default=S, help="model JSON with factors and formula")
    p.add_argument("--method", choices=FIT_METHODS, default=S)
    p.add_argument("--criteria", type=_csv_list, default=S)
    p.add_argument("--tol", type=float, default=S)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    p.add_argument("--lam", type=float, default=S, help="lasso penalty; cross-validated when omitted")
    p.add_argument("--folds", type=int, default=S)
    p.add_argument("--chains", type=int, default=S)
    p.add_argument("--warmup", type=int, default=S)
    p.add_argument("--kept", type=int, default=S)
    p.add_argument("--force", type=_flag, default=S, help="summarize Gibbs draws even if R-hat >= 1.1")
    p.add_argument("--write-draws", dest="write_draws", type=_flag, default=S)
    p.add_argument("--advi-samples", dest="advi_samples", type=int, default=S)
    p.add_argument("--advi-mode", dest="advi_mode", choices=("meanfield", "fullrank"), default=S)
    p.add_argument("--advi-draws", dest="advi_draws", type=int, default=S)
    p.add_argument("--level", type=float, default=S)

    p = sub.add_parser("optimize", help="maximize overall desirability of a fitted model")
    common(p)
    p.add_argument("--coefficients", default=S, help="coefficients.json written by fit")
    p.add_argument("--data", default=S)
    p.add_argument("--model", default=S)
    p.add_argument("--method", choices=FIT_METHODS, default=S)
    p.add_argument("--use", choices=("estimate", "ci", "sn"), default=S, help="coefficient set to optimize")
    p.add_argument("--targets", type=_float_list, default=S, help="mean_lo,mean_hi,negvar_lo,negvar_hi")
    p.add_argument("--default-targets", dest="default_targets", type=_flag, default=S)
    p.add_argument("--resolution", type=float, default=S)
    p.add_argument("--polish", type=_flag, default=S)
    p.add_argument("--r", type=float, default=S)

    p = sub.add_parser("loocv", help="leave-one-out prediction error per method")
    common(p)
    hyper(p)
    p.add_argument("--data", default=S)
    p.add_argument("--model", default=S)
    p.add_argument("--methods", type=_csv_list, default=S)
    p.add_argument("--folds", type=int, default=S)
    p.add_argument("--chains", type=int, default=S)
    p.add_argument("--warmup", type=int, default=S)
    p.add_argument("--kept", type=int, default=S)
    p.add_argument("--force", type=_flag, default=S)
    p.add_argument("--advi-samples", dest="advi_samples", type=int, default=S)
    p.add_argument("--advi-draws", dest="advi_draws", type=int, default=S)
    return parser


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = {"command": command, **json.loads(json.dumps(DEFAULTS[command]))}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        doc = doc.get("config", doc)
        if doc.get("command", command) != command:
            raise ConfigError(f"config file is for command {doc['command']!r}, not {command!r}")
        unknown = sorted(set(doc) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown config field(s) for {command}: {', '.join(unknown)}")
        cfg.update(doc)
    skip = {"config", "outdir", "command"}
    cfg.update({k: v for k, v in vars(args).items() if k not in skip})
    _validate(cfg)
    return cfg


def _need(cfg, key, ok, what):
    if not ok:
        raise ConfigError(f"{key}: {what} (got {cfg[key]!r})")


def _validate(cfg: dict) -> None:
    cmd = cfg["command"]
    if "seed" in cfg:
        _need(cfg, "seed", isinstance(cfg["seed"], int) and cfg["seed"] >= 0, "must be a non-negative integer")
    for name in _HYPER:
        if name in cfg:
            _need(cfg, name, isinstance(cfg[name], (int, float)) and cfg[name] > 0, "must be positive")
    if cmd == "simulate":
        _need(cfg, "reps", isinstance(cfg["reps"], int) and cfg["reps"] >= 1, "must be at least 1")
        _need(cfg, "n", isinstance(cfg["n"], int) and cfg["n"] >= 2, "must be at least 2")
        _need(cfg, "methods", cfg["methods"] and set(cfg["methods"]) <= set(METHODS), f"must be drawn from {METHODS}")
        _need(cfg, "criteria", cfg["criteria"] and set(cfg["criteria"]) <= set(CRITERIA), f"must be drawn from {CRITERIA}")
        _need(cfg, "sigma", cfg["sigma"] >= 0, "must be non-negative")
        _need(cfg, "jobs", isinstance(cfg["jobs"], int) and cfg["jobs"] >= 1, "must be at least 1")
        for key in ("gibbs_chains", "gibbs_kept", "advi_samples", "advi_max_iter", "advi_draws", "lasso_folds"):
            _need(cfg, key, isinstance(cfg[key], int) and cfg[key] >= 1, "must be a positive integer")
    if cmd in ("fit", "loocv"):
        _need(cfg, "data", cfg["data"] is not None, "a dataset CSV is required")
    if cmd == "fit":
        _need(cfg, "method", cfg["method"] in FIT_METHODS, f"must be one of {FIT_METHODS}")
        _need(cfg, "criteria", set(cfg["criteria"]) <= set(CRITERIA), f"must be drawn from {CRITERIA}")
        if cfg["criteria"] and cfg["method"] in ("ols", "lasso"):
            raise ConfigError("criteria: CI/SN selection needs a Bayesian method (cavi, advi, gibbs)")
        _need(cfg, "level", 0 < cfg["level"] < 1, "must lie in (0, 1)")
        if cfg["lam"] is not None:
            _need(cfg, "lam", cfg["lam"] >= 0, "must be non-negative")
    if cmd == "loocv":
        _need(cfg, "methods", cfg["methods"] and set(cfg["methods"]) <= set(FIT_METHODS), f"must be drawn from {FIT_METHODS}")
    if cmd == "optimize":
        if cfg["coefficients"] is None and cfg["data"] is None:
            raise ConfigError("coefficients: give a coefficients.json or a dataset with a method")
        _need(cfg, "resolution", 0 < cfg["resolution"] <= 0.5, "must lie in (0, 0.5]")
        _need(cfg, "r", cfg["r"] > 0, "must be positive")
        if cfg["targets"] is None and not cfg["default_targets"]:
            raise ConfigError("targets: required when default targets are disabled")
        if cfg["targets"] is not None:
            _need(cfg, "targets", len(cfg["targets"]) == 4, "needs mean_lo,mean_hi,negvar_lo,negvar_hi")


def _outdir(args) -> Path:
    out = Path(args.outdir or os.environ.get(ENV_OUTDIR) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _versions() -> dict:
    return {
        "mixlasso": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
        "numba": numba.__version__, "python": platform.python_version(),
    }


def _hyper(cfg) -> Hyperparams:
    return Hyperparams(*(float(cfg[k]) for k in _HYPER))


def _load_design(cfg):
    spec, formula = (simulation_factor_spec(), ModelFormula.simulation()) if cfg["model"] is None else load_model_config(cfg["model"])
    data = Dataset.from_csv(cfg["data"])
    return build_design_matrix(data, spec, formula), spec, formula


# --- simulate ---------------------------------------------------------------


def cmd_simulate(cfg: dict, outdir: Path) -> list[Path]:
    study = StudyConfig(
        n_replications=cfg["reps"], n_obs=cfg["n"], methods=tuple(cfg["methods"]), criteria=tuple(cfg["criteria"]),
        seed=cfg["seed"], hyper=_hyper(cfg), cavi_tol=cfg["cavi_tol"], gibbs_chains=cfg["gibbs_chains"],
        gibbs_warmup=cfg["gibbs_warmup"], gibbs_kept=cfg["gibbs_kept"], gibbs_force=cfg["gibbs_force"],
        advi_samples=cfg["advi_samples"], advi_max_iter=cfg["advi_max_iter"], advi_draws=cfg["advi_draws"],
        lasso_folds=cfg["lasso_folds"], sigma=cfg["sigma"], n_jobs=cfg["jobs"],
    )
    report = run_study(study)
    metadata = {"seed": cfg["seed"], "versions": _versions(), "open_questions": list(OPEN_QUESTIONS)}
    csv_path, json_path = outdir / "study_report.csv", outdir / "study_report.json"
    formats.write_study_csv(csv_path, report, cfg)
    formats.write_json(json_path, formats.study_document(report, cfg, metadata, timings=cfg["timings"]))
    return [csv_path, json_path]


# --- fit --------------------------------------------------------------------


def fit_design(design, cfg: dict, outdir: Path | None = None) -> dict:
    """Run one backend; returns the coefficients document (without config)."""
    method = cfg["method"]
    seed = cfg["seed"]
    labels = [str(lab) for lab in design.labels]
    diagnostics: dict = {}
    summary = None
    if method == "ols":
        fit = fit_ols(design)
        estimate = fit.beta
        cov = fit.sigma2_hat * np.linalg.inv(design.X.T @ design.X)
        columns = {"estimate": estimate, "sd": np.sqrt(np.clip(np.diag(cov), 0.0, None))}
        sigma2 = fit.sigma2_hat
        diagnostics = {"rss": fit.rss, "sigma2_hat": fit.sigma2_hat, "df_resid": design.n - design.p}
    elif method == "lasso":
        tol = cfg["tol"] or 1e-10
        if cfg["lam"] is None:
            lam, fit, curve = lasso_cv(design, k=cfg["folds"], seed=seed, tol=tol)
            diagnostics["cv_error"] = curve
        else:
            lam, fit = float(cfg["lam"]), fit_lasso(design, cfg["lam"], tol=tol)
        estimate = fit.beta
        kkt = kkt_residuals(design, estimate, lam)
        columns = {"estimate": estimate, "selected": estimate != 0.0, "kkt_residual": kkt}
        sigma2 = fit.objective - lam * np.abs(estimate).sum()
        sigma2 = sigma2 / max(design.n - len(fit.active_set), 1)
        diagnostics.update({"lam": lam, "objective": fit.objective, "sweeps": fit.n_sweeps, "max_kkt_residual": kkt.max()})
    elif method == "cavi":
        state = cavi_fit(design, _hyper(cfg), tol=cfg["tol"] or 1e-8, max_iter=cfg["max_iter"] or 10_000)
        summary = cavi_posterior_summary(state, cfg["level"])
        sigma2 = state.b_sigma / (state.a_sigma - 1.0)
        diagnostics = {
            "converged": state.converged, "iterations": state.n_iter, "elbo_trace": list(state.elbo_trace),
            "a_sigma": state.a_sigma, "b_sigma": state.b_sigma, "e_lambda": state.e_lambda,
        }
    elif method == "advi":
        target = BayesianLassoTarget(design, _hyper(cfg))
        rng = RngStream(seed)
        params, trace = advi_fit_target(
            target, S=cfg["advi_samples"], mode=cfg["advi_mode"], tol=cfg["tol"] or 1e-4,
            max_iter=cfg["max_iter"] or 10_000, rng=rng.split(0),
        )
        summary = advi_posterior_summary(params, target, cfg["advi_draws"], rng.split(1), level=cfg["level"])
        sigma2 = summary.sigma2_mean
        diagnostics = _advi_diagnostics(trace)
    elif method == "gibbs":
        gcfg = GibbsConfig(cfg["chains"], cfg["warmup"], cfg["kept"], seed=seed, hyper=_hyper(cfg))
        samples = gibbs_fit(design, gcfg)
        if cfg["chains"] >= 2:
            rhat = split_rhat(samples)
            diagnostics["rhat"] = rhat
            diagnostics["max_beta_rhat"] = max(v for k, v in rhat.items() if k.startswith("beta:"))
        diagnostics["mcse"] = dict(zip(labels, mc_standard_error(samples.beta)))
        summary = gibbs_posterior_summary(samples, force=cfg["force"], level=cfg["level"])
        sigma2 = summary.sigma2_mean
        if cfg.get("write_draws") and outdir is not None:
            diagnostics["draw_files"] = [Path(p).name for p in samples.write_csv(outdir / "gibbs_draws")]
    else:
        raise ConfigError(f"method: unknown {method!r}")
    selected_coefficients = {}
    if summary is not None:
        estimate = summary.mean
        columns = {
            "estimate": summary.mean, "sd": summary.sd, "interval_low": summary.interval_low,
            "interval_high": summary.interval_high, "sn_probability": summary.sn_probability,
        }
        for crit in cfg.get("criteria", []):
            rep = select_ci(summary) if crit == "ci" else select_sn(summary)
            columns[f"selected_{crit}"] = rep.included
            selected_coefficients[crit] = dict(zip(labels, rep.apply(estimate)))
    terms = [{"term": lab, **{k: v[j] for k, v in columns.items()}} for j, lab in enumerate(labels)]
    return {
        "method": method,
        "sigma2": sigma2,
        "terms": terms,
        "coefficients": dict(zip(labels, estimate)),
        "selected_coefficients": selected_coefficients,
        "diagnostics": diagnostics,
    }


def _advi_diagnostics(trace: AdviTrace) -> dict:
    return {"status": trace.status, "iterations": trace.n_iter, "elbo_trace": list(trace.elbo)}


def cmd_fit(cfg: dict, outdir: Path) -> list[Path]:
    design, spec, formula = _load_design(cfg)
    body = fit_design(design, cfg, outdir)
    doc = {
        "format": formats.COEFFICIENTS_FORMAT, "config": cfg, "factors": spec.to_dict(),
        "formula": formula.to_dict(), "n": design.n, **body,
    }
    json_path, csv_path = outdir / "coefficients.json", outdir / "coefficients.csv"
    formats.write_json(json_path, doc)
    formats.write_coefficients_csv(csv_path, cfg, formats.clean(doc))
    paths = [json_path, csv_path]
    paths += [outdir / name for name in body["diagnostics"].get("draw_files", [])]
    return paths


# --- optimize ---------------------------------------------------------------


def _optimize_model(cfg: dict) -> tuple[ResponseSurfaceModel, dict]:
    if cfg["coefficients"] is not None:
        doc = formats.read_json(cfg["coefficients"])
        if doc.get("format") != formats.COEFFICIENTS_FORMAT:
            raise ConfigError(f"coefficients: {cfg['coefficients']} is not a coefficients document")
        spec = FactorSpec.from_dict(doc["factors"])
        sigma2 = doc["sigma2"]
        source = {"coefficients": cfg["coefficients"], "method": doc["method"]}
    else:
        design, spec, _ = _load_design(cfg)
        fit_cfg = {**DEFAULTS["fit"], "method": cfg["method"], "seed": cfg["seed"], "data": cfg["data"], "model": cfg["model"]}
        if cfg["use"] != "estimate":
            fit_cfg["criteria"] = [cfg["use"]]
        doc = formats.clean(fit_design(design, fit_cfg))
        sigma2 = doc["sigma2"]
        source = {"data": cfg["data"], "method": cfg["method"]}
    if cfg["use"] == "estimate":
        values = doc["coefficients"]
    elif cfg["use"] in doc.get("selected_coefficients", {}):
        values = doc["selected_coefficients"][cfg["use"]]
    else:
        raise ConfigError(f"use: the coefficients document has no {cfg['use']!r} selection")
    if sigma2 is None or not sigma2 >= 0:
        raise ConfigError("sigma2: the fitted model has no usable residual variance")
    cov = None if cfg["noise_cov"] is None else np.asarray(cfg["noise_cov"], dtype=float)
    return ResponseSurfaceModel(CoefficientBlocks.from_json_dict(values), float(sigma2), spec, cov), source


def cmd_optimize(cfg: dict, outdir: Path) -> list[Path]:
    model, source = _optimize_model(cfg)
    ocfg = OptimizerConfig(resolution=cfg["resolution"], polish=cfg["polish"], r=cfg["r"])
    targets = None
    if cfg["targets"] is not None:
        t = cfg["targets"]
        targets = (DesirabilityTarget(t[0], t[1], cfg["r"]), DesirabilityTarget(t[2], t[3], cfg["r"]))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = optimize_desirability(model, targets, ocfg, seed=cfg["seed"])
    for w in caught:
        print(f"mixlasso: warning: {w.message}", file=sys.stderr)
    row = result.to_dict()
    doc = {
        "format": formats.OPTIMUM_FORMAT, "config": cfg, "source": source, "optimum": row,
        "targets": [{"response": name, "lower": t.lower, "upper": t.upper, "r": t.r}
                    for name, t in zip(("mean", "neg_variance"), result.targets)],
        "trace": result.trace,
    }
    json_path, csv_path = outdir / "optimum.json", outdir / "optimum.csv"
    formats.write_json(json_path, doc)
    formats.write_table(csv_path, cfg, list(row), [list(row.values())])
    return [json_path, csv_path]


# --- loocv ------------------------------------------------------------------


def cmd_loocv(cfg: dict, outdir: Path) -> list[Path]:
    design, _, _ = _load_design(cfg)
    rows = []
    for method in cfg["methods"]:
        fit_cfg = {**DEFAULTS["fit"], **{k: v for k, v in cfg.items() if k in DEFAULTS["fit"]}, "method": method}
        fit_cfg["criteria"] = []
        fit_cfg["advi_draws"] = cfg["advi_draws"]

        def fitter(d, fit_cfg=fit_cfg):
            return np.array([c for c in fit_design(d, fit_cfg)["coefficients"].values()])

        rows.append([method, loo_cv(fitter, design), design.n])
    csv_path, json_path = outdir / "loocv.csv", outdir / "loocv.json"
    formats.write_table(csv_path, cfg, ["method", "loo_rmse", "n"], rows)
    formats.write_json(json_path, {
        "format": formats.LOOCV_FORMAT, "config": cfg,
        "results": [{"method": m, "loo_rmse": v, "n": n} for m, v, n in rows],
    })
    return [csv_path, json_path]


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "optimize": cmd_optimize, "loocv": cmd_loocv}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        outdir = _outdir(args)
        paths = COMMANDS[args.command](cfg, outdir)
    except OSError as exc:
        print(f"mixlasso: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NUMERICAL_ERRORS as exc:
        print(f"mixlasso: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, TypeError) as exc:
        print(f"mixlasso: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
