"""Bayesian lasso selection and robust optimization for mixture-process-noise experiments."""

from .cavi import CaviState, Hyperparams, cavi_fit, cavi_posterior_summary
from .distributions import GigParams, RngStream
from .freq import fit_lasso, fit_ols, lasso_cv
from .gibbs import GibbsConfig, gibbs_fit, gibbs_posterior_summary, split_rhat
from .model import (
    CoefficientBlocks,
    Dataset,
    DesignMatrix,
    FactorSpec,
    ModelFormula,
    ProcessVar,
    TermLabel,
    build_design_matrix,
    term_labels,
)
from .selection import PosteriorSummary, bai, confusion, loo_cv, select_ci, select_sn

__version__ = "0.1.0"

__all__ = [
    "CaviState",
    "CoefficientBlocks",
    "Dataset",
    "DesignMatrix",
    "FactorSpec",
    "GibbsConfig",
    "GigParams",
    "Hyperparams",
    "ModelFormula",
    "PosteriorSummary",
    "ProcessVar",
    "RngStream",
    "TermLabel",
    "bai",
    "build_design_matrix",
    "cavi_fit",
    "cavi_posterior_summary",
    "confusion",
    "fit_lasso",
    "fit_ols",
    "gibbs_fit",
    "gibbs_posterior_summary",
    "lasso_cv",
    "loo_cv",
    "select_ci",
    "select_sn",
    "split_rhat",
    "term_labels",
]
