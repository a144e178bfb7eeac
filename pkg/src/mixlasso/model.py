"""Mixture-process-noise model family: factor specs, term registry, design matrices.

The response model is

    Y = sum_i a_i x_i + sum_{i<j} a_ij x_i x_j + sum_{i,p} d_ip x_i w_p
        + sum_{i<j,p} d_ijp x_i x_j w_p + sum_{i,t} g_it x_i z_t
        + sum_{i<j,t} g_ijt x_i x_j z_t + sum_{i,p,t} e_ipt x_i w_p z_t
        + sum_{i<j,p,t} e_ijpt x_i x_j w_p z_t + eps

with mixture proportions x on a bounded simplex, process variables w and
zero-mean unit-variance noise variables z.  There is no intercept: it is
collinear with sum_i a_i x_i on the simplex.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

SUM_TOL = 1e-9
BLOCKS = ("alpha", "delta", "gamma", "eta")


class ModelError(ValueError):
    """Invalid model input: dimensions, constraints or formula."""


class SimplexViolation(ModelError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class ProcessVar:
    """A process variable ranging over [low, high], optionally restricted to levels."""

    low: float
    high: float
    levels: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.low <= self.high:
            raise ModelError(f"process bounds must satisfy low <= high, got {self.low}, {self.high}")
        if self.levels is not None:
            object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))

    @classmethod
    def from_levels(cls, levels: Sequence[float]) -> "ProcessVar":
        return cls(float(min(levels)), float(max(levels)), tuple(levels))


@dataclass(frozen=True)
class FactorSpec:
    mixture_bounds: tuple[tuple[float, float], ...]
    process: tuple[ProcessVar, ...] = ()
    n_noise: int = 0

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.mixture_bounds)
        object.__setattr__(self, "mixture_bounds", bounds)
        object.__setattr__(self, "process", tuple(self.process))
        if len(bounds) < 2:
            raise ModelError("a mixture needs at least two components")
        for i, (lo, hi) in enumerate(bounds, 1):
            if not (0.0 <= lo < hi <= 1.0):
                raise ModelError(f"mixture bound {i} must satisfy 0 <= l < u <= 1, got [{lo}, {hi}]")
        if sum(lo for lo, _ in bounds) > 1.0 + SUM_TOL or sum(hi for _, hi in bounds) < 1.0 - SUM_TOL:
            raise ModelError("mixture bounds leave an empty simplex slice")
        if self.n_noise < 0:
            raise ModelError("n_noise must be non-negative")

    @property
    def n_mixture(self) -> int:
        return len(self.mixture_bounds)

    @property
    def n_process(self) -> int:
        return len(self.process)

    @classmethod
    def unconstrained(cls, q: int, n_process: int = 0, n_noise: int = 0) -> "FactorSpec":
        return cls(((0.0, 1.0),) * q, (ProcessVar(-np.inf, np.inf),) * n_process, n_noise)

    def to_dict(self) -> dict:
        return {
            "mixture_bounds": [list(b) for b in self.mixture_bounds],
            "process": [
                {"low": p.low, "high": p.high, "levels": list(p.levels) if p.levels else None}
                for p in self.process
            ],
            "n_noise": self.n_noise,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FactorSpec":
        process = []
        for p in d.get("process", []):
            if p.get("levels"):
                process.append(ProcessVar(p.get("low", min(p["levels"])), p.get("high", max(p["levels"])), tuple(p["levels"])))
            else:
                low, high = p.get("low"), p.get("high")
                process.append(ProcessVar(-np.inf if low is None else low, np.inf if high is None else high))
        return cls(tuple(tuple(b) for b in d["mixture_bounds"]), tuple(process), int(d.get("n_noise", 0)))


def simulation_factor_spec() -> FactorSpec:
    """Three bounded components, one two-level process variable, two noise variables."""
    return FactorSpec(((0.2, 0.8), (0.15, 0.5), (0.05, 0.3)), (ProcessVar.from_levels((0.5, 1.0)),), 2)


@dataclass(frozen=True)
class ModelFormula:
    """Which term groups of the response model are present."""

    alpha: bool = True
    alpha_pairs: bool = False
    delta: bool = False
    delta_pairs: bool = False
    gamma: bool = False
    gamma_pairs: bool = False
    eta: bool = False
    eta_pairs: bool = False

    def __post_init__(self):
        if not self.alpha:
            raise ModelError("the linear mixture group must be enabled")

    @classmethod
    def full(cls) -> "ModelFormula":
        return cls(True, True, True, True, True, True, True, True)

    @classmethod
    def linear(cls) -> "ModelFormula":
        """Linear blending with process and noise interactions (18 terms for q=3, P=1, T=2)."""
        return cls(alpha=True, delta=True, gamma=True, eta=True)

    @classmethod
    def simulation(cls) -> "ModelFormula":
        """The 24-term model of the variable-selection study."""
        return cls(alpha=True, alpha_pairs=True, delta=True, delta_pairs=True, eta=True, eta_pairs=True)

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelFormula":
        return cls(**{k: bool(v) for k, v in d.items()})


def mixture_pairs(q: int) -> list[tuple[int, int]]:
    """Blend pairs (i, j), i < j, ordered by gap j - i and then by i.

    For q = 3 this gives (1,2), (2,3), (1,3), the row order of the published
    selection table.
    """
    return [(i, i + gap) for gap in range(1, q) for i in range(1, q - gap + 1)]


_LABEL_RE = re.compile(r"^(alpha|delta|gamma|eta)\[([0-9,\s]+)\]$")


@dataclass(frozen=True, order=True)
class TermLabel:
    """One model column: block tag plus 1-based factor indices.

    ``mix`` holds one index (i) or a blend pair (i, j); ``process`` and
    ``noise`` are None when the block does not involve them.
    """

    block: str
    mix: tuple[int, ...]
    process: int | None = None
    noise: int | None = None

    @property
    def indices(self) -> tuple[int, ...]:
        return self.mix + tuple(k for k in (self.process, self.noise) if k is not None)

    @property
    def is_blend(self) -> bool:
        return len(self.mix) == 2

    def __str__(self) -> str:
        return f"{self.block}[{','.join(map(str, self.indices))}]"

    @classmethod
    def parse(cls, text: str) -> "TermLabel":
        m = _LABEL_RE.match(text.strip())
        if not m:
            raise ModelError(f"cannot parse term label {text!r}")
        block = m.group(1)
        idx = tuple(int(s) for s in m.group(2).split(","))
        n_extra = {"alpha": 0, "delta": 1, "gamma": 1, "eta": 2}[block]
        n_mix = len(idx) - n_extra
        if n_mix not in (1, 2):
            raise ModelError(f"wrong number of indices in {text!r}")
        mix, rest = idx[:n_mix], idx[n_mix:]
        if block == "delta":
            return cls(block, mix, process=rest[0])
        if block == "gamma":
            return cls(block, mix, noise=rest[0])
        if block == "eta":
            return cls(block, mix, process=rest[0], noise=rest[1])
        return cls(block, mix)

    def xw_factor(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Product of the mixture and process factors (rows of x, w may be stacked)."""
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        out = x[..., self.mix[0] - 1]
        if self.is_blend:
            out = out * x[..., self.mix[1] - 1]
        if self.process is not None:
            out = out * w[..., self.process - 1]
        return out

    def column(self, x: np.ndarray, w: np.ndarray, z: np.ndarray) -> np.ndarray:
        out = self.xw_factor(x, w)
        if self.noise is not None:
            out = out * np.asarray(z, dtype=float)[..., self.noise - 1]
        return out


def term_labels(spec: FactorSpec, formula: ModelFormula) -> list[TermLabel]:
    """Enumerate model terms in block order; within a block the mixture index varies fastest."""
    q, P, T = spec.n_mixture, spec.n_process, spec.n_noise
    if P == 0 and (formula.delta or formula.delta_pairs or formula.eta or formula.eta_pairs):
        raise ModelError("formula uses process terms but the factor spec has no process variables")
    if T == 0 and (formula.gamma or formula.gamma_pairs or formula.eta or formula.eta_pairs):
        raise ModelError("formula uses noise terms but the factor spec has no noise variables")
    singles = [(i,) for i in range(1, q + 1)]
    pairs = mixture_pairs(q)
    labels: list[TermLabel] = []
    if formula.alpha:
        labels += [TermLabel("alpha", m) for m in singles]
    if formula.alpha_pairs:
        labels += [TermLabel("alpha", m) for m in pairs]
    for enabled, mixes in ((formula.delta, singles), (formula.delta_pairs, pairs)):
        if enabled:
            labels += [TermLabel("delta", m, process=p) for p in range(1, P + 1) for m in mixes]
    for enabled, mixes in ((formula.gamma, singles), (formula.gamma_pairs, pairs)):
        if enabled:
            labels += [TermLabel("gamma", m, noise=t) for t in range(1, T + 1) for m in mixes]
    for enabled, mixes in ((formula.eta, singles), (formula.eta_pairs, pairs)):
        if enabled:
            labels += [
                TermLabel("eta", m, process=p, noise=t)
                for t in range(1, T + 1)
                for p in range(1, P + 1)
                for m in mixes
            ]
    return labels


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rows of (x, w, z, y); mixture rows are renormalized when within SUM_TOL of one."""

    x: np.ndarray
    w: np.ndarray
    z: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        n = x.shape[0]
        w = np.asarray(self.w, dtype=float).reshape(n, -1)
        z = np.asarray(self.z, dtype=float).reshape(n, -1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if n == 0 and x.size == 0:
            raise ModelError("empty dataset")
        if y.shape[0] != n:
            raise ModelError(f"response has {y.shape[0]} rows, mixture block has {n}")
        sums = x.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
        if bad.size:
            raise SimplexViolation(int(bad[0]), f"mixture proportions sum to {float(sums[bad[0]])!r}, not 1")
        if np.any(x < -SUM_TOL):
            raise SimplexViolation(int(np.argwhere(x < -SUM_TOL)[0, 0]), "negative mixture proportion")
        # rows already within rounding of one are left alone so renormalizing is idempotent
        off = np.abs(sums - 1.0) > 16 * np.finfo(float).eps
        x = np.where(off[:, None], x / sums[:, None], x)
        for name, arr in (("x", x), ("w", w), ("z", z), ("y", y)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.x[rows], self.w[rows], self.z[rows], self.y[rows])

    def column_names(self) -> list[str]:
        q, P, T = self.x.shape[1], self.w.shape[1], self.z.shape[1]
        return [f"x{i}" for i in range(1, q + 1)] + [f"w{p}" for p in range(1, P + 1)] + [f"z{t}" for t in range(1, T + 1)] + ["y"]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.column_names())
            for row in np.column_stack([self.x, self.w, self.z, self.y]):
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        """Read a dataset with header x1..xq, w1..wP, z1..zT, y (any column order)."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise ModelError(f"{path}: empty file") from None
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(header):
                    raise ModelError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
                try:
                    rows.append([float(c) for c in row])
                except ValueError as exc:
                    raise ModelError(f"{path}:{lineno}: {exc}") from None
        if "y" not in header:
            raise ModelError(f"{path}: missing 'y' column")
        data = np.array(rows, dtype=float).reshape(len(rows), len(header))

        def block(prefix):
            names = sorted((h for h in header if re.fullmatch(prefix + r"\d+", h)), key=lambda h: int(h[1:]))
            expected = [f"{prefix}{k}" for k in range(1, len(names) + 1)]
            if names != expected:
                raise ModelError(f"{path}: columns {names} are not numbered {prefix}1..{prefix}{len(names)}")
            return data[:, [header.index(h) for h in names]]

        if not rows:
            raise ModelError(f"{path}: empty dataset")
        return cls(block("x"), block("w"), block("z"), data[:, header.index("y")])


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    X: np.ndarray
    labels: tuple[TermLabel, ...]
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[1] != len(self.labels) or X.shape[0] != y.shape[0]:
            raise ModelError(f"design shape {X.shape} inconsistent with {len(self.labels)} labels / {y.shape[0]} responses")
        if len(set(self.labels)) != len(self.labels):
            raise ModelError("duplicate term labels")
        if not np.all(np.isfinite(X)):
            raise ModelError("design matrix has non-finite entries")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "DesignMatrix":
        return DesignMatrix(self.X[rows], self.labels, self.y[rows])

    def column_norms(self) -> np.ndarray:
        norms = np.linalg.norm(self.X, axis=0)
        return np.where(norms > 0, norms, 1.0)

    def scaled(self) -> tuple["DesignMatrix", np.ndarray]:
        """Unit-norm columns; divide fitted coefficients by the returned norms to undo."""
        norms = self.column_norms()
        return DesignMatrix(self.X / norms, self.labels, self.y), norms


def check_mixture(x: np.ndarray, spec: FactorSpec) -> list[str]:
    out = []
    total = float(np.sum(x))
    if abs(total - 1.0) > SUM_TOL:
        out.append(f"sum-to-one: proportions sum to {total:.12g}")
    for i, ((lo, hi), xi) in enumerate(zip(spec.mixture_bounds, x), 1):
        if xi < lo - SUM_TOL:
            out.append(f"x{i} lower bound: {xi:.12g} < {lo:g}")
        if xi > hi + SUM_TOL:
            out.append(f"x{i} upper bound: {xi:.12g} > {hi:g}")
    return out


def validate_point(x, w, spec: FactorSpec, strict_levels: bool = False) -> list[str]:
    """Return every violated constraint at (x, w); an empty list means feasible.

    Process variables are checked against [low, high]; with ``strict_levels``
    a variable that declares levels must sit on one of them.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    if x.size != spec.n_mixture or w.size != spec.n_process:
        raise ModelError(f"point dimensions ({x.size}, {w.size}) do not match spec ({spec.n_mixture}, {spec.n_process})")
    violations = check_mixture(x, spec)
    for p, (var, wp) in enumerate(zip(spec.process, w), 1):
        if wp < var.low - SUM_TOL or wp > var.high + SUM_TOL:
            violations.append(f"w{p} bounds: {wp:.12g} outside [{var.low:g}, {var.high:g}]")
        elif strict_levels and var.levels and not np.any(np.isclose(wp, var.levels, rtol=0, atol=SUM_TOL)):
            violations.append(f"w{p} levels: {wp:.12g} not in {var.levels}")
    return violations


def build_design_matrix(dataset: Dataset, spec: FactorSpec, formula: ModelFormula) -> DesignMatrix:
    """Expand raw factor settings into the model's regression columns."""
    if dataset.n == 0:
        raise ModelError("empty dataset")
    dims = (dataset.x.shape[1], dataset.w.shape[1], dataset.z.shape[1])
    if dims != (spec.n_mixture, spec.n_process, spec.n_noise):
        raise ModelError(f"dataset dimensions (q, P, T) = {dims} do not match spec {(spec.n_mixture, spec.n_process, spec.n_noise)}")
    for r in range(dataset.n):
        bad = check_mixture(dataset.x[r], spec)
        if bad:
            raise SimplexViolation(r, "; ".join(bad))
    labels = term_labels(spec, formula)
    X = np.column_stack([lab.column(dataset.x, dataset.w, dataset.z) for lab in labels])
    return DesignMatrix(X, tuple(labels), dataset.y)


@dataclass(frozen=True)
class CoefficientBlocks:
    """Coefficient values keyed by term label; absent terms read as exact zeros."""

    values: Mapping[TermLabel, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", {k: float(v) for k, v in self.values.items()})

    @classmethod
    def from_vector(cls, labels: Iterable[TermLabel], beta) -> "CoefficientBlocks":
        labels = list(labels)
        beta = np.asarray(beta, dtype=float).reshape(-1)
        if beta.size != len(labels):
            raise ModelError(f"{beta.size} coefficients for {len(labels)} labels")
        return cls(dict(zip(labels, beta)))

    def to_vector(self, labels: Iterable[TermLabel]) -> np.ndarray:
        return np.array([self.values.get(lab, 0.0) for lab in labels], dtype=float)

    def __getitem__(self, label) -> float:
        if isinstance(label, str):
            label = TermLabel.parse(label)
        return self.values.get(label, 0.0)

    @property
    def labels(self) -> list[TermLabel]:
        return list(self.values)

    def block(self, name: str) -> dict[TermLabel, float]:
        return {k: v for k, v in self.values.items() if k.block == name}

    def to_json_dict(self) -> dict[str, float]:
        return {str(k): v for k, v in self.values.items()}

    @classmethod
    def from_json_dict(cls, d: Mapping[str, float]) -> "CoefficientBlocks":
        return cls({TermLabel.parse(k): float(v) for k, v in d.items()})


def load_model_config(path) -> tuple[FactorSpec, ModelFormula]:
    """Read ``{"factors": {...}, "formula": {...}}`` (see FORMATS.md)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return FactorSpec.from_dict(doc["factors"]), ModelFormula.from_dict(doc.get("formula", {"alpha": True}))
