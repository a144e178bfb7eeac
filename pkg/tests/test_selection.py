import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_design, sim_design
from mixlasso.cavi import cavi_fit
from mixlasso.freq import fit_ols
from mixlasso.model import DesignMatrix, TermLabel
from mixlasso.selection import (
    ConfusionCounts,
    LooError,
    PosteriorSummary,
    SelectionReport,
    bai,
    confusion,
    loo_cv,
    loo_predictions,
    select_ci,
    select_nonzero,
    select_sn,
)
from mixlasso.simulation import SimTruth


def _labels(p):
    return tuple(TermLabel("alpha", (j + 1,)) for j in range(p))


def _summary(low, high, sn=None):
    low, high = np.asarray(low, float), np.asarray(high, float)
    sn = np.full(low.size, 0.3) if sn is None else np.asarray(sn, float)
    return PosteriorSummary(_labels(low.size), (low + high) / 2, np.ones(low.size), low, high, sn, "CAVI")


def test_ci_rule_examples():
    rep = select_ci(_summary([1.2, -0.5, 0.0, -2.0], [3.4, 0.5, 2.0, 0.0]))
    assert rep.included.tolist() == [True, False, False, False]
    assert rep.criterion == "CI"


def test_sn_rule_examples():
    rep = select_sn(_summary(np.zeros(3), np.ones(3), [0.9, 0.1, 0.5]))
    assert rep.included.tolist() == [False, True, True]
    assert rep.threshold == 0.5


def test_sn_threshold_range():
    with pytest.raises(ValueError):
        select_sn(_summary([0.0], [1.0]), threshold=1.0)


def test_summary_validation():
    with pytest.raises(ValueError, match="interval_low"):
        _summary([1.0], [0.0])
    with pytest.raises(ValueError, match="sn_probability"):
        _summary([0.0], [1.0], [1.5])
    with pytest.raises(ValueError, match="entries"):
        PosteriorSummary(_labels(2), np.zeros(3), np.ones(2), np.zeros(2), np.ones(2), np.zeros(2), "Gibbs")


def test_mean_may_sit_outside_interval():
    s = PosteriorSummary(_labels(1), [5.0], [1.0], [0.0], [1.0], [0.2], "ADVI")
    assert s.mean[0] == 5.0


def test_report_alignment():
    with pytest.raises(ValueError, match="registry"):
        SelectionReport(_labels(2), [True], "CI")


def test_apply_zeroes_excluded_terms_without_refit():
    rep = SelectionReport(_labels(3), [True, False, True], "SN")
    np.testing.assert_array_equal(rep.apply([1.5, 2.0, -0.3]), [1.5, 0.0, -0.3])


@given(
    st.lists(st.tuples(st.floats(-5, 5), st.floats(0, 5), st.floats(0, 3)), min_size=1, max_size=12),
)
@settings(max_examples=100, deadline=None)
def test_ci_monotone_under_widening(rows):
    low = np.array([c - w for c, w, _ in rows])
    high = np.array([c + w for c, w, _ in rows])
    grow = np.array([g for *_, g in rows])
    base = select_ci(_summary(low, high)).included
    wide = select_ci(_summary(low - grow, high + grow)).included
    assert not np.any(wide & ~base)


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=12))
@settings(max_examples=100, deadline=None)
def test_sn_monotone_under_raising(rows):
    sn = np.array([a for a, _ in rows])
    raised = np.minimum(1.0, sn + np.array([b for _, b in rows]))
    z = np.zeros(sn.size)
    base = select_sn(_summary(z, z + 1, sn)).included
    more = select_sn(_summary(z, z + 1, raised)).included
    assert not np.any(more & ~base)


def test_confusion_on_simulation_truth():
    truth = SimTruth()
    mask = truth.nonzero
    assert mask.sum() == 12 and (~mask).sum() == 12
    labels = tuple(truth.labels)
    perfect = confusion(SelectionReport(labels, mask, "CI"), mask, labels)
    assert perfect == ConfusionCounts(12, 0, 0, 12)
    assert bai(perfect) == 1.0
    everything = confusion(SelectionReport(labels, np.ones(24, bool), "CI"), mask)
    assert (everything.fp, everything.fn) == (12, 0)
    nothing = confusion(SelectionReport(labels, np.zeros(24, bool), "CI"), mask)
    assert (nothing.fn, nothing.tn) == (12, 12)


def test_confusion_registry_mismatch():
    rep = SelectionReport(_labels(3), [True, False, True], "CI")
    with pytest.raises(ValueError):
        confusion(rep, [True, False])
    with pytest.raises(ValueError, match="registries"):
        confusion(rep, [True, False, True], _labels(2) + (TermLabel("beta", (1,)),))


@given(st.lists(st.booleans(), min_size=1, max_size=30), st.lists(st.booleans(), min_size=1, max_size=30))
@settings(max_examples=100)
def test_confusion_counts_sum_to_p(sel, truth):
    k = min(len(sel), len(truth))
    c = confusion(SelectionReport(_labels(k), sel[:k], "CI"), truth[:k])
    assert c.total == k
    assert min(c.tp, c.fp, c.fn, c.tn) >= 0


def test_bai_examples():
    assert bai(ConfusionCounts(tp=9, fp=2, fn=1, tn=8)) == pytest.approx(0.85, abs=1e-15)
    assert bai(ConfusionCounts(12, 0, 0, 12)) == 1.0


def test_bai_degenerate_classes():
    with pytest.raises(ValueError, match="non-zero"):
        bai(ConfusionCounts(0, 1, 0, 3))
    with pytest.raises(ValueError, match="zero terms"):
        bai(ConfusionCounts(2, 0, 1, 0))


@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20), st.integers(0, 20))
def test_bai_symmetry_and_range(tp, fp, fn, tn):
    if tp + fn == 0 or tn + fp == 0:
        return
    c = ConfusionCounts(tp, fp, fn, tn)
    assert 0.0 <= bai(c) <= 1.0
    assert bai(c) == pytest.approx(bai(ConfusionCounts(tn, fn, fp, tp)), abs=1e-15)


def test_select_nonzero():
    rep = select_nonzero(_labels(3), [0.0, -1e-300, 2.0])
    assert rep.included.tolist() == [False, True, True]


def _ols(design):
    return fit_ols(design).beta


def test_loo_noise_free_ols_is_zero():
    design, _ = random_design(15, 3, seed=1, noise=0.0)
    assert loo_cv(_ols, design) < 1e-8


def test_loo_micro_instance_by_hand():
    x = np.array([1.0, 2.0, 4.0])
    y = np.array([1.0, 3.0, 2.0])
    design = DesignMatrix(x[:, None], _labels(1), y)
    errs = []
    for i in range(3):
        keep = [k for k in range(3) if k != i]
        b = sum(x[k] * y[k] for k in keep) / sum(x[k] ** 2 for k in keep)
        errs.append(y[i] - b * x[i])
    expect = np.sqrt(sum(e * e for e in errs) / 3)
    assert loo_cv(_ols, design) == pytest.approx(expect, rel=1e-13)


def test_loo_constant_fitter_formula():
    # predicting with the mean of the other rows: e_i = n / (n - 1) * (y_i - ybar)
    rng = np.random.default_rng(2)
    y = rng.normal(size=12)
    design = DesignMatrix(np.ones((12, 1)), _labels(1), y)
    fitter = lambda d: np.array([d.y.mean()])
    n = y.size
    expect = n / (n - 1) * np.sqrt(np.mean((y - y.mean()) ** 2))
    assert loo_cv(fitter, design) == pytest.approx(expect, rel=1e-13)


def test_loo_failure_names_row():
    design, _ = random_design(6, 2, seed=3)

    def fragile(d):
        if not np.any(d.y == design.y[4]):
            raise RuntimeError("boom")
        return np.zeros(2)

    with pytest.raises(LooError, match="row 4") as info:
        loo_predictions(fragile, design)
    assert info.value.row == 4


def test_loo_needs_two_rows():
    design, _ = random_design(1, 1, seed=4)
    with pytest.raises(ValueError):
        loo_cv(_ols, design)


@pytest.mark.slow
def test_cavi_loo_beats_ols_loo():
    wins = 0
    for r in range(50):
        design, _ = sim_design(seed=2000 + r)
        wins += loo_cv(lambda d: cavi_fit(d).m, design) <= loo_cv(_ols, design)
    assert wins >= 40
