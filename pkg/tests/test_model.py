import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixlasso.model import (
    CoefficientBlocks,
    Dataset,
    FactorSpec,
    ModelError,
    ModelFormula,
    ProcessVar,
    SimplexViolation,
    TermLabel,
    build_design_matrix,
    load_model_config,
    simulation_factor_spec,
    term_labels,
    validate_point,
)

SOAP = simulation_factor_spec()

TABLE_ORDER = [
    "alpha[1]", "alpha[2]", "alpha[3]", "alpha[1,2]", "alpha[2,3]", "alpha[1,3]",
    "delta[1,1]", "delta[2,1]", "delta[3,1]", "delta[1,2,1]", "delta[2,3,1]", "delta[1,3,1]",
    "eta[1,1,1]", "eta[2,1,1]", "eta[3,1,1]", "eta[1,1,2]", "eta[2,1,2]", "eta[3,1,2]",
    "eta[1,2,1,1]", "eta[2,3,1,1]", "eta[1,3,1,1]", "eta[1,2,1,2]", "eta[2,3,1,2]", "eta[1,3,1,2]",
]


def mixtures(q=3):
    return st.lists(st.floats(0.01, 1.0), min_size=q, max_size=q).map(lambda v: np.array(v) / np.sum(v))


def test_study_registry_matches_table_order():
    labels = term_labels(SOAP, ModelFormula.simulation())
    assert [str(lab) for lab in labels] == TABLE_ORDER


def test_term_counts():
    assert len(term_labels(SOAP, ModelFormula.linear())) == 18
    assert len(term_labels(SOAP, ModelFormula.full())) == 36
    assert len(term_labels(FactorSpec.unconstrained(4), ModelFormula(alpha_pairs=True))) == 10


def test_vertex_row_full_formula():
    spec = FactorSpec.unconstrained(3, 1, 2)
    data = Dataset([[1.0, 0.0, 0.0]], [[1.0]], [[0.0, 0.0]], [0.0])
    d = build_design_matrix(data, spec, ModelFormula.full())
    nonzero = {str(lab) for lab, v in zip(d.labels, d.X[0]) if v != 0}
    assert nonzero == {"alpha[1]", "delta[1,1]"}
    assert d.X[0][[str(lab) for lab in d.labels].index("alpha[1]")] == 1.0


def test_linear_two_component_row():
    spec = FactorSpec.unconstrained(2)
    d = build_design_matrix(Dataset([[0.4, 0.6]], np.zeros((1, 0)), np.zeros((1, 0)), [1.0]), spec, ModelFormula())
    np.testing.assert_array_equal(d.X, [[0.4, 0.6]])


def test_validate_point_examples():
    assert validate_point([0.45, 0.50, 0.05], [0.9], SOAP) == []
    bad = validate_point([0.5, 0.5, 0.1], [1.0], SOAP)
    assert any(v.startswith("sum-to-one") for v in bad)
    bad = validate_point([0.9, 0.05, 0.05], [1.0], SOAP)
    assert any(v.startswith("x1 upper") for v in bad)


def test_validate_point_process():
    assert validate_point([0.45, 0.50, 0.05], [1.2], SOAP)
    assert validate_point([0.45, 0.50, 0.05], [0.7], SOAP, strict_levels=True)
    assert not validate_point([0.45, 0.50, 0.05], [0.5], SOAP, strict_levels=True)


@pytest.mark.parametrize(
    "bounds",
    [((0.0, 1.0),), ((0.5, 0.4), (0.0, 1.0)), ((0.6, 1.0), (0.6, 1.0)), ((0.0, 0.3), (0.0, 0.3))],
)
def test_factor_spec_invariants(bounds):
    with pytest.raises(ModelError):
        FactorSpec(bounds)


def test_formula_requires_linear_group():
    with pytest.raises(ModelError):
        ModelFormula(alpha=False)


def test_formula_spec_consistency():
    with pytest.raises(ModelError, match="process"):
        term_labels(FactorSpec.unconstrained(3), ModelFormula(delta=True))
    with pytest.raises(ModelError, match="noise"):
        term_labels(FactorSpec.unconstrained(3, 1), ModelFormula(gamma=True))


def test_dataset_sum_violation_names_row():
    with pytest.raises(SimplexViolation) as err:
        Dataset([[0.5, 0.5], [0.3, 0.6]], np.zeros((2, 0)), np.zeros((2, 0)), [1.0, 2.0])
    assert err.value.row == 1


def test_dataset_renormalizes_within_tolerance():
    d = Dataset([[0.5 + 4e-10, 0.5]], np.zeros((1, 0)), np.zeros((1, 0)), [1.0])
    assert d.x.sum() == pytest.approx(1.0, abs=1e-15)
    assert not d.x.flags.writeable


def test_build_rejects_out_of_bounds_row():
    x = [[0.45, 0.5, 0.05], [0.9, 0.05, 0.05]]
    data = Dataset(x, [[1.0], [1.0]], np.zeros((2, 2)), [0.0, 0.0])
    with pytest.raises(SimplexViolation) as err:
        build_design_matrix(data, SOAP, ModelFormula.simulation())
    assert err.value.row == 1


def test_build_dimension_mismatch():
    data = Dataset([[0.45, 0.5, 0.05]], [[1.0]], np.zeros((1, 1)), [0.0])
    with pytest.raises(ModelError, match="dimensions"):
        build_design_matrix(data, SOAP, ModelFormula.simulation())


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    x = rng.dirichlet([1, 1, 1], 5)
    data = Dataset(x, rng.normal(size=(5, 1)), rng.normal(size=(5, 2)), rng.normal(size=5))
    path = tmp_path / "d.csv"
    data.to_csv(path)
    back = Dataset.from_csv(path)
    for name in "xwzy":
        np.testing.assert_array_equal(getattr(back, name), getattr(data, name))


def test_csv_any_column_order(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("y,x2,w1,x1\n3.0,0.25,1.0,0.75\n")
    d = Dataset.from_csv(path)
    np.testing.assert_array_equal(d.x, [[0.75, 0.25]])
    assert d.z.shape == (1, 0)


def test_csv_parse_error_reports_line(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x1,x2,y\n0.5,0.5,1\n0.5,abc,2\n")
    with pytest.raises(ModelError, match=":3:"):
        Dataset.from_csv(path)


def test_model_config_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(
        '{"factors": {"mixture_bounds": [[0.2, 0.8], [0.15, 0.5], [0.05, 0.3]],'
        ' "process": [{"levels": [0.5, 1.0]}], "n_noise": 2},'
        ' "formula": {"alpha": true, "delta": true, "gamma": true, "eta": true}}'
    )
    spec, formula = load_model_config(path)
    assert spec == SOAP
    assert len(term_labels(spec, formula)) == 18


@given(st.sampled_from(TABLE_ORDER))
def test_label_parse_round_trip(text):
    assert str(TermLabel.parse(text)) == text


@settings(max_examples=50, deadline=None)
@given(st.lists(mixtures(), min_size=2, max_size=8), st.randoms(use_true_random=False))
def test_rows_permute_with_dataset(xs, rnd):
    n = len(xs)
    rng = np.random.default_rng(rnd.randint(0, 2**32 - 1))
    spec = FactorSpec.unconstrained(3, 1, 2)
    data = Dataset(np.array(xs), rng.normal(size=(n, 1)), rng.normal(size=(n, 2)), rng.normal(size=n))
    perm = rng.permutation(n)
    full = build_design_matrix(data, spec, ModelFormula.full())
    permuted = build_design_matrix(data.subset(perm), spec, ModelFormula.full())
    np.testing.assert_array_equal(permuted.X, full.X[perm])


@settings(max_examples=50, deadline=None)
@given(mixtures(), st.floats(-2, 2), st.floats(-3, 3), st.floats(-3, 3))
def test_eta_columns_are_products(x, w, z1, z2):
    spec = FactorSpec.unconstrained(3, 1, 2)
    d = build_design_matrix(Dataset([x], [[w]], [[z1, z2]], [0.0]), spec, ModelFormula.full())
    z = (z1, z2)
    for lab, v in zip(d.labels, d.X[0]):
        if lab.block == "eta":
            expected = np.prod([x[i - 1] for i in lab.mix]) * w * z[lab.noise - 1]
            assert v == pytest.approx(expected, rel=1e-12, abs=1e-300)


@given(st.lists(st.floats(-1e6, 1e6), min_size=24, max_size=24))
def test_coefficient_vector_round_trip(values):
    labels = term_labels(SOAP, ModelFormula.simulation())
    blocks = CoefficientBlocks.from_vector(labels, values)
    np.testing.assert_array_equal(blocks.to_vector(labels), values)
    assert CoefficientBlocks.from_json_dict(blocks.to_json_dict()) == blocks


def test_missing_terms_read_as_zero():
    labels = term_labels(SOAP, ModelFormula.simulation())
    blocks = CoefficientBlocks({labels[0]: 2.0})
    vec = blocks.to_vector(labels)
    assert vec[0] == 2.0 and np.all(vec[1:] == 0.0)
    assert blocks["eta[1,1,1]"] == 0.0


def test_process_var_levels():
    var = ProcessVar.from_levels((1.0, 0.5))
    assert (var.low, var.high) == (0.5, 1.0)
    with pytest.raises(ModelError):
        ProcessVar(1.0, 0.0)
