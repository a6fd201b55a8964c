import numpy as np
import pytest

from ecsdbn.exceptions import FormatError, ParameterError
from ecsdbn.keel import (BUILTIN_DATASETS, apply_minmax, builtin_catalog, builtin_path, load_builtin,
                         minmax_normalize, parse_catalog, parse_keel, serialize_keel,
                         stratified_kfold)
from ecsdbn.metrics import imbalance_ratio

MINI = """@relation mini
% a comment
@attribute Size real [0.5, 9.0]
@attribute Colour {red, green, blue}
@attribute Count integer [0, 10]
@attribute Class {negative, positive}
@inputs Size, Colour, Count
@outputs Class
@data
1.5, red, 3, negative
2.0, blue, 7, positive
9.0, green, 0, negative
"""

# name: (attributes, imbalance ratio, ratio tolerance, train size, test size)
TABLE = {
    "abalone9-18": (8, 16.40, 0.01, 585, 146),
    "ecoli3": (7, 8.6, 0.05, 269, 67),
    "glass0": (9, 2.06, 0.01, 171, 43),
    "haberman": (3, 2.78, 0.01, 245, 61),
    "iris0": (4, 2.0, 0.01, 120, 30),
    "new-thyroid1": (5, 5.14, 0.01, 172, 43),
}


def test_minimal_fixture():
    ds = parse_keel(MINI)
    assert ds.name == "mini"
    assert ds.n_attributes == 3 and ds.n_samples == 3
    assert ds.class_names == ("negative", "positive")
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.raw_features.tolist() == [[1.5, 1, 0, 0, 3], [2.0, 0, 0, 1, 7], [9.0, 0, 1, 0, 0]]
    assert ds.minority_class == 1


def test_keywords_are_case_insensitive_and_io_optional():
    text = MINI.replace("@inputs Size, Colour, Count\n@outputs Class\n", "")
    text = text.replace("@data", "@DATA").replace("@attribute Size", "@ATTRIBUTE Size")
    assert parse_keel(text) == parse_keel(MINI)


def test_arity_error_reports_line():
    bad = MINI.replace("2.0, blue, 7, positive", "2.0, blue, positive")
    with pytest.raises(FormatError, match="line 11"):
        parse_keel(bad)


@pytest.mark.parametrize("mutate", [
    lambda t: t.replace("@data\n", ""),
    lambda t: t.replace("blue, 7", "purple, 7"),
    lambda t: t.replace("9.0, green", "nine, green"),
    lambda t: t.replace("0, negative", "0, neutral"),
])
def test_malformed_files(mutate):
    with pytest.raises(FormatError):
        parse_keel(mutate(MINI))


def test_round_trip_is_exact():
    for text in [MINI] + [open(builtin_path(n)).read()
                          for n in BUILTIN_DATASETS]:
        first = parse_keel(text)
        second = parse_keel(serialize_keel(first))
        assert first == second
        assert serialize_keel(second) == serialize_keel(first)


@pytest.mark.parametrize("name", sorted(TABLE))
def test_bundled_datasets_match_reference_table(name):
    n_attr, ir, tol, n_train, n_test = TABLE[name]
    ds = load_builtin(name)
    assert ds.n_attributes == n_attr
    assert ds.n_classes == 2
    assert abs(imbalance_ratio(ds.labels) - ir) <= tol
    plan = stratified_kfold(ds.labels, 5, seed=0)
    sizes = [test.size for _, test in plan]
    assert n_test in sizes and max(sizes) - min(sizes) <= 1
    assert ds.n_samples - n_test == n_train


def test_minmax():
    x = np.array([[1.0, 5.0, 2.0], [3.0, 5.0, 4.0], [2.0, 5.0, 0.0]])
    scaled, lo, hi = minmax_normalize(x)
    assert scaled.tolist() == [[0.0, 0.0, 0.5], [1.0, 0.0, 1.0], [0.5, 0.0, 0.0]]
    test = apply_minmax([[4.0, 7.0, -1.0]], lo, hi)
    assert test.tolist() == [[1.0, 0.0, 0.0]]
    assert apply_minmax([[4.0, 5.0, 1.0]], lo, hi, clip=False).tolist() == [[1.5, 0.0, 0.25]]


def test_stratified_folds():
    labels = np.array([0] * 23 + [1] * 7)
    plan = stratified_kfold(labels, 5, seed=3)
    seen = np.zeros(labels.size, dtype=int)
    for train, test in plan:
        seen[test] += 1
        assert np.intersect1d(train, test).size == 0
        counts = np.bincount(labels[test], minlength=2)
        assert counts[0] in (4, 5) and counts[1] in (1, 2)
    assert np.all(seen == 1)
    again = stratified_kfold(labels, 5, seed=3)
    assert np.array_equal(plan.assignments, again.assignments)
    assert not np.array_equal(plan.assignments, stratified_kfold(labels, 5, seed=4).assignments)


def test_fold_guards():
    with pytest.raises(ParameterError):
        stratified_kfold([0, 1, 0, 1], k=1)
    with pytest.warns(UserWarning):
        stratified_kfold([0] * 10 + [1] * 2, k=5)


def test_catalog_parsing(tmp_path):
    text = "# bench\niris0, iris0.dat\n\nsplit, tr.dat, /abs/te.dat  # comment\n"
    entries = parse_catalog(text, str(tmp_path))
    assert [e.name for e in entries] == ["iris0", "split"]
    assert entries[0].train_path == str(tmp_path / "iris0.dat")
    assert entries[0].test_path is None
    assert entries[1].test_path == "/abs/te.dat"
    with pytest.raises(FormatError, match="line 2"):
        parse_catalog("a, b.dat\nonly_name\n")
    assert len(builtin_catalog()) == len(BUILTIN_DATASETS)
