import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from edgegrid.classes import CLASSES, VOTE_ORDER
from edgegrid.errors import DegenerateDataError, DimensionError, NumericError
from edgegrid.select import FeatureSubset
from edgegrid.svm import (
    BinaryMachine,
    KernelParams,
    SVMModel,
    decision_values,
    grid_search_c,
    load_model,
    ovo_train,
    predict,
    predict_many,
    rbf,
    rbf_matrix,
    save_model,
    smo_train,
)

TOL = 1e-3


def test_rbf_examples():
    assert rbf([1.0, 2.0], [1.0, 2.0], 0.7) == 1.0
    assert rbf([0.0, 0.0], [1.0, 0.0], 1.0) == pytest.approx(math.exp(-1), abs=1e-6)
    assert rbf([0.0], [1.0], 2.0) < rbf([0.0], [1.0], 1.0)
    with pytest.raises(DimensionError):
        rbf([0.0], [0.0, 1.0], 1.0)


vectors = arrays(np.float64, 4, elements=st.floats(-10, 10))


@given(vectors, vectors, st.floats(1e-3, 5.0))
def test_rbf_symmetry(x, y, gamma):
    assert rbf(x, y, gamma) == rbf(y, x, gamma)
    assert rbf(x, x, gamma) == 1.0
    assert 0.0 <= rbf(x, y, gamma) <= 1.0
    assert rbf_matrix(x[None], y[None], gamma)[0, 0] == pytest.approx(rbf(x, y, gamma), abs=1e-12)


def check_machine(machine, X, y, C, tol=TOL):
    """Box, equality and KKT conditions of a machine trained with keep_all=True."""
    alpha = machine.alphas
    assert np.all(alpha >= 0) and np.all(alpha <= C)
    assert abs(np.sum(alpha * y)) <= tol
    f = machine.decision(X)
    free = (alpha > 0) & (alpha < C)
    if free.any():
        assert np.max(np.abs(y[free] * f[free] - 1.0)) <= 10 * tol
    history = np.array(machine.objective_history)
    assert np.all(np.diff(history) >= -1e-9)


def test_separable_pair():
    X, y = np.array([[0.0], [1.0]]), np.array([-1.0, 1.0])
    m = smo_train(X, y, KernelParams(1.0, 100.0), keep_all=True)
    np.testing.assert_array_equal(m.predict_sign(X), y)
    check_machine(m, X, y, 100.0)


def test_xor():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    m = smo_train(X, y, KernelParams(1.0, 10.0), keep_all=True)
    np.testing.assert_array_equal(m.predict_sign(X), y)
    check_machine(m, X, y, 10.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 0.4, 1.0, 10.0]))
def test_smo_conditions_random(seed, C):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 60))
    X = rng.normal(size=(n, 3))
    y = np.where(X[:, 0] + 0.7 * rng.normal(size=n) > 0, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0
    m = smo_train(X, y, KernelParams(0.5, C), keep_all=True)
    check_machine(m, X, y, C)


def test_smo_errors():
    X = np.zeros((3, 2))
    with pytest.raises(DegenerateDataError):
        smo_train(X, np.ones(3), KernelParams())
    X[0, 0] = np.nan
    with pytest.raises(NumericError):
        smo_train(X, np.array([1.0, -1.0, 1.0]), KernelParams())


def blobs(classes, per_class=12, seed=0, spread=0.3):
    rng = np.random.default_rng(seed)
    X, labels = [], []
    for k, c in enumerate(classes):
        center = np.array([math.cos(2 * math.pi * k / len(classes)), math.sin(2 * math.pi * k / len(classes))]) * 3
        X.append(center + spread * rng.normal(size=(per_class, 2)))
        labels += [c] * per_class
    return np.vstack(X), np.array(labels, dtype=object)


def test_ovo_machine_counts():
    X, labels = blobs(CLASSES, 5)
    assert len(ovo_train(X, labels).machines) == 21
    X2, labels2 = blobs(CLASSES[:2], 5)
    assert len(ovo_train(X2, labels2).machines) == 1
    X6, labels6 = blobs([c for c in CLASSES if c != "sad"], 5)
    with pytest.warns(UserWarning, match="sad"):
        model = ovo_train(X6, labels6)
    assert len(model.machines) == 15 and "sad" not in model.classes


def test_ovo_every_machine_feasible():
    X, labels = blobs(CLASSES, 10, spread=1.2)
    model = ovo_train(X, labels, KernelParams(c=0.4))
    for m in model.machines:
        assert np.all((m.alphas > 0) & (m.alphas <= 0.4))
        assert abs(np.sum(m.alphas * m.labels)) <= TOL


def test_training_point_of_separated_class():
    X, labels = blobs(["anger", "happy", "fear"], 15)
    model = ovo_train(X, labels, KernelParams(c=10.0))
    for i in (0, 20, 40):
        assert predict(model, X[i]) == labels[i]


def _stub_model(classes, decisions):
    """Model whose machines have no support vectors, so each decision equals its bias."""
    import itertools

    pairs = list(itertools.combinations(classes, 2))
    machines = tuple(
        BinaryMachine(np.zeros((0, 1)), np.zeros(0), float(v), KernelParams(1.0), pair)
        for pair, v in zip(pairs, decisions)
    )
    return SVMModel(tuple(classes), machines, KernelParams(1.0), FeatureSubset((0,)),
                    np.zeros(1), np.ones(1))


def test_vote_unanimity_and_ties():
    classes = ["anger", "happy", "sad"]
    # machines: (anger,happy), (anger,sad), (happy,sad)
    assert predict(_stub_model(classes, [1.0, 1.0, 0.5]), [0.0]) == "anger"
    # cyclic 1-1-1 tie; winning-vote strengths: anger 0.2, happy 0.9, sad 0.5
    assert predict(_stub_model(classes, [0.2, -0.5, 0.9]), [0.0]) == "happy"
    # full tie in votes and strength: fixed class preference decides
    tied = _stub_model(classes, [0.5, -0.5, 0.5])
    expected = min(classes, key=VOTE_ORDER.index)
    assert {predict(tied, [0.0]) for _ in range(5)} == {expected}


def test_symmetric_three_way_tie_deterministic():
    X, labels = blobs(["anger", "happy", "sad"], 10, spread=0.0)
    model = ovo_train(X, labels, KernelParams(1.0, 1.0), standardize=False)
    center = np.zeros((1, 2))
    answers = {predict(model, center) for _ in range(10)}
    assert len(answers) == 1
    retrained = ovo_train(X, labels, KernelParams(1.0, 1.0), standardize=False)
    assert predict(retrained, center) in answers


def test_gamma_default():
    X, labels = blobs(["anger", "happy"], 5)
    assert ovo_train(X, labels).params.gamma == 0.5
    assert ovo_train(X, labels, feature_subset=[1]).params.gamma == 1.0


def test_grid_search_c():
    X, labels = blobs(["anger", "happy", "sad"], 10)
    groups = np.array([f"g{i}" for i in range(len(labels))], dtype=object)
    assert grid_search_c(X, labels, groups, [0.7]) == 0.7
    # separated blobs: every candidate scores 1.0, the smallest wins
    assert grid_search_c(X, labels, groups, [1.0, 0.4, 0.1], folds=5) == 0.1


def test_model_round_trip(tmp_path):
    X, labels = blobs(CLASSES, 8, spread=1.0)
    X = np.column_stack([X, np.random.default_rng(1).normal(size=len(X))])
    model = ovo_train(X, labels, KernelParams(c=0.4), feature_subset=FeatureSubset((0, 2), 0.5))
    path = tmp_path / "model.txt"
    save_model(model, path)
    back = load_model(path)
    Xr = model.restrict(X)
    np.testing.assert_array_equal(decision_values(back, Xr), decision_values(model, Xr))
    assert predict_many(back, Xr) == predict_many(model, Xr)
    assert back.classes == model.classes and back.feature_subset == model.feature_subset
    save_model(back, tmp_path / "again.txt")
    assert (tmp_path / "again.txt").read_bytes() == path.read_bytes()


def test_predict_dimension_check():
    X, labels = blobs(["anger", "happy"], 5)
    model = ovo_train(X, labels)
    with pytest.raises(DimensionError):
        predict_many(model, np.zeros((2, 3)))
