import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvdfq.crossval import PipelineConfig, cross_validate, make_folds, run_fold
from mvdfq.data import MultivariateSequence
from mvdfq.errors import (EmptyInput, LengthMismatch, NonPsdWarning, SingleClass,
                          TooFewPerClass, UnknownGroupKey)
from mvdfq.gram import GramMatrix
from mvdfq.metrics import evaluate, roc50
from mvdfq.svm import (SvmModel, dual_objective, load_models, predict, predict_ovr, save_models,
                       solve_dual, train_ovr, train_svm)


def separable(rng, n=40, R=5, margin=3.0):
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    X = rng.normal(size=(n, R))
    X[:, 0] = y * (margin + np.abs(X[:, 0]))
    return X @ X.T, y


def gram(K, prefix="t"):
    return GramMatrix(tuple(f"{prefix}{i}" for i in range(len(K))), np.asarray(K, dtype=float))


class TestTrainSvm:
    def test_two_point(self):
        m = train_svm(gram(np.eye(2)), [1, -1], C=10)
        np.testing.assert_allclose(m.alphas, [1, -1], atol=1e-6)
        assert abs(m.bias) < 1e-6
        assert predict(m, [1, 0], ["t0", "t1"]) == (pytest.approx(1.0, abs=1e-6), "+1")
        assert predict(m, [0, 1], ["t0", "t1"])[1] == "-1"

    def test_zero_row_goes_positive(self):
        m = SvmModel(("a",), np.array([1.0]), 0.0, 1.0)
        assert predict(m, [0.0]) == (0.0, "+1")

    def test_single_class(self):
        with pytest.raises(SingleClass):
            train_svm(gram(np.eye(3)), [1, 1, 1])

    def test_length_mismatch(self):
        m = train_svm(gram(np.eye(2)), [1, -1])
        with pytest.raises(LengthMismatch):
            predict(m, [1.0, 0.0, 0.0], ["t0", "t1"])

    def test_separable_zero_error(self, rng):
        K, y = separable(rng)
        m = train_svm(gram(K), y, C=100)
        scores = np.array([predict(m, row, gram(K).ids)[0] for row in K])
        assert np.all(np.sign(scores) == y)

    def test_feasibility(self, rng):
        K, y = separable(rng, margin=0.2)
        C = 0.5
        m = train_svm(gram(K), y, C=C)
        assert np.all(np.abs(m.alphas) <= C + 1e-12)
        assert abs(m.alphas.sum()) <= 1e-6 * C
        assert set(m.support_ids) <= set(gram(K).ids)
        pos = np.array([int(s[1:]) for s in m.support_ids])
        assert np.all(np.sign(m.alphas) == y[pos])

    def test_kkt_at_convergence(self, rng):
        K, y = separable(rng, margin=0.3)
        C, tol = 1.0, 1e-3
        sol = solve_dual(K, y, C, tol)
        f = sol.decision_values(K, y)
        a = sol.alpha
        margin = y * f
        assert np.all(margin[a < 1e-12] >= 1 - tol)
        assert np.all(margin[a > C - 1e-12] <= 1 + tol)
        free = (a > 1e-12) & (a < C - 1e-12)
        assert np.all(np.abs(margin[free] - 1) <= tol)

    def test_objective_non_decreasing(self, rng):
        K, y = separable(rng, margin=0.1)
        sol = solve_dual(K, y, 1.0, 1e-4, record=True)
        obj = np.array(sol.objective)
        assert len(obj) > 2
        assert np.all(np.diff(obj) >= -1e-12 * np.abs(obj[1:]))
        assert obj[-1] == pytest.approx(dual_objective(sol.alpha, sol.gradient))

    def test_prediction_consistency(self, rng):
        K, y = separable(rng, margin=0.3)
        sol = solve_dual(K, y, 1.0)
        m = train_svm(gram(K), y, C=1.0)
        ids = gram(K).ids
        got = np.array([predict(m, row, ids)[0] for row in K])
        np.testing.assert_allclose(got, sol.decision_values(K, y), atol=1e-8)

    @pytest.mark.parametrize("c", [0.01, 7.0, 1e3])
    def test_scaling(self, rng, c):
        K, y = separable(rng, margin=0.2)
        ids = gram(K).ids
        a = train_svm(gram(K), y, C=1.0, tol=1e-6)
        b = train_svm(gram(K * c), y, C=1.0 / c, tol=1e-6)
        ok_a = [predict(a, r, ids)[1] == ("+1" if t > 0 else "-1") for r, t in zip(K, y)]
        ok_b = [predict(b, r, ids)[1] == ("+1" if t > 0 else "-1") for r, t in zip(K * c, y)]
        assert ok_a == ok_b

    def test_non_psd_warns(self):
        K = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.warns(NonPsdWarning):
            train_svm(gram(K), [1, -1])


class TestOvr:
    def test_two_classes_negation(self, rng):
        K, y = separable(rng, margin=0.2)
        labels = ["p" if v > 0 else "n" for v in y]
        models = train_ovr(gram(K), labels, C=1.0)
        assert np.array_equal(models[1].alphas, -models[0].alphas)
        binary = train_svm(gram(K), np.where(np.array(labels) == "n", 1, -1), 1.0, 1e-3, "n", "p")
        for row in K:
            assert predict_ovr(models, row, gram(K).ids)[0] == predict(binary, row, gram(K).ids)[1]

    def test_three_separable_classes(self, rng):
        centers = np.eye(3) * 6
        X = np.vstack([c + rng.normal(scale=0.3, size=(10, 3)) for c in centers])
        labels = [c for c in "abc" for _ in range(10)]
        g = gram(X @ X.T)
        models = train_ovr(g, labels, C=10)
        assert [predict_ovr(models, r, g.ids)[0] for r in g.values] == labels

    def test_tie_smaller_label(self):
        models = [SvmModel(("a",), np.array([1.0]), 0.0, 1.0, "zeta", "~rest"),
                  SvmModel(("a",), np.array([1.0]), 0.0, 1.0, "alpha", "~rest")]
        assert predict_ovr(models, [0.5])[0] == "alpha"

    def test_single_class(self):
        with pytest.raises(SingleClass):
            train_ovr(gram(np.eye(2)), ["a", "a"])

    def test_model_roundtrip(self, tmp_path, rng):
        K, y = separable(rng, n=12)
        models = train_ovr(gram(K), ["u" if v > 0 else "v" for v in y])
        save_models(models, tmp_path / "m")
        back = load_models(tmp_path / "m")
        for a, b in zip(models, back):
            assert a.support_ids == b.support_ids and np.array_equal(a.alphas, b.alphas)
            assert (a.bias, a.label_positive, a.label_negative) == (b.bias, b.label_positive, b.label_negative)


class TestMetrics:
    @pytest.mark.parametrize("scores, labels, expected", [
        ([4, 3, 2, 1], [1, 1, -1, -1], 1.0),
        ([4, 3, 2, 1], [-1, -1, 1, 1], 0.0),
        ([0.9, 0.8, 0.7, 0.6], [1, -1, 1, -1], 0.75),
        ([1, 1], [1, -1], 0.0),
    ])
    def test_roc50_cases(self, scores, labels, expected):
        assert roc50(scores, labels) == expected

    def test_roc50_truncates_at_50(self):
        labels = [-1] * 60 + [1] * 5
        assert roc50(np.arange(65)[::-1], labels) == 0.0
        labels = [-1] * 50 + [1] + [-1] * 10
        assert roc50(np.arange(61)[::-1], labels) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.integers(-1000, 1000), st.booleans()), min_size=2, max_size=80))
    def test_roc50_monotone_invariance(self, pairs):
        # integer scores keep the transform exact, hence strictly monotone
        scores = np.array([s for s, _ in pairs], dtype=np.float64)
        labels = [1 if b else -1 for _, b in pairs]
        if len(set(labels)) < 2:
            return
        assert roc50(scores, labels) == roc50(scores ** 3 + 5 * scores - 2, labels)

    def test_roc50_single_class(self):
        with pytest.raises(SingleClass):
            roc50([1, 2], [1, 1])

    def test_evaluate_perfect(self):
        r = evaluate(["a", "b"], ["a", "b"])
        assert (r.error_rate, r.macro_f1) == (0.0, 1.0)

    def test_evaluate_one_class_predicted(self):
        r = evaluate(["a"] * 4, ["a", "a", "b", "b"])
        assert r.error_rate == 0.5
        assert r.per_class_f1 == {"a": 2 / 3, "b": 0.0}
        assert r.macro_f1 == 1 / 3

    def test_evaluate_errors(self):
        with pytest.raises(EmptyInput):
            evaluate([], [])
        with pytest.raises(LengthMismatch):
            evaluate(["a"], ["a", "b"])

    def test_tsv_has_header(self):
        assert evaluate(["a"], ["a"]).to_tsv().startswith("metric\tvalue\n")


def two_rhythm(name, label, phase, n=40, group=""):
    t = np.arange(n) + phase
    pattern = (t % 2) if label == "fast" else ((t // 2) % 2)
    return MultivariateSequence(name, label, pattern[None, :].astype(float) + 0.01 * phase, group)


class TestCrossValidate:
    @pytest.fixture
    def toy(self):
        return [two_rhythm("a0", "fast", 0), two_rhythm("a1", "fast", 1),
                two_rhythm("b0", "slow", 0), two_rhythm("b1", "slow", 1)]

    def test_leave_one_out(self, toy):
        cfg = PipelineConfig(bins=2, k=3)
        res = cross_validate(toy, cfg, folds=4)
        assert res.report.error_rate == 0.0
        assert sorted(res.fold_of.tolist()) == [0, 1, 2, 3]

    def test_deterministic(self, rng):
        from mvdfq.synth import generate
        data = generate(per_class=6, classes=2, n=80, seed=3)
        cfg = PipelineConfig(bins=8, k=3, manifold=True, seed=11)
        a, b = cross_validate(data, cfg, 3), cross_validate(data, cfg, 3)
        assert np.array_equal(a.fold_of, b.fold_of)
        assert a.report.to_tsv() == b.report.to_tsv()
        assert a.report.roc50 is not None

    def test_stratified_folds(self, rng):
        data = [MultivariateSequence(f"s{i}", "ab"[i % 2], np.zeros((1, 1))) for i in range(20)]
        folds = make_folds(data, 5, seed=1)
        for f in range(5):
            members = [data[i].label for i in np.flatnonzero(folds == f)]
            assert members.count("a") == members.count("b") == 2

    def test_too_few(self):
        data = [MultivariateSequence(f"s{i}", "a" if i else "b", np.zeros((1, 1))) for i in range(6)]
        with pytest.raises(TooFewPerClass):
            make_folds(data, 3)

    def test_missing_group(self, toy):
        with pytest.raises(UnknownGroupKey):
            make_folds(toy, 2, group_mode=True)

    def test_group_holding_whole_class(self):
        data = [two_rhythm("a0", "fast", 0, group="g0"), two_rhythm("a1", "fast", 1, group="g0"),
                two_rhythm("b0", "slow", 0, group="g0"), two_rhythm("b1", "slow", 1, group="g1"),
                two_rhythm("b2", "slow", 2, group="g1")]
        res = cross_validate(data, PipelineConfig(bins=2, k=3), group_mode=True)
        assert res.predictions[:2] == ["slow", "slow"]
        assert res.report.error_rate == pytest.approx(2 / 5)

    def test_test_fold_cannot_leak(self):
        from mvdfq.synth import generate
        data = generate(per_class=6, classes=2, n=60, seed=5)
        train, test = data[:4] + data[6:10], data[4:6] + data[10:]
        corrupted = [MultivariateSequence(x.id, x.label, x.values * 100 - 7) for x in test]
        cfg = PipelineConfig(bins=6, k=2)
        a, b = run_fold(train, test, cfg), run_fold(train, corrupted, cfg)
        assert np.array_equal(a.representation.f_min, b.representation.f_min)
        assert np.array_equal(a.gram.values, b.gram.values)
        for ma, mb in zip(a.models, b.models):
            assert np.array_equal(ma.alphas, mb.alphas) and ma.bias == mb.bias


def test_no_warnings_on_psd_gram(rng):
    K, y = separable(rng)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        train_svm(gram(K), y)
