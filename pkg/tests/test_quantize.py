import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvdfq.data import MultivariateSequence
from mvdfq.errors import (ConstantDimension, DimensionMismatch, EmptyDataset, FormatError,
                          InvalidParams, TooFewDistinctValues, TooFewSamples)
from mvdfq.quantize import (Codebook, QuantizerModel, UNIFORM, apply_dfq, apply_vq,
                            fit_kmeans_quantizer, fit_uniform_quantizer, fit_vq_codebook,
                            kmeans_1d, load_codebook, load_quantizer, quantize_value,
                            save_codebook, save_quantizer)

from _helpers import random_real


def seq(values, name="s", label="a"):
    return MultivariateSequence(name, label, np.atleast_2d(np.asarray(values, dtype=float)))


@pytest.fixture
def model_0_10():
    return QuantizerModel(UNIFORM, 5, np.array([0.0]), np.array([10.0]))


class TestUniformFit:
    def test_single_sequence_range(self):
        m = fit_uniform_quantizer([seq(np.arange(11))], 5)
        assert (m.f_min[0], m.f_max[0], m.delta[0]) == (0.0, 10.0, 2.0)

    def test_pooled_range(self):
        m = fit_uniform_quantizer([seq([0, 4], "a"), seq([2, 10], "b")], 4)
        assert (m.f_min[0], m.f_max[0], m.delta[0]) == (0.0, 10.0, 2.5)

    def test_constant_dimension(self):
        with pytest.raises(ConstantDimension):
            fit_uniform_quantizer([seq([[3.0, 3.0, 3.0], [1.0, 2.0, 3.0]])], 4)

    def test_empty_dataset(self):
        with pytest.raises(EmptyDataset):
            fit_uniform_quantizer([], 4)

    def test_mixed_R(self):
        with pytest.raises(DimensionMismatch):
            fit_uniform_quantizer([seq([1.0, 2.0]), seq([[1.0, 2.0], [3.0, 4.0]], "b")], 4)

    @pytest.mark.parametrize("B", [0, -3])
    def test_bad_B(self, B):
        with pytest.raises(InvalidParams):
            fit_uniform_quantizer([seq([1.0, 2.0])], B)


class TestQuantizeValue:
    @pytest.mark.parametrize("f, expected", [(3.9, 2), (-1.0, 0), (12.0, 6), (10.0, 5),
                                             (0.0, 1), (2.0, 2), (9.999, 5)])
    def test_examples(self, model_0_10, f, expected):
        assert quantize_value(model_0_10, 0, f) == expected

    def test_apply_row(self, model_0_10):
        d = apply_dfq(model_0_10, seq([0.0, 3.9, 12.0]))
        assert d.rows.tolist() == [[1, 2, 6]]
        assert d.alphabet_size == 7 and d.min_symbol == 0

    def test_empty_sequence(self, model_0_10):
        d = apply_dfq(model_0_10, MultivariateSequence("e", "a", np.zeros((1, 0))))
        assert d.rows.shape == (1, 0)

    def test_wrong_R(self, model_0_10):
        with pytest.raises(DimensionMismatch):
            apply_dfq(model_0_10, seq([[1.0], [2.0]]))

    @settings(max_examples=200, deadline=None)
    @given(lo=st.floats(-1e3, 1e3), width=st.floats(1e-3, 1e3), B=st.integers(1, 64),
           a=st.floats(-1e4, 1e4), b=st.floats(-1e4, 1e4))
    def test_monotone(self, lo, width, B, a, b):
        m = QuantizerModel(UNIFORM, B, np.array([lo]), np.array([lo + width]))
        lo_f, hi_f = min(a, b), max(a, b)
        assert quantize_value(m, 0, lo_f) <= quantize_value(m, 0, hi_f)

    @settings(max_examples=200, deadline=None)
    @given(B=st.integers(1, 40), u=st.floats(0, 1, exclude_max=True))
    def test_bin_bounds(self, B, u):
        m = QuantizerModel(UNIFORM, B, np.array([-2.0]), np.array([3.0]))
        f = -2.0 + 5.0 * u
        s = quantize_value(m, 0, f)
        assert 1 <= s <= B
        # floating rounding can land exactly on an edge; allow one ulp of slack
        edge = m.f_min[0] + (s - 1) * m.delta[0]
        assert edge <= f + 1e-12 and f < m.f_min[0] + s * m.delta[0] + 1e-12

    def test_training_values_in_range(self, rng):
        data = [random_real(rng, f"s{i}", 3, 50) for i in range(4)]
        m = fit_uniform_quantizer(data, 8)
        for x in data:
            rows = apply_dfq(m, x).rows
            assert rows.min() >= 1 and rows.max() <= 8


class TestKmeans1d:
    def test_two_clusters(self):
        m = fit_kmeans_quantizer([seq([0, 0, 0, 10, 10, 10])], 2)
        assert m.cuts[0].tolist() == [5.0]
        assert [quantize_value(m, 0, v) for v in (0, 4.9, 5.0, 5.1, 10, 11, -1)] == [1, 1, 1, 2, 2, 3, 0]

    def test_centers(self, rng):
        c = kmeans_1d(np.array([0, 0, 0, 10, 10, 10.0]), 2, 100, rng)
        assert c.tolist() == [0.0, 10.0]

    def test_single_bin(self):
        m = fit_kmeans_quantizer([seq([1.0, 2.0, 3.0])], 1)
        assert len(m.cuts[0]) == 0
        assert [quantize_value(m, 0, v) for v in (1.0, 2.5, 3.0)] == [1, 1, 1]

    def test_deterministic(self, rng):
        data = [random_real(rng, f"s{i}", 2, 100) for i in range(3)]
        a, b = fit_kmeans_quantizer(data, 6, seed=4), fit_kmeans_quantizer(data, 6, seed=4)
        assert all(np.array_equal(x, y) for x, y in zip(a.cuts, b.cuts))

    def test_too_few_distinct(self):
        with pytest.raises(TooFewDistinctValues):
            fit_kmeans_quantizer([seq([1.0, 1.0, 2.0])], 3)

    def test_cuts_sorted(self, rng):
        data = [random_real(rng, "s", 3, 400)]
        m = fit_kmeans_quantizer(data, 16)
        for c in m.cuts:
            assert len(c) == 15 and np.all(np.diff(c) > 0)

    def test_lloyd_fixed_point(self, rng):
        x = rng.normal(size=300)
        c = kmeans_1d(x, 5, 200, rng)
        cuts = (c[:-1] + c[1:]) / 2
        lab = np.searchsorted(cuts, x, side="left")
        means = np.array([x[lab == j].mean() for j in range(5)])
        np.testing.assert_allclose(means, c, rtol=0, atol=1e-12)


class TestVQ:
    def test_separated_clouds(self, rng):
        a = rng.normal(0, 0.1, (2, 30))
        b = rng.normal(10, 0.1, (2, 30))
        cb = fit_vq_codebook([seq(np.hstack([a, b]))], 2)
        got = sorted(map(tuple, cb.centroids))
        want = sorted([tuple(a.mean(axis=1)), tuple(b.mean(axis=1))])
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_saturated(self):
        x = np.array([[0.0, 1.0, 5.0, 1.0], [0.0, 2.0, 5.0, 2.0]])
        cb = fit_vq_codebook([seq(x)], 3)
        d = apply_vq(cb, seq(x))
        np.testing.assert_array_equal(cb.centroids[d.rows[0] - 1], x.T)

    def test_nearest_and_tie(self):
        cb = Codebook(np.array([[0.0, 0.0], [10.0, 10.0]]))
        d = apply_vq(cb, seq([[1.0, 5.0], [1.0, 5.0]]))
        assert d.rows.tolist() == [[1, 1]]
        assert (d.alphabet_size, d.min_symbol) == (2, 1)

    def test_empty(self):
        cb = Codebook(np.array([[0.0], [1.0]]))
        assert apply_vq(cb, MultivariateSequence("e", "a", np.zeros((1, 0)))).rows.shape == (1, 0)

    def test_assignment_is_argmin(self, rng):
        data = [random_real(rng, f"s{i}", 3, 80) for i in range(3)]
        cb = fit_vq_codebook(data, 16, seed=2)
        x = data[0].values.T
        d2 = ((x[:, None, :] - cb.centroids[None]) ** 2).sum(-1)
        idx = apply_vq(cb, data[0]).rows[0] - 1
        assert np.all(d2[np.arange(len(x)), idx] <= d2.min(axis=1))

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            fit_vq_codebook([seq([1.0, 2.0])], 3)

    def test_deterministic(self, rng):
        data = [random_real(rng, "s", 2, 200)]
        a, b = fit_vq_codebook(data, 8, seed=9), fit_vq_codebook(data, 8, seed=9)
        assert np.array_equal(a.centroids, b.centroids)


class TestSerialization:
    def test_uniform_roundtrip(self, tmp_path, rng):
        m = fit_uniform_quantizer([random_real(rng, "s", 3, 40)], 7)
        save_quantizer(m, tmp_path / "q")
        back = load_quantizer(tmp_path / "q")
        assert back.kind == m.kind and back.B == 7
        assert np.array_equal(back.f_min, m.f_min) and np.array_equal(back.f_max, m.f_max)

    def test_kmeans_roundtrip(self, tmp_path, rng):
        m = fit_kmeans_quantizer([random_real(rng, "s", 2, 100)], 5)
        save_quantizer(m, tmp_path / "q")
        back = load_quantizer(tmp_path / "q")
        assert all(np.array_equal(a, b) for a, b in zip(back.cuts, m.cuts))
        assert (tmp_path / "q").read_text().startswith("dfq-quantizer v1 kind=kmeans1d R=2 B=5\n")

    def test_codebook_roundtrip(self, tmp_path, rng):
        cb = fit_vq_codebook([random_real(rng, "s", 3, 50)], 4)
        save_codebook(cb, tmp_path / "c")
        assert np.array_equal(load_codebook(tmp_path / "c").centroids, cb.centroids)

    @pytest.mark.parametrize("text", ["", "dfq-quantizer v1 kind=uniform R=2 B=3\ndim 0 min 0 max 1\n",
                                      "nonsense\n", "dfq-quantizer v1 kind=odd R=1 B=3\ndim 0 min 0 max 1\n"])
    def test_malformed(self, tmp_path, text):
        (tmp_path / "q").write_text(text)
        with pytest.raises(FormatError):
            load_quantizer(tmp_path / "q")
