import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import rank_scores

from rdream.errors import NonFinite
from rdream.ranks import centered_rank_transform

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestExamples:
    def test_three_points(self):
        np.testing.assert_allclose(centered_rank_transform([3.1, -0.5, 2.2]).scores, [1 / 3, -1 / 3, 0])

    def test_single_point(self):
        assert centered_rank_transform([7.0]).scores.tolist() == [0.0]

    def test_tie_takes_top_count(self):
        np.testing.assert_allclose(centered_rank_transform([1.0, 1.0]).scores, [0.25, 0.25])

    def test_nan_rejected(self):
        with pytest.raises(NonFinite):
            centered_rank_transform([1.0, np.nan])

    def test_source_hash_tracks_input(self):
        a = centered_rank_transform([1.0, 2.0, 3.0])
        b = centered_rank_transform([1.0, 2.0, 3.5])
        assert a.source_hash != b.source_hash
        assert a.source_hash == centered_rank_transform([1.0, 2.0, 3.0]).source_hash


class TestProperties:
    @given(st.lists(finite, min_size=1, max_size=60))
    def test_bounds(self, e):
        s = centered_rank_transform(e).scores
        n = len(e)
        assert np.all(s >= 1 / n - (n + 1) / (2 * n) - 1e-15)
        assert np.all(s <= (n - 1) / (2 * n) + 1e-15)
        assert np.all(np.abs(s) < 0.5)

    @given(st.lists(finite, min_size=1, max_size=60, unique=True))
    def test_zero_sum_without_ties(self, e):
        assert abs(centered_rank_transform(e).scores.sum()) < 1e-12

    @given(st.lists(st.integers(-500, 500), min_size=2, max_size=40, unique=True))
    def test_monotone_invariance(self, e):
        # a grid keeps the transformed values distinct in floating point
        e = np.array(e) / 100.0
        base = centered_rank_transform(e).scores
        for f in (lambda v: 3.0 * v - 7.0, lambda v: v**3, np.exp):
            np.testing.assert_array_equal(centered_rank_transform(f(e)).scores, base)

    @settings(max_examples=200)
    @given(st.lists(st.integers(-5, 5) | finite, min_size=1, max_size=50))
    def test_matches_quadratic_oracle(self, e):
        np.testing.assert_allclose(centered_rank_transform(e).scores, rank_scores(e), atol=1e-15)
