import math

import numpy as np
import pytest

from simplex_mle.core import (
    Alphabet,
    TypeVector,
    active_passive_split,
    check_probability_vector,
    i_divergence,
    kerridge_inaccuracy,
    likelihood_ratio,
)
from simplex_mle.exceptions import ValidationError


class TestAlphabet:
    def test_labels_and_size(self):
        a = Alphabet([-1, 0, 1])
        assert a.m == 3
        assert a.is_numeric
        np.testing.assert_array_equal(a.values(), [-1.0, 0.0, 1.0])
        assert a.index(1) == 2

    def test_duplicates_rejected(self):
        with pytest.raises(ValidationError):
            Alphabet(["a", "b", "a"])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            Alphabet([])

    def test_string_labels_are_not_numeric(self):
        a = Alphabet(["x", "y"])
        assert not a.is_numeric
        with pytest.raises(ValidationError):
            a.values()

    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            Alphabet.range(3).index(7)


class TestTypeVector:
    def test_from_counts_keeps_n(self):
        t = TypeVector.from_counts([3, 2, 0])
        assert t.n == 5
        np.testing.assert_allclose(t.nu, [0.6, 0.4, 0.0])
        np.testing.assert_array_equal(t.active, [0, 1])
        np.testing.assert_array_equal(t.passive, [2])
        assert (t.m_a, t.m_p) == (2, 1)

    def test_read_only(self):
        t = TypeVector([0.5, 0.5])
        with pytest.raises(ValueError):
            t.nu[0] = 1.0

    @pytest.mark.parametrize("nu", [[0.5, 0.6], [-0.1, 1.1], [0.0, 0.0], [np.nan, 1.0]])
    def test_invalid(self, nu):
        with pytest.raises(ValidationError):
            TypeVector(nu)

    def test_sum_tolerance(self):
        TypeVector([0.5, 0.5 + 5e-13])
        with pytest.raises(ValidationError):
            TypeVector([0.5, 0.5 + 1e-11])

    def test_bad_counts(self):
        with pytest.raises(ValidationError):
            TypeVector.from_counts([1.5, 2])
        with pytest.raises(ValidationError):
            TypeVector.from_counts([0, 0])

    def test_split_matches_properties(self):
        a, p = active_passive_split([0, 1, 0])
        np.testing.assert_array_equal(a, [1])
        np.testing.assert_array_equal(p, [0, 2])


class TestKerridge:
    def test_nonunique_minimum_value(self):
        assert kerridge_inaccuracy([0, 1, 0], [0.25, 0.5, 0.25]) == pytest.approx(math.log(2), abs=1e-12)

    def test_uniform(self):
        assert kerridge_inaccuracy([0.5, 0.5], [0.5, 0.5]) == pytest.approx(math.log(2))

    def test_zero_mass_on_active_letter(self):
        assert kerridge_inaccuracy([1, 0], [0, 1]) == math.inf

    def test_passive_coordinates_ignored(self):
        assert kerridge_inaccuracy([1, 0], [1, 0]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            kerridge_inaccuracy([1, 0], [1, 0, 0])

    def test_gibbs_inequality(self):
        # the inaccuracy is minimized at q = nu, where it equals the entropy
        rng = np.random.default_rng(0)
        for _ in range(50):
            nu = rng.dirichlet(np.ones(4))
            q = rng.dirichlet(np.ones(4))
            assert kerridge_inaccuracy(nu, q) >= kerridge_inaccuracy(nu, nu) - 1e-12


class TestIDivergence:
    def test_no_gap_dual_value(self):
        assert i_divergence(1.0, [0.5, 0.5], [0.0, 0.0]) == pytest.approx(-math.log(2))

    def test_domain(self):
        with pytest.raises(ValidationError):
            i_divergence(1.0, [0.5, 0.5], [-1.0, 0.0])
        with pytest.raises(ValidationError):
            i_divergence(1.0, [0.0, 1.0], [0.0, 0.0])


class TestLikelihoodRatio:
    def test_identical_values(self):
        lr = likelihood_ratio(10, 0.7, 0.7)
        assert lr.ratio == 1.0 and not lr.overflow

    def test_log_space(self):
        lr = likelihood_ratio(3, 1.0, 0.5)
        assert lr.log_ratio == pytest.approx(1.5)
        assert lr.ratio == pytest.approx(math.exp(1.5))

    def test_overflow_flag(self):
        lr = likelihood_ratio(10_000, 1.0, 0.0)
        assert lr.overflow and lr.ratio == math.inf and lr.log_ratio == 10_000

    def test_rejects_infinite(self):
        with pytest.raises(ValidationError):
            likelihood_ratio(10, math.inf, 0.0)


def test_probability_vector_check():
    check_probability_vector([0.2, 0.8])
    with pytest.raises(ValidationError):
        check_probability_vector([0.2, 0.7])
    with pytest.raises(ValidationError):
        check_probability_vector([1.2, -0.2])
