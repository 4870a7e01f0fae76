import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import conjugate_by_optimization
from simplex_mle.conjugate import conjugate, mu_bar, mu_hat, xi
from simplex_mle.core import TypeVector, kerridge_inaccuracy
from simplex_mle.exceptions import ValidationError

EGAP = TypeVector([0.6, 0.4, 0.0])
Y_F = np.array([1.0, -1.0, -10.0]) / 10


class TestMuBar:
    def test_root_of_xi(self):
        nu = TypeVector([0.2, 0.3, 0.5])
        z = np.array([0.4, -1.0, 2.0])
        mb = mu_bar(nu, z)
        assert mb > z.max()
        assert xi(nu, z, mb) == pytest.approx(1.0, abs=1e-13)

    def test_single_active_letter(self):
        # xi = 1 / (mu - z) so mu_bar = z + 1
        assert mu_bar(np.array([1.0]), np.array([3.0])) == pytest.approx(4.0)

    def test_zero_vector(self):
        assert mu_bar(TypeVector([0.5, 0.5]), np.zeros(2)) == pytest.approx(1.0)

    def test_large_spread(self):
        # checked in translated coordinates: mu - z near 1e4 loses digits to roundoff
        nu = TypeVector([1e-6, 1 - 1e-6])
        z = np.array([0.0, -2e4])
        mb = mu_bar(nu, z)
        assert xi(nu, z, mb) == pytest.approx(1.0, abs=1e-10)
        assert mu_bar(nu, z + 1e4) == pytest.approx(mb + 1e4, abs=1e-8)

    def test_xi_domain(self):
        with pytest.raises(ValidationError):
            xi(TypeVector([0.5, 0.5]), np.zeros(2), 0.0)


class TestMuHat:
    def test_gap_example_dual_solution(self):
        assert mu_hat(EGAP, -Y_F) == pytest.approx(1.0, abs=1e-12)

    def test_no_passive_letters(self):
        nu = TypeVector([0.5, 0.5])
        assert mu_hat(nu, [0.1, -0.1]) == pytest.approx(mu_bar(nu, [0.1, -0.1]))

    def test_passive_maximum_wins(self):
        assert mu_hat(EGAP, [0.0, 0.0, 5.0]) == 5.0


class TestConjugate:
    def test_gap_example_value(self):
        res = conjugate(EGAP, -Y_F)
        assert res.value == pytest.approx(-0.6881, abs=5e-5)
        assert res.mu_hat == pytest.approx(1.0)
        # leftover mass goes to the tying passive letter
        np.testing.assert_allclose(res.maximizer(), np.array([54, 44, 1]) / 99, atol=1e-12)

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_numerical_sup(self, seed):
        rng = np.random.default_rng(seed)
        nu = rng.dirichlet(np.ones(4))
        nu[rng.random(4) < 0.3] = 0
        if nu.sum() == 0:
            nu[0] = 1
        nu = TypeVector(nu / nu.sum())
        z = rng.normal(size=4)
        assert conjugate(nu, z).value == pytest.approx(conjugate_by_optimization(nu.nu, z), abs=1e-6)

    def test_maximizer_attains_value(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            nu = TypeVector(np.array([0.3, 0.7, 0.0, 0.0]))
            z = rng.normal(size=4)
            res = conjugate(nu, z)
            q = res.maximizer()
            assert q.sum() == pytest.approx(1.0, abs=1e-12)
            assert q @ z - kerridge_inaccuracy(nu, q) == pytest.approx(res.value, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            conjugate(EGAP, [0.0, 0.0])


def _type_strategy(m):
    return st.lists(st.floats(0.0, 1.0), min_size=m, max_size=m).filter(lambda v: sum(v) > 1e-3)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(_type_strategy(4), st.lists(st.floats(-5, 5), min_size=4, max_size=4),
           st.lists(st.floats(1e-3, 1.0), min_size=4, max_size=4))
    def test_fenchel_young(self, raw_nu, z, raw_q):
        nu = np.array(raw_nu)
        nu = TypeVector(nu / nu.sum())
        q = np.array(raw_q) / sum(raw_q)
        z = np.array(z)
        assert kerridge_inaccuracy(nu, q) + conjugate(nu, z).value >= q @ z - 1e-9

    @settings(max_examples=40, deadline=None)
    @given(_type_strategy(3), st.lists(st.floats(-5, 5), min_size=3, max_size=3),
           st.floats(-10, 10))
    def test_translation(self, raw_nu, z, c):
        nu = np.array(raw_nu)
        nu = TypeVector(nu / nu.sum())
        z = np.array(z)
        assert conjugate(nu, z + c).value == pytest.approx(conjugate(nu, z).value + c, abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(_type_strategy(3), st.lists(st.floats(-5, 5), min_size=3, max_size=3),
           st.lists(st.floats(-5, 5), min_size=3, max_size=3))
    def test_lipschitz_in_sup_norm(self, raw_nu, z1, z2):
        nu = np.array(raw_nu)
        nu = TypeVector(nu / nu.sum())
        z1, z2 = np.array(z1), np.array(z2)
        diff = abs(conjugate(nu, z1).value - conjugate(nu, z2).value)
        assert diff <= np.max(np.abs(z1 - z2)) + 1e-9

    def test_gradient_is_maximizer(self):
        rng = np.random.default_rng(11)
        nu = TypeVector([0.2, 0.5, 0.3, 0.0])
        h = 1e-6
        for _ in range(10):
            z = rng.normal(size=4)
            z[3] = z[:3].min() - 1.0
            res = conjugate(nu, z)
            assert res.mu_bar > z[3]
            grad = np.array([(conjugate(nu, z + h * e).value - conjugate(nu, z - h * e).value) / (2 * h)
                             for e in np.eye(4)])
            np.testing.assert_allclose(grad, res.maximizer(), atol=1e-6)
