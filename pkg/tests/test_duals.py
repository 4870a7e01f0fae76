import math

import numpy as np
import pytest

from oracles import brute_force_min_3
from simplex_mle.core import i_divergence, kerridge_inaccuracy
from simplex_mle.duals import (
    DualStatus,
    active_passive_solve,
    diagnose_gap,
    fenchel_single_inequality,
    klotz_candidate,
    primal_from_dual,
    smith_solve,
)
from simplex_mle.exceptions import ValidationError
from simplex_mle.geometry import ConstraintModel

MEAN_ZERO = ConstraintModel.from_arrays([[-1.0, 0.0, 1.0]], labels=[-1, 0, 1])
GAP = ConstraintModel.from_arrays([[-1.0, 1.0, 10.0]], labels=[-1, 1, 10])
WETS = ConstraintModel.from_arrays([[1.0, -1.0, 0.0], [0.0, 1.0, -1.0]], kinds=["le", "le"])
NONUNIQUE = ConstraintModel.from_arrays([[1.0, 0.0, 1.0]], rhs=[0.5], labels=[-1, 0, 1])
PASSIVE_NEEDED = ConstraintModel.from_arrays([[-1.0, 1.0, 2.0, 5.0]], labels=[-1, 1, 2, 5])
KLOTZ_U = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
KLOTZ_NU = np.array([0.0, 3.0, 0.0, 0.0, 7.0]) / 10


class TestSmith:
    def test_gap_example(self):
        d = smith_solve(GAP, [0.6, 0.4, 0.0])
        assert d.status is DualStatus.CONVERGED
        np.testing.assert_allclose(d.alpha, [-0.2], atol=1e-10)
        assert d.value == pytest.approx(-math.log(2), abs=1e-10)
        np.testing.assert_allclose(primal_from_dual([0.6, 0.4, 0.0], d, GAP), [0.5, 0.5, 0.0], atol=1e-10)

    def test_no_gap_example(self):
        nu = [0.5, 0.0, 0.5]
        d = smith_solve(MEAN_ZERO, nu)
        np.testing.assert_allclose(d.alpha, [0.0], atol=1e-12)
        assert not diagnose_gap(MEAN_ZERO, nu, d).gap_present

    @pytest.mark.parametrize("model,nu", [(MEAN_ZERO, [1, 0, 0]), (MEAN_ZERO, [0.5, 0.5, 0]),
                                          (WETS, [0, 1, 0])])
    def test_divergent_on_non_regular(self, model, nu):
        assert smith_solve(model, nu).status is DualStatus.DIVERGENT

    def test_full_type_matches_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            u = rng.normal(size=3)
            u -= u.mean()
            model = ConstraintModel.from_arrays([u])
            nu = rng.dirichlet(np.ones(3))
            d = smith_solve(model, nu)
            ref, _ = brute_force_min_3(model, nu)
            assert -d.value == pytest.approx(ref, abs=1e-7)

    def test_no_rows(self):
        model = ConstraintModel.from_arrays(np.zeros((0, 2)), labels=[0, 1])
        d = smith_solve(model, [0.25, 0.75])
        np.testing.assert_allclose(d.q_active, [0.25, 0.75])

    def test_rows_vanishing_on_active_letters(self):
        d = smith_solve(MEAN_ZERO, [0, 1, 0])
        assert d.converged and d.alpha.shape == (1,)
        assert d.value == 0.0

    def test_objective_midpoint_convex(self):
        rng = np.random.default_rng(2)
        nu_a = np.array([0.2, 0.3, 0.5])
        U = rng.normal(size=(2, 3))

        def obj(alpha):
            return i_divergence(1.0, nu_a, U.T @ alpha)

        checked = 0
        while checked < 50:
            a, b = rng.normal(scale=0.3, size=(2, 2))
            if min(1 + U.T @ a) <= 0 or min(1 + U.T @ b) <= 0:
                continue
            assert obj(0.5 * (a + b)) <= 0.5 * (obj(a) + obj(b)) + 1e-10
            checked += 1

    def test_primal_rejects_divergent(self):
        with pytest.raises(ValidationError):
            primal_from_dual([1, 0, 0], smith_solve(MEAN_ZERO, [1, 0, 0]))


class TestGapDiagnosis:
    def test_gap_example(self):
        nu = [0.6, 0.4, 0.0]
        g = diagnose_gap(GAP, nu, smith_solve(GAP, nu))
        assert g.gap_present and not g.condition_iv
        assert g.extremality_residual > 0.1

    def test_extremality_residual_vanishes_without_gap(self):
        nu = [0.5, 0.0, 0.5]
        g = diagnose_gap(MEAN_ZERO, nu, smith_solve(MEAN_ZERO, nu))
        assert g.extremality_residual == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("nu1,gap,expected", [
        (0.45, False, np.array([12, 12, 0, 0]) / 24),
        (0.3, True, np.array([14, 9, 0, 1]) / 24),
    ])
    def test_passive_needed_threshold(self, nu1, gap, expected):
        nu = [1 - nu1, nu1, 0, 0]
        assert diagnose_gap(PASSIVE_NEEDED, nu, smith_solve(PASSIVE_NEEDED, nu)).gap_present is gap
        np.testing.assert_allclose(active_passive_solve(PASSIVE_NEEDED, nu).q, expected, atol=1e-6)

    def test_threshold_location(self):
        def gap_sign(nu1):
            nu = [1 - nu1, nu1, 0, 0]
            return 1.0 if diagnose_gap(PASSIVE_NEEDED, nu, smith_solve(PASSIVE_NEEDED, nu)).gap_present else -1.0

        lo, hi = 0.3, 0.45
        while hi - lo > 1e-8:
            mid = 0.5 * (lo + hi)
            if gap_sign(mid) > 0:
                lo = mid
            else:
                hi = mid
        # boundary at (b - 1) / 2b with b = 5
        assert 0.5 * (lo + hi) == pytest.approx(0.4, abs=1e-6)


class TestSingleInequality:
    def test_klotz_correction(self):
        r = fenchel_single_inequality(KLOTZ_U, 0.0, KLOTZ_NU)
        assert r.case == "B"
        np.testing.assert_allclose(r.q, np.array([1, 12, 0, 0, 7]) / 20, atol=1e-12)
        assert r.value == pytest.approx(0.888123, abs=1e-5)
        klotz = kerridge_inaccuracy(KLOTZ_NU, klotz_candidate(KLOTZ_U, KLOTZ_NU))
        assert klotz == pytest.approx(0.890668, abs=1e-5)
        assert klotz > r.value

    def test_case_a(self):
        r = fenchel_single_inequality([-1.0, 1.0, 2.0, 5.0], 0.0, [0.5, 0.5, 0, 0])
        assert r.case == "A"
        np.testing.assert_allclose(r.q, [0.5, 0.5, 0, 0], atol=1e-10)

    def test_case_b_solves_primal(self):
        # the closed form agrees with a direct search on the passive mass
        r = fenchel_single_inequality(KLOTZ_U, 0.0, KLOTZ_NU)
        model = ConstraintModel.from_arrays([KLOTZ_U], kinds=["le"])
        ap = active_passive_solve(model, KLOTZ_NU)
        assert ap.value == pytest.approx(r.value, abs=1e-10)
        np.testing.assert_allclose(ap.q, r.q, atol=1e-6)

    def test_klotz_preconditions(self):
        with pytest.raises(ValidationError):
            klotz_candidate([1.0, 2.0], [0.5, 0.5])


class TestActivePassive:
    def test_z_set(self):
        r = active_passive_solve(MEAN_ZERO, [0.5, 0.5, 0.0])
        np.testing.assert_allclose(r.q, np.array([1, 2, 1]) / 4, atol=1e-7)
        assert r.kappa == pytest.approx(4 / 3, abs=1e-7)

    def test_gap_example(self):
        r = active_passive_solve(GAP, [0.6, 0.4, 0.0])
        np.testing.assert_allclose(r.q, np.array([54, 44, 1]) / 99, atol=1e-7)

    def test_nonunique_minimum(self):
        r = active_passive_solve(NONUNIQUE, [0, 1, 0])
        assert r.value == pytest.approx(math.log(2), abs=1e-10)
        assert NONUNIQUE.contains(r.q, tol=1e-9)

    def test_no_passive_letters(self):
        r = active_passive_solve(MEAN_ZERO, [0.2, 0.3, 0.5])
        assert r.kappa == 1.0
        assert MEAN_ZERO.contains(r.q, tol=1e-9)
