import math

import numpy as np
import pytest

from models import (
    FIVE,
    GAP,
    LR_NU,
    MDI_NU,
    MDI_REFERENCE,
    MEAN_ZERO,
    QL_NU,
    WETS,
    mdi_model,
    second_moment_model,
)
from simplex_mle.duals import diagnose_gap, smith_solve
from simplex_mle.elcompare import (
    ELFailure,
    compare,
    el_solve,
    evidence_grade,
    model_at,
    profile_estimating_equations,
    qin_lawless,
    second_moment,
    mdi_diagnose,
)
from simplex_mle.exceptions import ValidationError
from simplex_mle.geometry import ConstraintModel, Verdict, classify
from simplex_mle.pp import pp_solve

EL_THETA_1 = [0.00286, 0.99667, 0.00048]
EL_THETA_2 = [0.01429, 0.98333, 0.00238]


class TestELSolve:
    def test_second_moment_example(self):
        for theta, expected in [(1.01, EL_THETA_1), (1.05, EL_THETA_2)]:
            el = el_solve(second_moment_model(theta), LR_NU)
            assert el.ok
            np.testing.assert_array_equal(el.active, [0, 1, 4])
            np.testing.assert_allclose(el.p_active, expected, atol=5e-4)
            assert el.p_active.sum() == pytest.approx(1.0, abs=1e-12)

    def test_convex_hull_failure(self):
        el = el_solve(MEAN_ZERO, [1, 0, 0])
        assert el.failure is ELFailure.CONVEX_HULL and el.p_active is None
        with pytest.raises(ValidationError):
            el.padded(3)

    def test_zero_likelihood_failure(self):
        assert el_solve(MEAN_ZERO, [0.5, 0.5, 0]).failure is ELFailure.ZERO_LIKELIHOOD

    @pytest.mark.parametrize("model,nu", [(MEAN_ZERO, [1, 0, 0]), (MEAN_ZERO, [0.5, 0.5, 0]),
                                          (WETS, [0, 1, 0]), (GAP, [0.6, 0.4, 0]),
                                          (MEAN_ZERO, [0.5, 0, 0.5])])
    def test_failures_follow_classification(self, model, nu):
        verdict = classify(model, nu).verdict
        failure = el_solve(model, nu).failure
        expected = {Verdict.HSET: ELFailure.CONVEX_HULL, Verdict.ZSET: ELFailure.ZERO_LIKELIHOOD,
                    Verdict.REGULAR: None}[verdict]
        assert failure is expected

    def test_full_type_matches_primal(self):
        nu = [0.2, 0.3, 0.5]
        assert el_solve(MEAN_ZERO, nu).value == pytest.approx(pp_solve(MEAN_ZERO, nu).value, abs=1e-10)

    def test_no_gap_matches_primal(self):
        nu = [0.5, 0, 0.5]
        assert not diagnose_gap(MEAN_ZERO, nu, smith_solve(MEAN_ZERO, nu)).gap_present
        el = el_solve(MEAN_ZERO, nu)
        pp = pp_solve(MEAN_ZERO, nu)
        assert el.value == pytest.approx(pp.value, abs=1e-6)
        np.testing.assert_allclose(el.padded(3), pp.q, atol=1e-6)

    @pytest.mark.parametrize("model,nu", [(GAP, [0.6, 0.4, 0]), (second_moment_model(1.01), LR_NU),
                                          (second_moment_model(1.05), LR_NU)])
    def test_gap_makes_el_strictly_worse(self, model, nu):
        assert diagnose_gap(model, nu, smith_solve(model, nu)).gap_present
        assert pp_solve(model, nu).value < el_solve(model, nu).value - 1e-6


class TestEvidence:
    @pytest.mark.parametrize("log10,label", [(0.1, "barely worth mentioning for model 2"),
                                             (0.7, "substantial for model 2"),
                                             (-1.2, "strong for model 1"),
                                             (1.7, "very strong for model 2"),
                                             (4.9, "decisive for model 2")])
    def test_grades(self, log10, label):
        assert evidence_grade(log10 * math.log(10)) == label


class TestCompare:
    def test_lr_versus_elr(self):
        rep = compare(second_moment_model(1.01), second_moment_model(1.05), LR_NU, n=10)
        assert rep.lr.ratio == pytest.approx(1.4746, abs=1e-4)
        assert rep.elr.ratio == pytest.approx(75031.31, rel=1e-6)
        assert rep.discordant
        assert not rep.sign_discordant
        assert rep.lr_evidence != rep.elr_evidence

    def test_identical_models(self):
        m = second_moment_model(1.01)
        rep = compare(m, m, LR_NU, n=10)
        assert rep.lr.ratio == 1.0 and rep.elr.ratio == 1.0
        assert not rep.discordant

    def test_fully_observed_type(self):
        rep = compare(GAP, GAP, [0.3, 0.3, 0.4], n=20)
        assert rep.lr.log_ratio == pytest.approx(rep.elr.log_ratio, abs=1e-12)

    def test_el_failure_is_recorded(self):
        shifted = ConstraintModel.from_arrays([[-1.0, 0.0, 1.0]], rhs=[0.5], labels=[-1, 0, 1])
        rep = compare(MEAN_ZERO, shifted, [1, 0, 0], n=5)
        assert rep.elr is None and rep.discordant and rep.elr_evidence is None

    def test_needs_sample_size(self):
        with pytest.raises(ValidationError):
            compare(GAP, GAP, [0.3, 0.3, 0.4])

    def test_alphabet_mismatch(self):
        with pytest.raises(ValidationError):
            compare(MEAN_ZERO, GAP, [0.3, 0.3, 0.4], n=3)


class TestProfile:
    def test_generators(self):
        np.testing.assert_allclose(qin_lawless(FIVE)(0.5), [FIVE - 0.5, FIVE**2 - 1.5])
        np.testing.assert_allclose(second_moment(FIVE)(2.0), [FIVE**2 - 2.0])
        assert model_at(second_moment(FIVE), 1.0).r == 1

    def test_qin_lawless_el_fails_everywhere(self):
        prof = profile_estimating_equations(qin_lawless(FIVE), [-0.2, -0.1, 0.0, 0.1, 0.2], QL_NU)
        assert all(r.el_failure is ELFailure.CONVEX_HULL for r in prof.rows)
        assert all(r.gap_present is None for r in prof.rows)
        assert prof.argmin_el is None
        row = prof.rows[2]
        assert row.primal_value == pytest.approx(0.812242, abs=1e-5)
        np.testing.assert_allclose(row.q, [0.1625, 0, 0.525, 0.3, 0.0125], atol=1e-4)
        assert all(math.isfinite(r.primal_value) for r in prof.rows)

    def test_single_point(self):
        prof = profile_estimating_equations(second_moment(FIVE), [1.01], LR_NU)
        assert len(prof.rows) == 1
        assert prof.argmin_primal == prof.argmin_el == 1.01
        assert prof.rows[0].gap_present

    def test_argmins(self):
        grid = [1.01, 1.05, 1.2]
        prof = profile_estimating_equations(second_moment(FIVE), grid, LR_NU)
        assert prof.argmin_primal == grid[int(np.argmin([r.primal_value for r in prof.rows]))]
        assert prof.argmin_el == grid[int(np.argmin([r.el_value for r in prof.rows]))]

    def test_dimension_check(self):
        with pytest.raises(ValidationError):
            profile_estimating_equations(second_moment([0, 1]), [1.0], LR_NU)


class TestMDI:
    def test_table(self):
        rep = mdi_diagnose(mdi_model(), MDI_NU)
        assert rep.classification.verdict is Verdict.HSET
        assert not rep.mdi_exists
        q = rep.pp_result.q
        assert q[0] == pytest.approx(0.1, abs=1e-6)
        assert mdi_model().residuals(q).max() <= 1e-6
        # the tabulated solution is another member of the same solution set
        assert mdi_model().contains(MDI_REFERENCE.ravel(), tol=1e-9)
        assert rep.pp_result.value == pytest.approx(-math.log(MDI_REFERENCE[0, 0]), abs=1e-6)

    def test_z_set(self):
        rep = mdi_diagnose(MEAN_ZERO, [0.5, 0.5, 0])
        assert rep.classification.verdict is Verdict.ZSET and not rep.mdi_exists
        np.testing.assert_allclose(rep.pp_result.q, [0.25, 0.5, 0.25], atol=1e-6)

    def test_positive_type(self):
        assert mdi_diagnose(MEAN_ZERO, [0.2, 0.3, 0.5]).mdi_exists
