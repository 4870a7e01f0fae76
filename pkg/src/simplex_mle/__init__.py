"""Multinomial maximum likelihood over polyhedral subsets of the probability simplex.

The simplified Lagrange dual that is usually used for this problem breaks
down when some outcomes are unobserved.  This package classifies such
cases, repairs the dual, and solves the primal problem by perturbation.
"""
__version__ = "0.1.0"

from .conjugate import ConjugateResult, conjugate, mu_bar, mu_hat, xi
from .core import (
    Alphabet,
    LikelihoodRatio,
    TypeVector,
    i_divergence,
    kerridge_inaccuracy,
    likelihood_ratio,
)
from .duals import (
    APResult,
    DualSolution,
    DualStatus,
    GapDiagnosis,
    active_passive_solve,
    diagnose_gap,
    fenchel_single_inequality,
    klotz_candidate,
    primal_from_dual,
    smith_solve,
)
from .elcompare import (
    ComparisonReport,
    ELFailure,
    ELSolution,
    ThetaProfile,
    compare,
    el_solve,
    mdi_diagnose,
    profile_estimating_equations,
    qin_lawless,
    second_moment,
)
from .estimators import ConstrainedMultinomialMLE, EmpiricalLikelihood
from .exceptions import (
    ConvergenceError,
    DimensionTooLargeError,
    EmptySliceError,
    InfeasibleError,
    InvariantViolation,
    SimplexMLEError,
    StructuralZeroError,
    UnboundedError,
    ValidationError,
)
from .geometry import (
    Classification,
    ConstraintModel,
    ConstraintRow,
    RowKind,
    Verdict,
    classify,
    polar_cone_membership,
    slice_passive,
    support_check,
)
from .pp import PerturbationSchedule, PPResult, PPTrace, perturb_type, pp_solve, residuals

