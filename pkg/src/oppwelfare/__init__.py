"""Opportunity-sensitive social welfare, inequality-of-opportunity indices
and opportunity dominance for finite societies of types."""

from .dominance import (
    CROSSING,
    DOMINATED,
    DOMINATES,
    EQUIVALENT,
    CAFamilyResult,
    DominanceVerdict,
    dominance_ca_family,
    dominance_check,
    normalize_utility_for_dominance,
)
from .estimator import OpportunityWelfare
from .exceptions import DomainError, NumericError, SchemaError, ValidationError
from .indices import (
    EvaluationReport,
    InequalityReport,
    SweepRow,
    atkinson_edei,
    edei,
    evaluate,
    inequality_report,
    sweep,
    theta_from_rho,
)
from .model import (
    IncomeDistribution,
    Society,
    TypeEntry,
    aggregate,
    expected_utility,
    geometric_mean,
    mean,
    merge_identical,
    split_type,
    transform_converge,
    transform_permute,
    transform_scale,
    type_utilities,
)
from .persist import (
    Binning,
    MicroRecord,
    dumps_society,
    emit_report,
    ingest_microdata,
    load_society,
    read_microdata_csv,
    save_society,
)
from .utility import LOG, AffineUtility, LogUtility, PowerUtility, TabulatedUtility, UtilitySpec, parse_utility
from .welfare import (
    MeanDivergence,
    SecondOrderTransform,
    WeightVector,
    WelfareParams,
    bregman_divergence,
    cgf,
    cgf_derivative,
    exponential_transform,
    identity_transform,
    kl_divergence,
    optimal_weights,
    phi_theta,
    phi_theta_inverse,
    variational_objective,
    welfare_mean_divergence,
    welfare_mean_variance,
    welfare_primal,
    welfare_second_order,
    welfare_variational,
)

__version__ = "0.1.0"
