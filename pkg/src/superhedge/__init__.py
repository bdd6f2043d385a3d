"""Utility based super-replication pricing on finite state markets.

The package prices contingent claims by convex duality: the cheapest
dominating capital on the primal side, the largest expectation under
separating measures on the dual side, and a battery of polar cone and
entropy checks that certify the two sides describe the same object.
"""

from .errors import (DimensionError, DomainError, DualityGapError,
                     EmptyMeasureSet, NoMeasure, NonInada, NoPositiveRegion,
                     ParseError, PreconditionError, SuperhedgeError,
                     UnboundedPrice, ValidationError)
from .utility import (asymptotic_elasticity_minus, build_utility,
                      check_inada, ConjugatePair, conjugate, custom_utility,
                      exponential_utility, glued_unbounded_utility,
                      GrowthCertificate, growth_constants, InadaReport,
                      log_utility, marginal_inverse, power_utility,
                      RaeResult, slow_loss_utility, UtilityFunction,
                      utility_from_table, v_plus)
from .market import (build_market, Claim, CountableModel,
                     countable_from_config, GainsSpace, gains_space,
                     geometric_weights, make_claim, MarketModel,
                     powerlaw_weights, random_claim, random_market,
                     TreeNode, validate_countable)
from .measures import (classify_measure, classify_series, EntropyReport,
                       full_entropy, loss_entropy, MeasureDensity,
                       MeasurePolytope, mhatv_minus_mv_witness,
                       separating_polytope, SeriesVerdict)
from .cones import (bipolar_check, BipolarReport, build_CU, build_KU,
                    ChainEntry, cone_from_config, cone_summary, CUReport,
                    DualityChainReport, ensure_generators,
                    ensure_halfspaces, member, member_lp, pairing,
                    PolyCone, polar, RepresentationReport,
                    verify_duality_chain, verify_representation)
from .pricing import (DualCertificate, GapStudyResult, price_report,
                      PriceReport, PrimalCertificate, suprep_dual,
                      suprep_primal, truncation_gap_study)

__version__ = "0.1.0"

__all__ = [
    "asymptotic_elasticity_minus", "bipolar_check", "BipolarReport",
    "build_CU", "build_KU", "build_market", "build_utility", "ChainEntry",
    "check_inada", "Claim", "classify_measure", "classify_series",
    "cone_from_config", "cone_summary", "ConjugatePair", "conjugate",
    "CountableModel", "countable_from_config", "CUReport",
    "custom_utility", "DimensionError", "DomainError", "DualCertificate",
    "DualityChainReport", "DualityGapError", "EmptyMeasureSet",
    "ensure_generators", "ensure_halfspaces", "EntropyReport",
    "exponential_utility", "full_entropy", "GainsSpace", "gains_space",
    "GapStudyResult", "geometric_weights", "glued_unbounded_utility",
    "GrowthCertificate", "growth_constants", "InadaReport", "log_utility",
    "loss_entropy", "make_claim", "marginal_inverse", "MarketModel",
    "MeasureDensity", "MeasurePolytope", "member", "member_lp",
    "mhatv_minus_mv_witness", "NoMeasure", "NonInada", "NoPositiveRegion",
    "pairing", "ParseError", "polar", "PolyCone", "power_utility",
    "powerlaw_weights", "PreconditionError", "price_report", "PriceReport",
    "PrimalCertificate", "RaeResult", "random_claim", "random_market",
    "RepresentationReport", "separating_polytope", "SeriesVerdict",
    "slow_loss_utility", "SuperhedgeError", "suprep_dual", "suprep_primal",
    "TreeNode", "truncation_gap_study", "UnboundedPrice",
    "UtilityFunction", "utility_from_table", "ValidationError",
    "v_plus", "verify_duality_chain", "verify_representation",
    "__version__",
]
