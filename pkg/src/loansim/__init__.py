"""Sequential loan-decision simulator: biased synthetic populations, five
uncertainty-handling decision policies under a quarterly budget, fairness and
utility evaluation against ground truth, and a resumable sweep harness."""

from .glm import LogisticModel, UtilityParams
from .metrics import MetricRow
from .params import RunParams
from .policies import Method, PolicyConfig, PolicyDecision, Provenance
from .simulator import QuarterOutcome, SimConfig, run_all_methods, run_method, simulate
from .synthgen import Applicant, BiasConfig, Cohort, Population

__all__ = [
    "Applicant", "BiasConfig", "Cohort", "LogisticModel", "Method",
    "MetricRow", "PolicyConfig", "PolicyDecision", "Population", "Provenance",
    "QuarterOutcome", "RunParams", "SimConfig", "UtilityParams",
    "run_all_methods", "run_method", "simulate",
]
