"""Simulator and toolkit for k-node distributed quantum order finding."""

__version__ = "0.1.0"

from .bitmath import BitString, PhaseFraction, dt_distance, frac_bits, slice_bits
from .combine import CombineReport, combine_results, correction_bit, hypothesis_check, theorem_oracle
from .distsim import CommLedger, NodePlan, RunOutcome, comm_cost, make_plan, plan_from_bits, qubit_budget, run_distributed
from .errors import (
    AttemptsExhausted,
    CorrectionMismatch,
    DistShorError,
    OracleCapExceeded,
    OrderNotFound,
    PlanError,
    QubitCapExceeded,
)
from .numtheory import FactorReport, OrderResult, order_bruteforce, recover_order, shor_factor
from .phasedist import joint_outcome_prob, node_phase, pe_marginal_prob, pe_prob, pe_sample

__all__ = [
    "AttemptsExhausted",
    "BitString",
    "CombineReport",
    "CommLedger",
    "CorrectionMismatch",
    "DistShorError",
    "FactorReport",
    "NodePlan",
    "OracleCapExceeded",
    "OrderNotFound",
    "OrderResult",
    "PhaseFraction",
    "PlanError",
    "QubitCapExceeded",
    "RunOutcome",
    "combine_results",
    "comm_cost",
    "correction_bit",
    "dt_distance",
    "frac_bits",
    "hypothesis_check",
    "joint_outcome_prob",
    "make_plan",
    "node_phase",
    "order_bruteforce",
    "pe_marginal_prob",
    "pe_prob",
    "pe_sample",
    "plan_from_bits",
    "qubit_budget",
    "recover_order",
    "run_distributed",
    "shor_factor",
    "slice_bits",
    "theorem_oracle",
]
