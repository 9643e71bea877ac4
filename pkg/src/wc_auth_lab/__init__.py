"""Exact-arithmetic laboratory for Wegman-Carter authentication with
partially known keys: hash-family certification, attack maximization,
posterior analysis, and the real-vs-ideal distinguishing game."""

from fractions import Fraction

from .exact_math import FieldElement, PrimeField, format_rational, parse_rational
from .hash_family import FamilyCertificate, HashFamily
from .key_model import (
    Distribution,
    SubsetBoundReport,
    SupportSplit,
    check_subset_bounds,
    conditional,
    distance_to_uniform,
    make_spike,
    subset_probability,
    support_split,
    trace_distance,
)
from .attack_analysis import (
    AttackReport,
    RoundProfile,
    ScanSummary,
    WorstCaseScenario,
    beneficial_moment_scan,
    impersonation_success,
    posterior_trace_distance,
    substitution_success,
    worst_case_scenario,
)
from .channel_game import (
    AttackStrategy,
    ChannelOutcome,
    DeterministicStrategy,
    GameReport,
    IndistinguishabilityVerdict,
    MixtureStrategy,
    advantage,
    advantage_by_simulation,
    game_bound,
    optimal_deterministic_strategy,
    per_message_advantage,
    run_round,
    strategy_from_json_dict,
    verify_indistinguishability,
)

__version__ = "0.1.0"

__all__ = [
    "Fraction",
    "FieldElement",
    "PrimeField",
    "format_rational",
    "parse_rational",
    "FamilyCertificate",
    "HashFamily",
    "Distribution",
    "SubsetBoundReport",
    "SupportSplit",
    "check_subset_bounds",
    "conditional",
    "distance_to_uniform",
    "make_spike",
    "subset_probability",
    "support_split",
    "trace_distance",
    "AttackReport",
    "RoundProfile",
    "ScanSummary",
    "WorstCaseScenario",
    "beneficial_moment_scan",
    "impersonation_success",
    "posterior_trace_distance",
    "substitution_success",
    "worst_case_scenario",
    "AttackStrategy",
    "ChannelOutcome",
    "DeterministicStrategy",
    "GameReport",
    "IndistinguishabilityVerdict",
    "MixtureStrategy",
    "advantage",
    "advantage_by_simulation",
    "game_bound",
    "optimal_deterministic_strategy",
    "per_message_advantage",
    "run_round",
    "strategy_from_json_dict",
    "verify_indistinguishability",
    "__version__",
]
