"""Exact impersonation and substitution attack analysis.

Everything here is computed by brute force over the finite spaces: the
attacker's best forgery is found by maximizing exact subset
probabilities, never by trusting a closed form.  The closed forms (the
1/|T| + eps' impersonation bound, the eps + |T|*eps' substitution bound,
the |T|*eps' posterior-distance bound) enter only as the *bounds* the
measured maxima are compared against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import PreconditionError, SpaceMismatchError
from .exact_math import check_probability, format_rational
from .hash_family import HashFamily
from .key_model import (
    Distribution,
    conditional,
    distance_to_uniform,
    make_spike,
    subset_probability,
)


@dataclass(frozen=True)
class AttackReport:
    """Outcome of maximizing one attack over all forgeries."""

    best_forgery: tuple[int, int]
    success_probability: Fraction
    bound: Fraction
    bound_holds: bool
    bound_tight: bool

    def to_json_dict(self) -> dict:
        return {
            "best_forgery": list(self.best_forgery),
            "success_probability": format_rational(self.success_probability),
            "bound": format_rational(self.bound),
            "bound_holds": self.bound_holds,
            "bound_tight": self.bound_tight,
        }


@dataclass(frozen=True)
class RoundEntry:
    """Per-(message, tag) row of a round profile."""

    message: int
    tag: int
    occurrence: Fraction
    cond_success: Fraction
    posterior_delta: Fraction
    best_forgery: tuple[int, int]


@dataclass(frozen=True)
class RoundProfile:
    """Occurrence/attack table over all positive-probability observed pairs."""

    entries: tuple[RoundEntry, ...]

    CSV_HEADER = ["m", "t", "occurrence", "cond_success", "posterior_delta"]

    def to_csv_rows(self) -> list[list[str]]:
        rows = [list(self.CSV_HEADER)]
        for e in self.entries:
            rows.append(
                [
                    str(e.message),
                    str(e.tag),
                    format_rational(e.occurrence),
                    format_rational(e.cond_success),
                    format_rational(e.posterior_delta),
                ]
            )
        return rows


@dataclass(frozen=True)
class ScanSummary:
    """Aggregates of a beneficial-moment scan under a message distribution."""

    threshold: Fraction
    beneficial_probability: Fraction
    break_probability: Fraction
    beneficial_pairs: tuple[tuple[int, int], ...]

    def to_json_dict(self) -> dict:
        return {
            "threshold": format_rational(self.threshold),
            "beneficial_probability": format_rational(self.beneficial_probability),
            "break_probability": format_rational(self.break_probability),
            "beneficial_pairs": [list(p) for p in self.beneficial_pairs],
        }


@dataclass(frozen=True)
class WorstCaseScenario:
    """A sharp attack instance: family, key distribution, observed pair."""

    family: HashFamily
    key_dist: Distribution
    observed: tuple[int, int]
    k_plus: int
    minus_set: frozenset[int]
    eps_prime: Fraction


def _check_spaces(family: HashFamily, key_dist: Distribution) -> None:
    if key_dist.size != family.num_keys:
        raise SpaceMismatchError(
            f"distribution over {key_dist.size} keys, family has {family.num_keys}"
        )


def impersonation_success(family: HashFamily, key_dist: Distribution) -> AttackReport:
    """Best no-information forgery: maximize P{f_K(m) = t} over all (m, t)."""
    _check_spaces(family, key_dist)
    family.certify()
    best = (0, 0)
    best_p = Fraction(-1)
    for m in range(family.num_messages):
        for t in range(family.num_tags):
            pr = subset_probability(key_dist, family.preimage_slice(m, t))
            if pr > best_p:
                best, best_p = (m, t), pr
    bound = Fraction(1, family.num_tags) + distance_to_uniform(key_dist)
    return AttackReport(best, best_p, bound, best_p <= bound, best_p == bound)


def _best_substitution(
    family: HashFamily,
    key_dist: Distribution,
    m: int,
    t: int,
    slice_prob: Fraction,
) -> tuple[tuple[int, int], Fraction]:
    """Best forgery given the observed pair (m, t); ties break low."""
    if family.num_messages < 2:
        raise PreconditionError(
            "message_space_too_small", "substitution needs at least two messages"
        )
    best = None
    best_p = Fraction(-1)
    for m2 in range(family.num_messages):
        if m2 == m:
            continue
        for t2 in range(family.num_tags):
            pr = subset_probability(key_dist, family.double_slice(m, t, m2, t2))
            if pr > best_p:
                best, best_p = (m2, t2), pr
    return best, best_p / slice_prob


def substitution_success(
    family: HashFamily, key_dist: Distribution, observed: tuple[int, int]
) -> AttackReport:
    """Best forgery conditioned on having seen a valid (m, t)."""
    _check_spaces(family, key_dist)
    m, t = observed
    slice_prob = subset_probability(key_dist, family.preimage_slice(m, t))
    if slice_prob == 0:
        raise PreconditionError(
            "observed_pair_zero_probability", f"pair ({m}, {t}) never occurs"
        )
    best, success = _best_substitution(family, key_dist, m, t, slice_prob)
    cert = family.certify()
    bound = cert.epsilon + family.num_tags * distance_to_uniform(key_dist)
    return AttackReport(best, success, bound, success <= bound, success == bound)


def posterior_trace_distance(
    family: HashFamily, key_dist: Distribution, observed: tuple[int, int]
) -> tuple[Fraction, Fraction]:
    """Distance of the key posterior (given a valid pair) to uniform, and its bound."""
    _check_spaces(family, key_dist)
    m, t = observed
    keys = family.preimage_slice(m, t)
    if subset_probability(key_dist, keys) == 0:
        raise PreconditionError(
            "observed_pair_zero_probability", f"pair ({m}, {t}) never occurs"
        )
    cond, _ = conditional(key_dist, keys)
    value = distance_to_uniform(cond)
    bound = family.num_tags * distance_to_uniform(key_dist)
    return value, bound


def worst_case_spike(
    p: int, eps_prime: Fraction
) -> tuple[Distribution, int, frozenset[int], tuple[int, int]]:
    """Spike placement that makes every attack bound sharp for the affine family.

    The favored key is (a=1, b=0); the depressed keys are slope-a keys
    (a != 1, b=0), all of which agree with the favored key on message 0.
    Observing (0, f_{k+}(0)) = (0, 0) is then maximally informative.
    Returns (distribution, k_plus, minus_set, observed).
    """
    eps_prime = Fraction(eps_prime)
    n = p * p
    k_plus = 1 * p + 0
    if eps_prime == 0:
        return Distribution.uniform(n), k_plus, frozenset(), (0, 0)
    if eps_prime > Fraction(p - 1, n):
        raise PreconditionError(
            "eps_prime_too_large_for_construction",
            f"eps_prime={eps_prime} exceeds (p-1)/p^2 = {p - 1}/{n}",
        )
    width = max(1, math.ceil(eps_prime * n))
    minus = frozenset(a * p for a in range(p) if a != 1)
    minus = frozenset(sorted(minus)[:width])
    dist = make_spike(n, eps_prime, k_plus, minus)
    return dist, k_plus, minus, (0, 0)


def worst_case_scenario(p: int, eps_prime: Fraction) -> WorstCaseScenario:
    """Affine family plus the spike that attains every attack bound exactly."""
    if p < 3:
        raise PreconditionError("modulus_too_small", "construction needs p >= 3")
    family = HashFamily.affine(p)
    dist, k_plus, minus, observed = worst_case_spike(p, eps_prime)
    return WorstCaseScenario(family, dist, observed, k_plus, minus, Fraction(eps_prime))


def beneficial_moment_scan(
    family: HashFamily,
    key_dist: Distribution,
    threshold: Fraction,
    message_dist: Distribution | None = None,
) -> tuple[RoundProfile, ScanSummary]:
    """Tabulate every observable pair and how attractive attacking there is.

    For each (m, t) with positive occurrence probability the profile
    records the occurrence probability, the attacker's best conditional
    substitution success, and the posterior key distance to uniform.
    The summary weighs rows by the message distribution (uniform unless
    supplied): the probability that a round is "beneficial" (conditional
    success >= threshold) and the unconditional per-round probability of
    a successful substitution by an always-attacking adversary.
    """
    _check_spaces(family, key_dist)
    threshold = check_probability(Fraction(threshold), "threshold")
    if message_dist is None:
        message_dist = Distribution.uniform(family.num_messages)
    elif message_dist.size != family.num_messages:
        raise SpaceMismatchError(
            f"message distribution over {message_dist.size}, family has {family.num_messages}"
        )

    entries = []
    beneficial_prob = Fraction(0)
    break_prob = Fraction(0)
    beneficial_pairs = []
    for m in range(family.num_messages):
        for t in range(family.num_tags):
            keys = family.preimage_slice(m, t)
            occurrence = subset_probability(key_dist, keys)
            if occurrence == 0:
                continue
            best, cond_success = _best_substitution(family, key_dist, m, t, occurrence)
            cond, _ = conditional(key_dist, keys)
            posterior_delta = distance_to_uniform(cond)
            entries.append(
                RoundEntry(m, t, occurrence, cond_success, posterior_delta, best)
            )
            weight = message_dist[m] * occurrence
            break_prob += weight * cond_success
            if cond_success >= threshold:
                beneficial_prob += weight
                beneficial_pairs.append((m, t))

    summary = ScanSummary(
        threshold, beneficial_prob, break_prob, tuple(beneficial_pairs)
    )
    return RoundProfile(tuple(entries)), summary
