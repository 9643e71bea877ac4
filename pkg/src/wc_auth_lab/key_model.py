"""Exact probability distributions over finite index spaces.

Used for the authentication key (and, unchanged, for messages in the
distinguishing game).  Everything is a Fraction; trace distances and
subset probabilities are exact, and the subset/conditional deviation
bounds driven by the distance to uniform can be checked as exact
(in)equalities, including their tightness witnesses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError, SpaceMismatchError
from .exact_math import format_rational, parse_rational


class Distribution:
    """An exact probability mass function over indices 0..size-1."""

    __slots__ = ("masses", "size")

    def __init__(self, masses: Sequence[Fraction]):
        masses = tuple(Fraction(m) for m in masses)
        if not masses:
            raise PreconditionError("empty_distribution", "need at least one mass")
        if any(m < 0 for m in masses):
            raise PreconditionError("negative_mass", "all masses must be >= 0")
        total = sum(masses)
        if total != 1:
            raise PreconditionError("masses_not_normalized", f"masses sum to {total}, not 1")
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "size", len(masses))

    def __setattr__(self, name, val):  # pragma: no cover - guard only
        raise AttributeError("Distribution is immutable")

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls([Fraction(1, n)] * n)

    @classmethod
    def point_mass(cls, n: int, index: int) -> "Distribution":
        masses = [Fraction(0)] * n
        masses[index] = Fraction(1)
        return cls(masses)

    @classmethod
    def from_weights(cls, weights: Sequence[int]) -> "Distribution":
        """Normalize nonnegative integer weights into an exact pmf."""
        total = sum(weights)
        if total <= 0:
            raise PreconditionError("zero_total_weight", "weights must not all be zero")
        return cls([Fraction(w, total) for w in weights])

    def __getitem__(self, index: int) -> Fraction:
        return self.masses[index]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Distribution) and self.masses == other.masses

    def __hash__(self) -> int:
        return hash(self.masses)

    def __repr__(self) -> str:
        return f"Distribution(size={self.size})"

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"n": self.size, "masses": [format_rational(m) for m in self.masses]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "Distribution":
        """Accepts the dense form and the compact spike form."""
        if data.get("kind") == "spike":
            return make_spike(
                data["n"],
                parse_rational(data["eps_prime"]),
                data["k_plus"],
                set(data["minus_set"]),
            )
        masses = [parse_rational(m) for m in data["masses"]]
        if len(masses) != data["n"]:
            raise PreconditionError("mass_count_mismatch", "n does not match masses length")
        return cls(masses)

    @classmethod
    def from_json(cls, text: str) -> "Distribution":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class SupportSplit:
    """Indices above and below the uniform mass 1/n.

    The overshoot of ``plus_set`` and the undershoot of ``minus_set``
    both equal the trace distance to uniform.
    """

    plus_set: frozenset[int]
    minus_set: frozenset[int]


def trace_distance(p: Distribution, q: Distribution) -> Fraction:
    """Half the L1 distance between two pmfs; 0 iff they are equal."""
    if p.size != q.size:
        raise SpaceMismatchError(f"sizes differ: {p.size} vs {q.size}")
    return sum((abs(a - b) for a, b in zip(p.masses, q.masses)), Fraction(0)) / 2


def distance_to_uniform(p: Distribution) -> Fraction:
    u = Fraction(1, p.size)
    return sum((abs(m - u) for m in p.masses), Fraction(0)) / 2


def support_split(p: Distribution) -> SupportSplit:
    u = Fraction(1, p.size)
    plus = frozenset(k for k, m in enumerate(p.masses) if m > u)
    minus = frozenset(k for k, m in enumerate(p.masses) if m < u)
    return SupportSplit(plus, minus)


def make_spike(
    n: int, eps_prime: Fraction, k_plus: int, minus_set: Iterable[int]
) -> Distribution:
    """A single key raised by eps_prime above uniform, balanced on minus_set.

    P(k_plus) = 1/n + eps_prime, P(k) = 1/n - eps_prime/|minus_set| on the
    minus set, 1/n elsewhere.  The trace distance to uniform is exactly
    eps_prime.  Preconditions are checked one by one so the violated
    constraint is named in the error.
    """
    eps_prime = Fraction(eps_prime)
    minus = frozenset(minus_set)
    if not 0 <= k_plus < n:
        raise PreconditionError("k_plus_out_of_range", f"k_plus={k_plus} not in [0, {n})")
    if any(not 0 <= k < n for k in minus):
        raise PreconditionError("minus_set_out_of_range", f"minus_set not within [0, {n})")
    if k_plus in minus:
        raise PreconditionError("k_plus_in_minus_set", "k_plus must not lie in minus_set")
    if eps_prime < 0:
        raise PreconditionError("eps_prime_negative", f"eps_prime={eps_prime} < 0")
    if eps_prime > 1 - Fraction(1, n):
        raise PreconditionError(
            "eps_prime_exceeds_max_mass", f"1/{n} + {eps_prime} exceeds 1"
        )
    if eps_prime > 0 and eps_prime > Fraction(len(minus), n):
        raise PreconditionError(
            "eps_prime_exceeds_minus_capacity",
            f"eps_prime={eps_prime} > |minus_set|/n = {len(minus)}/{n}; "
            "a minus mass would go negative",
        )

    u = Fraction(1, n)
    masses = [u] * n
    if eps_prime > 0:
        masses[k_plus] = u + eps_prime
        debit = eps_prime / len(minus)
        for k in minus:
            masses[k] = u - debit
    return Distribution(masses)


def subset_probability(p: Distribution, subset: Iterable[int]) -> Fraction:
    total = Fraction(0)
    for k in subset:
        if not 0 <= k < p.size:
            raise PreconditionError("index_out_of_range", f"index {k} not in [0, {p.size})")
        total += p.masses[k]
    return total


def conditional(p: Distribution, subset: Iterable[int]) -> tuple[Distribution, tuple[int, ...]]:
    """Condition on a subset; returns the pmf over the subset and its sorted indices."""
    indices = tuple(sorted(set(subset)))
    prob = subset_probability(p, indices)
    if prob == 0:
        raise PreconditionError("conditioning_on_null_set", "subset has probability zero")
    return Distribution([p.masses[k] / prob for k in indices]), indices


@dataclass(frozen=True)
class SubsetBoundReport:
    """Exact deviation values and the uniform-distance bounds they obey.

    Three checks for nested subsets inner <= outer of the index space:
    the outer subset's probability deviation from |outer|/n (bounded by
    the distance to uniform), the conditional probability deviation of
    inner within outer, and the conditional distribution's own distance
    to uniform (both bounded by (n/|outer|) times the distance).
    """

    delta: Fraction
    subset_dev: Fraction
    subset_bound: Fraction
    conditional_dev: Fraction
    conditional_delta: Fraction
    scaled_bound: Fraction

    @property
    def subset_ok(self) -> bool:
        return self.subset_dev <= self.subset_bound

    @property
    def conditional_ok(self) -> bool:
        return self.conditional_dev <= self.scaled_bound

    @property
    def conditional_delta_ok(self) -> bool:
        return self.conditional_delta <= self.scaled_bound

    @property
    def all_ok(self) -> bool:
        return self.subset_ok and self.conditional_ok and self.conditional_delta_ok


def check_subset_bounds(
    p: Distribution, outer: Iterable[int], inner: Iterable[int]
) -> SubsetBoundReport:
    """Evaluate the three subset-deviation bounds on nested subsets."""
    outer_set = frozenset(outer)
    inner_set = frozenset(inner)
    if not inner_set <= outer_set:
        raise PreconditionError("not_nested", "inner must be a subset of outer")

    n = p.size
    delta = distance_to_uniform(p)

    p_outer = subset_probability(p, outer_set)
    subset_dev = abs(p_outer - Fraction(len(outer_set), n))

    if p_outer == 0:
        raise PreconditionError("conditioning_on_null_set", "outer subset has probability zero")

    p_inner = subset_probability(p, inner_set)
    conditional_dev = abs(p_inner / p_outer - Fraction(len(inner_set), len(outer_set)))

    cond, _ = conditional(p, outer_set)
    conditional_delta = distance_to_uniform(cond)

    scaled = Fraction(n, len(outer_set)) * delta
    return SubsetBoundReport(
        delta=delta,
        subset_dev=subset_dev,
        subset_bound=delta,
        conditional_dev=conditional_dev,
        conditional_delta=conditional_delta,
        scaled_bound=scaled,
    )
