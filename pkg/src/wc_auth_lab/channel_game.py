"""Real-vs-ideal distinguishing game for one authentication round.

The real channel tags the message, lets the adversary rewrite the pair,
and verifies; the ideal channel delivers the message untouched or a
rejection symbol, with a simulator attaching the same tag so both views
look alike on the wire.  The environment's distinguishing advantage
equals the probability that a forged message is accepted, and is
computed here by two independent code paths: a joint-probability formula
over key slices, and direct enumeration of (key, message) rounds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import EnumerationGuardError, PreconditionError, SpaceMismatchError
from .exact_math import format_rational, parse_rational
from .hash_family import HashFamily
from .key_model import Distribution, distance_to_uniform, subset_probability

OPTIMIZER_GUARD = 10**9

REJECT = None  # channel output for a rejected delivery


@dataclass(frozen=True)
class DeterministicStrategy:
    """A total rewrite map (m, t) -> (m', t') over the message-tag grid."""

    num_messages: int
    num_tags: int
    moves: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.moves) != self.num_messages * self.num_tags:
            raise PreconditionError(
                "strategy_not_total",
                f"need {self.num_messages * self.num_tags} moves, got {len(self.moves)}",
            )
        for m2, t2 in self.moves:
            if not (0 <= m2 < self.num_messages and 0 <= t2 < self.num_tags):
                raise PreconditionError(
                    "strategy_move_out_of_range", f"move ({m2}, {t2}) out of range"
                )

    def move(self, m: int, t: int) -> tuple[int, int]:
        return self.moves[m * self.num_tags + t]

    @classmethod
    def identity(cls, num_messages: int, num_tags: int) -> "DeterministicStrategy":
        moves = tuple(
            (m, t) for m in range(num_messages) for t in range(num_tags)
        )
        return cls(num_messages, num_tags, moves)

    @classmethod
    def from_map(
        cls, num_messages: int, num_tags: int, mapping: dict[tuple[int, int], tuple[int, int]]
    ) -> "DeterministicStrategy":
        try:
            moves = tuple(
                mapping[(m, t)] for m in range(num_messages) for t in range(num_tags)
            )
        except KeyError as missing:
            raise PreconditionError(
                "strategy_not_total", f"no move for pair {missing.args[0]}"
            ) from None
        return cls(num_messages, num_tags, moves)

    def to_json_dict(self) -> dict:
        return {
            "kind": "deterministic",
            "map": [
                [m, t, *self.move(m, t)]
                for m in range(self.num_messages)
                for t in range(self.num_tags)
            ],
        }


@dataclass(frozen=True)
class MixtureStrategy:
    """A finite convex combination of deterministic strategies."""

    parts: tuple[tuple[Fraction, DeterministicStrategy], ...]

    def __post_init__(self):
        if not self.parts:
            raise PreconditionError("empty_mixture", "mixture needs at least one part")
        if any(w < 0 for w, _ in self.parts):
            raise PreconditionError("negative_weight", "mixture weights must be >= 0")
        if sum(w for w, _ in self.parts) != 1:
            raise PreconditionError("weights_not_normalized", "mixture weights must sum to 1")
        shapes = {(s.num_messages, s.num_tags) for _, s in self.parts}
        if len(shapes) != 1:
            raise SpaceMismatchError("mixture parts act on different spaces")

    @property
    def num_messages(self) -> int:
        return self.parts[0][1].num_messages

    @property
    def num_tags(self) -> int:
        return self.parts[0][1].num_tags

    def to_json_dict(self) -> dict:
        return {
            "kind": "mixture",
            "parts": [
                {"weight": format_rational(w), "map": s.to_json_dict()["map"]}
                for w, s in self.parts
            ],
        }


AttackStrategy = Union[DeterministicStrategy, MixtureStrategy]


def strategy_from_json_dict(data: dict) -> AttackStrategy:
    if data.get("kind") == "deterministic":
        return _strategy_from_map_list(data["map"])
    if data.get("kind") == "mixture":
        parts = tuple(
            (parse_rational(part["weight"]), _strategy_from_map_list(part["map"]))
            for part in data["parts"]
        )
        return MixtureStrategy(parts)
    raise PreconditionError("unknown_strategy_kind", f"kind {data.get('kind')!r}")


def _strategy_from_map_list(entries: Sequence[Sequence[int]]) -> DeterministicStrategy:
    mapping = {(m, t): (m2, t2) for m, t, m2, t2 in entries}
    if not mapping:
        raise PreconditionError("strategy_not_total", "empty strategy map")
    num_messages = max(m for m, _ in mapping) + 1
    num_tags = max(t for _, t in mapping) + 1
    return DeterministicStrategy.from_map(num_messages, num_tags, mapping)


@dataclass(frozen=True)
class ChannelOutcome:
    """One round as the environment sees it; output None means rejected."""

    message: int
    transmitted: tuple[int, int]
    delivered: tuple[int, int]
    output: int | None


def run_round(
    family: HashFamily, key: int, message: int, strategy: DeterministicStrategy
) -> tuple[ChannelOutcome, ChannelOutcome]:
    """Execute one round against the real channel and the simulated ideal one.

    Real: tag, rewrite, verify; the output is m' when the delivered pair
    verifies, else None.  Ideal: the simulator attaches the same tag (so
    the wire view matches) but the functionality only ever delivers the
    original message, and only when the pair came back unmodified.
    """
    t = family.evaluate(key, message)
    delivered = strategy.move(message, t)
    m2, t2 = delivered

    real_output = m2 if family.evaluate(key, m2) == t2 else REJECT
    real = ChannelOutcome(message, (message, t), delivered, real_output)

    ideal_output = message if delivered == (message, t) else REJECT
    ideal = ChannelOutcome(message, (message, t), delivered, ideal_output)
    return real, ideal


def _deterministic_parts(strategy: AttackStrategy) -> tuple[tuple[Fraction, DeterministicStrategy], ...]:
    if isinstance(strategy, DeterministicStrategy):
        return ((Fraction(1), strategy),)
    return strategy.parts


def _check_strategy_shape(family: HashFamily, strategy: AttackStrategy) -> None:
    if (strategy.num_messages, strategy.num_tags) != (family.num_messages, family.num_tags):
        raise SpaceMismatchError(
            f"strategy on {strategy.num_messages}x{strategy.num_tags}, family is "
            f"{family.num_messages}x{family.num_tags}"
        )


def per_message_advantage(
    family: HashFamily, key_dist: Distribution, strategy: AttackStrategy
) -> tuple[Fraction, ...]:
    """For each message, the probability the strategy gets a forgery accepted.

    Entry m is the joint probability, over the key, that the rewritten
    pair (m', t') has m' != m and still verifies.  Computed from key
    slices; mixtures combine their parts linearly.
    """
    _check_strategy_shape(family, strategy)
    if key_dist.size != family.num_keys:
        raise SpaceMismatchError("key distribution does not match family")
    totals = [Fraction(0)] * family.num_messages
    for weight, det in _deterministic_parts(strategy):
        if weight == 0:
            continue
        for m in range(family.num_messages):
            acc = Fraction(0)
            for t in range(family.num_tags):
                m2, t2 = det.move(m, t)
                if m2 == m:
                    continue
                acc += subset_probability(key_dist, family.double_slice(m, t, m2, t2))
            totals[m] += weight * acc
    return tuple(totals)


def advantage(
    family: HashFamily,
    key_dist: Distribution,
    message_dist: Distribution,
    strategy: AttackStrategy,
) -> Fraction:
    """Exact distinguishing advantage of a strategy under a message distribution."""
    if message_dist.size != family.num_messages:
        raise SpaceMismatchError("message distribution does not match family")
    per_message = per_message_advantage(family, key_dist, strategy)
    return sum(
        (message_dist[m] * v for m, v in enumerate(per_message)), Fraction(0)
    )


def advantage_by_simulation(
    family: HashFamily,
    key_dist: Distribution,
    message_dist: Distribution,
    strategy: AttackStrategy,
) -> Fraction:
    """The same advantage, measured by enumerating every (key, message) round.

    Independent of the slice-based formula path: it replays run_round
    for every key and message and adds up the probability mass of rounds
    where the real channel emits a message the ideal one would not.
    """
    _check_strategy_shape(family, strategy)
    if key_dist.size != family.num_keys:
        raise SpaceMismatchError("key distribution does not match family")
    if message_dist.size != family.num_messages:
        raise SpaceMismatchError("message distribution does not match family")
    total = Fraction(0)
    for weight, det in _deterministic_parts(strategy):
        if weight == 0:
            continue
        for key in range(family.num_keys):
            mass_k = key_dist[key]
            if mass_k == 0:
                continue
            for m in range(family.num_messages):
                mass = mass_k * message_dist[m]
                if mass == 0:
                    continue
                real, ideal = run_round(family, key, m, det)
                if real.output != ideal.output:
                    total += weight * mass
    return total


@dataclass(frozen=True)
class GameReport:
    """Advantage of a strategy against the strongest message choice."""

    advantage: Fraction
    bound: Fraction
    bound_holds: bool
    maximizing_strategy: AttackStrategy
    per_message_breakdown: tuple[Fraction, ...]
    best_message: int

    def to_json_dict(self) -> dict:
        return {
            "advantage": format_rational(self.advantage),
            "bound": format_rational(self.bound),
            "bound_holds": self.bound_holds,
            "bound_tight": self.advantage == self.bound,
            "best_message": self.best_message,
            "per_message": [format_rational(v) for v in self.per_message_breakdown],
            "maximizing_strategy": self.maximizing_strategy.to_json_dict(),
        }


def game_bound(family: HashFamily, key_dist: Distribution) -> Fraction:
    """The indistinguishability bound: certificate epsilon plus key imperfection."""
    return family.certify().epsilon + distance_to_uniform(key_dist)


def optimal_deterministic_strategy(
    family: HashFamily, key_dist: Distribution
) -> tuple[DeterministicStrategy, GameReport]:
    """Greedy per-pair maximization; optimal because pairs act independently.

    For each observed (m, t) the strategy picks the substitution whose
    key slice carries the most mass (ties to the smallest (m', t')); the
    reported advantage takes the environment's best message, a point
    mass on the strongest m.
    """
    if key_dist.size != family.num_keys:
        raise SpaceMismatchError("key distribution does not match family")
    if family.num_messages < 2:
        raise PreconditionError(
            "message_space_too_small", "substitution needs at least two messages"
        )
    if family.num_messages * family.num_tags * family.num_keys > OPTIMIZER_GUARD:
        raise EnumerationGuardError("optimizer enumeration guard exceeded")

    moves = []
    per_message = []
    for m in range(family.num_messages):
        value = Fraction(0)
        for t in range(family.num_tags):
            best = None
            best_p = Fraction(-1)
            for m2 in range(family.num_messages):
                if m2 == m:
                    continue
                for t2 in range(family.num_tags):
                    pr = subset_probability(
                        key_dist, family.double_slice(m, t, m2, t2)
                    )
                    if pr > best_p:
                        best, best_p = (m2, t2), pr
            moves.append(best)
            value += best_p
        per_message.append(value)

    strategy = DeterministicStrategy(family.num_messages, family.num_tags, tuple(moves))
    best_message = max(range(family.num_messages), key=lambda m: (per_message[m], -m))
    adv = per_message[best_message]
    bound = game_bound(family, key_dist)
    report = GameReport(adv, bound, adv <= bound, strategy, tuple(per_message), best_message)
    return strategy, report


@dataclass(frozen=True)
class IndistinguishabilityVerdict:
    """Bound check over the optimal strategy and any supplied ones."""

    bound: Fraction
    optimal_report: GameReport
    strategy_advantages: tuple[Fraction, ...]
    max_advantage: Fraction
    all_within_bound: bool


def verify_indistinguishability(
    family: HashFamily,
    key_dist: Distribution,
    strategies: Sequence[AttackStrategy] = (),
) -> IndistinguishabilityVerdict:
    """Check every strategy (plus the computed optimum) against the bound.

    Each strategy is evaluated at its own worst-case message, so the
    verdict covers every message distribution at once.
    """
    _, opt_report = optimal_deterministic_strategy(family, key_dist)
    advantages = tuple(
        max(per_message_advantage(family, key_dist, s)) for s in strategies
    )
    max_adv = max((opt_report.advantage, *advantages))
    bound = opt_report.bound
    return IndistinguishabilityVerdict(
        bound, opt_report, advantages, max_adv, max_adv <= bound
    )


def random_deterministic_strategy(
    num_messages: int, num_tags: int, rng: random.Random
) -> DeterministicStrategy:
    moves = tuple(
        (rng.randrange(num_messages), rng.randrange(num_tags))
        for _ in range(num_messages * num_tags)
    )
    return DeterministicStrategy(num_messages, num_tags, moves)


def random_mixture(
    num_messages: int,
    num_tags: int,
    rng: random.Random,
    max_parts: int = 4,
) -> MixtureStrategy:
    """A random finite mixture with exact rational weights."""
    count = rng.randint(2, max_parts)
    weights = [rng.randint(1, 10) for _ in range(count)]
    total = sum(weights)
    parts = tuple(
        (Fraction(w, total), random_deterministic_strategy(num_messages, num_tags, rng))
        for w in weights
    )
    return MixtureStrategy(parts)
