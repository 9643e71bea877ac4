"""Experiment configuration: a single JSON file describes one experiment.

Parsing is strict: unknown fields are rejected, rationals must be
"num/den" strings, and every cross-field requirement (e.g. a sweep block
only for sweep experiments) is validated here so the runner can assume a
well-formed config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError, PreconditionError
from .exact_math import parse_rational

EXPERIMENTS = (
    "certify",
    "impersonation",
    "substitution",
    "posterior",
    "beneficial",
    "distinguish",
    "sweep",
)
SWEEP_AXES = ("eps_prime", "p", "threshold")

DEFAULT_RANDOM_DETERMINISTIC = 200
DEFAULT_RANDOM_MIXTURES = 50


def _require_keys(data: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown fields in {where}: {sorted(unknown)}")
    missing = required - set(data)
    if missing:
        raise ConfigError(f"missing fields in {where}: {sorted(missing)}")


def _rational(data: dict, key: str, where: str) -> Fraction:
    try:
        return parse_rational(data[key])
    except (PreconditionError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational for {where}.{key}: {exc}") from exc


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    p: int | None = None
    s: int = 1
    table_path: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        _require_keys(data, {"kind", "p", "s", "table_path"}, {"kind"}, "family")
        kind = data["kind"]
        if kind in ("affine", "polynomial"):
            if "p" not in data:
                raise ConfigError(f"family kind {kind} needs p")
            if "table_path" in data:
                raise ConfigError(f"family kind {kind} takes no table_path")
            s = data.get("s", 1)
            if kind == "affine" and s != 1:
                raise ConfigError("affine families have s = 1")
            return cls(kind=kind, p=int(data["p"]), s=int(s))
        if kind == "table":
            if "table_path" not in data:
                raise ConfigError("family kind table needs table_path")
            if "p" in data or "s" in data:
                raise ConfigError("table families take no p or s")
            return cls(kind="table", table_path=data["table_path"])
        raise ConfigError(f"unknown family kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "table":
            return {"kind": "table", "table_path": self.table_path}
        return {"kind": self.kind, "p": self.p, "s": self.s}


@dataclass(frozen=True)
class KeyDistSpec:
    kind: str
    eps_prime: Fraction | None = None
    k_plus: int | None = None
    minus_set: tuple[int, ...] = ()
    masses: tuple[str, ...] = ()
    path: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "KeyDistSpec":
        allowed = {"kind", "eps_prime", "k_plus", "minus_set", "masses", "path"}
        _require_keys(data, allowed, {"kind"}, "key_distribution")
        kind = data["kind"]
        if kind == "uniform":
            if len(data) > 1:
                raise ConfigError("uniform key distribution takes no extra fields")
            return cls(kind="uniform")
        if kind == "worst_case_spike":
            _require_keys(data, {"kind", "eps_prime"}, {"kind", "eps_prime"}, "key_distribution")
            return cls(kind=kind, eps_prime=_rational(data, "eps_prime", "key_distribution"))
        if kind == "spike":
            _require_keys(
                data,
                {"kind", "eps_prime", "k_plus", "minus_set"},
                {"kind", "eps_prime", "k_plus", "minus_set"},
                "key_distribution",
            )
            return cls(
                kind="spike",
                eps_prime=_rational(data, "eps_prime", "key_distribution"),
                k_plus=int(data["k_plus"]),
                minus_set=tuple(int(k) for k in data["minus_set"]),
            )
        if kind == "explicit":
            _require_keys(data, {"kind", "masses"}, {"kind", "masses"}, "key_distribution")
            return cls(kind="explicit", masses=tuple(data["masses"]))
        if kind == "file":
            _require_keys(data, {"kind", "path"}, {"kind", "path"}, "key_distribution")
            return cls(kind="file", path=data["path"])
        raise ConfigError(f"unknown key distribution kind {kind!r}")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind in ("spike", "worst_case_spike"):
            out["eps_prime"] = f"{self.eps_prime.numerator}/{self.eps_prime.denominator}"
        if self.kind == "spike":
            out["k_plus"] = self.k_plus
            out["minus_set"] = list(self.minus_set)
        if self.kind == "explicit":
            out["masses"] = list(self.masses)
        if self.kind == "file":
            out["path"] = self.path
        return out


@dataclass(frozen=True)
class MessageDistSpec:
    kind: str
    masses: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, data: dict) -> "MessageDistSpec":
        _require_keys(data, {"kind", "masses"}, {"kind"}, "message_distribution")
        kind = data["kind"]
        if kind == "uniform":
            if len(data) > 1:
                raise ConfigError("uniform message distribution takes no extra fields")
            return cls(kind="uniform")
        if kind == "explicit":
            if "masses" not in data:
                raise ConfigError("explicit message distribution needs masses")
            return cls(kind="explicit", masses=tuple(data["masses"]))
        raise ConfigError(f"unknown message distribution kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "explicit":
            return {"kind": "explicit", "masses": list(self.masses)}
        return {"kind": "uniform"}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[str, ...]
    experiment: str

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        _require_keys(
            data, {"axis", "values", "experiment"}, {"axis", "values", "experiment"}, "sweep"
        )
        axis = data["axis"]
        if axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
        values = tuple(str(v) for v in data["values"])
        if not values:
            raise ConfigError("sweep values list must be nonempty")
        for v in values:
            if axis == "p":
                try:
                    int(v)
                except ValueError:
                    raise ConfigError(f"p sweep value {v!r} is not an integer")
            else:
                try:
                    parse_rational(v)
                except (PreconditionError, ZeroDivisionError) as exc:
                    raise ConfigError(f"sweep value {v!r}: {exc}") from exc
        inner = data["experiment"]
        if inner not in EXPERIMENTS or inner == "sweep":
            raise ConfigError(f"sweep inner experiment {inner!r} invalid")
        if axis == "threshold" and inner != "beneficial":
            raise ConfigError("threshold sweep requires the beneficial experiment")
        return cls(axis=axis, values=values, experiment=inner)

    def to_dict(self) -> dict:
        return {"axis": self.axis, "values": list(self.values), "experiment": self.experiment}


@dataclass(frozen=True)
class ExperimentConfig:
    family: FamilySpec
    key_distribution: KeyDistSpec
    experiment: str
    message_distribution: MessageDistSpec = field(default_factory=lambda: MessageDistSpec("uniform"))
    threshold: Fraction | None = None
    observed: tuple[int, int] | None = None
    sweep: SweepSpec | None = None
    seed: int = 0
    num_random_strategies: int = DEFAULT_RANDOM_DETERMINISTIC
    num_random_mixtures: int = DEFAULT_RANDOM_MIXTURES

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        allowed = {
            "family",
            "key_distribution",
            "message_distribution",
            "experiment",
            "threshold",
            "observed",
            "sweep",
            "seed",
            "strategy_samples",
        }
        _require_keys(data, allowed, {"family", "key_distribution", "experiment"}, "config")

        experiment = data["experiment"]
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")

        family = FamilySpec.from_dict(data["family"])
        key_dist = KeyDistSpec.from_dict(data["key_distribution"])
        msg_dist = MessageDistSpec.from_dict(
            data.get("message_distribution", {"kind": "uniform"})
        )

        threshold = None
        if "threshold" in data:
            threshold = _rational(data, "threshold", "config")

        observed = None
        if "observed" in data:
            pair = data["observed"]
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ConfigError("observed must be a [m, t] pair")
            observed = (int(pair[0]), int(pair[1]))

        sweep = None
        if experiment == "sweep":
            if "sweep" not in data:
                raise ConfigError("experiment sweep needs a sweep block")
            sweep = SweepSpec.from_dict(data["sweep"])
        elif "sweep" in data:
            raise ConfigError("sweep block only allowed for experiment sweep")

        inner = sweep.experiment if sweep else experiment
        if inner == "beneficial" and threshold is None:
            raise ConfigError("beneficial experiment needs a threshold")
        if inner != "beneficial" and threshold is not None:
            raise ConfigError("threshold only allowed for the beneficial experiment")
        if observed is not None and inner not in ("substitution", "posterior"):
            raise ConfigError("observed only allowed for substitution/posterior")

        samples = data.get("strategy_samples", {})
        _require_keys(samples, {"deterministic", "mixtures"}, set(), "strategy_samples")
        num_det = int(samples.get("deterministic", DEFAULT_RANDOM_DETERMINISTIC))
        num_mix = int(samples.get("mixtures", DEFAULT_RANDOM_MIXTURES))
        if num_det < 0 or num_mix < 0:
            raise ConfigError("strategy sample counts must be >= 0")

        if sweep is not None:
            _check_sweep_compat(sweep, family, key_dist)

        return cls(
            family=family,
            key_distribution=key_dist,
            experiment=experiment,
            message_distribution=msg_dist,
            threshold=threshold,
            observed=observed,
            sweep=sweep,
            seed=int(data.get("seed", 0)),
            num_random_strategies=num_det,
            num_random_mixtures=num_mix,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(text)

    def to_dict(self) -> dict:
        """Echo form written into reports; deterministic field order via sort_keys."""
        out: dict = {
            "family": self.family.to_dict(),
            "key_distribution": self.key_distribution.to_dict(),
            "message_distribution": self.message_distribution.to_dict(),
            "experiment": self.experiment,
            "seed": self.seed,
            "strategy_samples": {
                "deterministic": self.num_random_strategies,
                "mixtures": self.num_random_mixtures,
            },
        }
        if self.threshold is not None:
            out["threshold"] = f"{self.threshold.numerator}/{self.threshold.denominator}"
        if self.observed is not None:
            out["observed"] = list(self.observed)
        if self.sweep is not None:
            out["sweep"] = self.sweep.to_dict()
        return out

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig(
            family=self.family,
            key_distribution=self.key_distribution,
            experiment=self.experiment,
            message_distribution=self.message_distribution,
            threshold=self.threshold,
            observed=self.observed,
            sweep=self.sweep,
            seed=seed,
            num_random_strategies=self.num_random_strategies,
            num_random_mixtures=self.num_random_mixtures,
        )


def _check_sweep_compat(sweep: SweepSpec, family: FamilySpec, key_dist: KeyDistSpec) -> None:
    if sweep.axis == "eps_prime" and key_dist.kind not in ("spike", "worst_case_spike"):
        raise ConfigError("eps_prime sweep needs a spike or worst_case_spike key distribution")
    if sweep.axis == "p":
        if family.kind == "table":
            raise ConfigError("p sweep cannot use a table family")
        if key_dist.kind in ("spike", "explicit", "file"):
            raise ConfigError(
                "p sweep needs a key distribution that scales with p "
                "(uniform or worst_case_spike)"
            )
