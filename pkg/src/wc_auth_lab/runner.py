"""Experiment runner: dispatches configs to the analysis modules and
assembles reproducible report bundles.

Reports are exact: every probability appears as "num/den", CSV tables
never contain a decimal point, and re-running the same config with the
same seed produces byte-identical result files (timing lives in a
separate meta file).
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .attack_analysis import (
    beneficial_moment_scan,
    impersonation_success,
    posterior_trace_distance,
    substitution_success,
    worst_case_spike,
)
from .channel_game import (
    advantage,
    optimal_deterministic_strategy,
    per_message_advantage,
    random_deterministic_strategy,
    random_mixture,
)
from .config import ExperimentConfig, FamilySpec, KeyDistSpec, MessageDistSpec
from .errors import ConfigError, PreconditionError
from .exact_math import format_rational, parse_rational
from .hash_family import HashFamily
from .key_model import Distribution, distance_to_uniform, make_spike

THREADS_ENV_VAR = "WC_AUTH_THREADS"


@dataclass
class ReportBundle:
    config_echo: dict
    results: dict
    csv_tables: dict[str, list[list[str]]] = field(default_factory=dict)
    tool_version: str = __version__
    duration_seconds: float = 0.0

    @property
    def all_bounds_hold(self) -> bool:
        return all(self.results.get("verdicts", {}).values())


def thread_cap() -> int:
    """Parallelism cap from the environment; 0 means automatic."""
    raw = os.environ.get(THREADS_ENV_VAR, "0")
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}")
    if cap < 0:
        raise ConfigError(f"{THREADS_ENV_VAR} must be >= 0, got {cap}")
    return cap


# -- building blocks ----------------------------------------------------


def build_family(spec: FamilySpec) -> HashFamily:
    if spec.kind == "affine":
        return HashFamily.affine(spec.p)
    if spec.kind == "polynomial":
        return HashFamily.polynomial(spec.p, spec.s)
    try:
        return HashFamily.from_csv(spec.table_path)
    except OSError as exc:
        raise ConfigError(f"cannot read table file {spec.table_path}: {exc}") from exc


def build_key_distribution(spec: KeyDistSpec, family: HashFamily) -> Distribution:
    if spec.kind == "uniform":
        return Distribution.uniform(family.num_keys)
    if spec.kind == "worst_case_spike":
        if family.kind != "affine":
            raise ConfigError("worst_case_spike needs an affine family")
        dist, _, _, _ = worst_case_spike(family.p, spec.eps_prime)
        return dist
    if spec.kind == "spike":
        return make_spike(family.num_keys, spec.eps_prime, spec.k_plus, spec.minus_set)
    if spec.kind == "explicit":
        masses = [parse_rational(m) for m in spec.masses]
        if len(masses) != family.num_keys:
            raise ConfigError(
                f"explicit key distribution has {len(masses)} masses, "
                f"family has {family.num_keys} keys"
            )
        return Distribution(masses)
    try:
        with open(spec.path) as fh:
            dist = Distribution.from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read distribution file {spec.path}: {exc}") from exc
    if dist.size != family.num_keys:
        raise ConfigError(
            f"distribution file covers {dist.size} keys, family has {family.num_keys}"
        )
    return dist


def build_message_distribution(spec: MessageDistSpec, family: HashFamily) -> Distribution:
    if spec.kind == "uniform":
        return Distribution.uniform(family.num_messages)
    masses = [parse_rational(m) for m in spec.masses]
    if len(masses) != family.num_messages:
        raise ConfigError(
            f"explicit message distribution has {len(masses)} masses, "
            f"family has {family.num_messages} messages"
        )
    return Distribution(masses)


def _observed_pairs(family: HashFamily, key_dist: Distribution):
    """All (m, t) the adversary can actually observe, in scan order."""
    from .key_model import subset_probability

    for m in range(family.num_messages):
        for t in range(family.num_tags):
            if subset_probability(key_dist, family.preimage_slice(m, t)) > 0:
                yield m, t


# -- single experiments --------------------------------------------------


def _run_certify(family: HashFamily) -> dict:
    cert = family.certify()
    floor = Fraction(1, family.num_tags)
    return {
        "is_universal_uniform": cert.is_universal_uniform,
        "epsilon": format_rational(cert.epsilon),
        "witness": list(cert.witness),
        "has_duplicate_functions": cert.has_duplicate_functions,
        "num_keys": family.num_keys,
        "num_messages": family.num_messages,
        "num_tags": family.num_tags,
        "verdicts": {"epsilon_at_least_tag_floor": cert.epsilon >= floor},
    }


def _run_impersonation(family: HashFamily, key_dist: Distribution) -> dict:
    report = impersonation_success(family, key_dist)
    out = report.to_json_dict()
    out["eps_prime"] = format_rational(distance_to_uniform(key_dist))
    out["verdicts"] = {"bound_holds": report.bound_holds}
    return out


def _run_substitution(
    family: HashFamily, key_dist: Distribution, observed: tuple[int, int] | None
) -> dict:
    if observed is not None:
        report = substitution_success(family, key_dist, observed)
        out = report.to_json_dict()
        out["observed"] = list(observed)
        out["scanned_all_pairs"] = False
        out["verdicts"] = {"bound_holds": report.bound_holds}
        return out

    worst = None
    worst_pair = None
    all_within = True
    for m, t in _observed_pairs(family, key_dist):
        report = substitution_success(family, key_dist, (m, t))
        all_within = all_within and report.bound_holds
        if worst is None or report.success_probability > worst.success_probability:
            worst, worst_pair = report, (m, t)
    if worst is None:
        raise PreconditionError("no_observable_pair", "no (m, t) has positive probability")
    out = worst.to_json_dict()
    out["observed"] = list(worst_pair)
    out["scanned_all_pairs"] = True
    out["verdicts"] = {
        "bound_holds": worst.bound_holds,
        "all_pairs_within_bound": all_within,
    }
    return out


def _run_posterior(
    family: HashFamily, key_dist: Distribution, observed: tuple[int, int] | None
) -> dict:
    bound = None
    if observed is not None:
        value, bound = posterior_trace_distance(family, key_dist, observed)
        return {
            "observed": list(observed),
            "value": format_rational(value),
            "bound": format_rational(bound),
            "bound_tight": value == bound,
            "scanned_all_pairs": False,
            "verdicts": {"bound_holds": value <= bound},
        }

    worst_value = None
    worst_pair = None
    all_within = True
    for m, t in _observed_pairs(family, key_dist):
        value, bound = posterior_trace_distance(family, key_dist, (m, t))
        all_within = all_within and value <= bound
        if worst_value is None or value > worst_value:
            worst_value, worst_pair = value, (m, t)
    if worst_value is None:
        raise PreconditionError("no_observable_pair", "no (m, t) has positive probability")
    return {
        "observed": list(worst_pair),
        "value": format_rational(worst_value),
        "bound": format_rational(bound),
        "bound_tight": worst_value == bound,
        "scanned_all_pairs": True,
        "verdicts": {"bound_holds": worst_value <= bound, "all_pairs_within_bound": all_within},
    }


def _run_beneficial(
    family: HashFamily,
    key_dist: Distribution,
    threshold: Fraction,
    message_dist: Distribution,
) -> tuple[dict, dict]:
    profile, summary = beneficial_moment_scan(family, key_dist, threshold, message_dist)
    eps_prime = distance_to_uniform(key_dist)
    per_round_bound = Fraction(1, family.num_tags) + eps_prime

    per_message: dict[int, Fraction] = {}
    for e in profile.entries:
        per_message[e.message] = per_message.get(e.message, Fraction(0)) + (
            e.occurrence * e.cond_success
        )
    identity_holds = all(v <= per_round_bound for v in per_message.values())

    results = summary.to_json_dict()
    results["eps_prime"] = format_rational(eps_prime)
    results["per_round_bound"] = format_rational(per_round_bound)
    results["per_message_break"] = {
        str(m): format_rational(v) for m, v in sorted(per_message.items())
    }
    results["verdicts"] = {"per_round_break_within_bound": identity_holds}
    return results, {"round_profile": profile.to_csv_rows()}


def _run_distinguish(family: HashFamily, key_dist: Distribution, config: ExperimentConfig) -> dict:
    rng = random.Random(config.seed)
    _, opt_report = optimal_deterministic_strategy(family, key_dist)
    bound = opt_report.bound
    uniform_messages = Distribution.uniform(family.num_messages)

    det_max = Fraction(0)
    det_ok = True
    for _ in range(config.num_random_strategies):
        s = random_deterministic_strategy(family.num_messages, family.num_tags, rng)
        adv = max(per_message_advantage(family, key_dist, s))
        det_max = max(det_max, adv)
        det_ok = det_ok and adv <= bound

    mix_max = Fraction(0)
    mix_ok = True
    convexity_exact = True
    for _ in range(config.num_random_mixtures):
        mix = random_mixture(family.num_messages, family.num_tags, rng)
        adv = max(per_message_advantage(family, key_dist, mix))
        mix_max = max(mix_max, adv)
        mix_ok = mix_ok and adv <= bound
        whole = advantage(family, key_dist, uniform_messages, mix)
        parts = sum(
            (w * advantage(family, key_dist, uniform_messages, det) for w, det in mix.parts),
            Fraction(0),
        )
        convexity_exact = convexity_exact and whole == parts

    return {
        "optimal": opt_report.to_json_dict(),
        "bound": format_rational(bound),
        "epsilon": format_rational(family.certify().epsilon),
        "eps_prime": format_rational(distance_to_uniform(key_dist)),
        "random_deterministic": {
            "count": config.num_random_strategies,
            "max_advantage": format_rational(det_max),
            "all_within_bound": det_ok,
        },
        "random_mixtures": {
            "count": config.num_random_mixtures,
            "max_advantage": format_rational(mix_max),
            "all_within_bound": mix_ok,
            "convexity_exact": convexity_exact,
        },
        "verdicts": {
            "optimal_within_bound": opt_report.bound_holds,
            "random_deterministic_within_bound": det_ok,
            "random_mixtures_within_bound": mix_ok,
            "mixture_convexity_exact": convexity_exact,
        },
    }


def _execute_single(config: ExperimentConfig) -> tuple[dict, dict]:
    family = build_family(config.family)
    if config.experiment == "certify":
        return _run_certify(family), {}
    key_dist = build_key_distribution(config.key_distribution, family)
    if config.experiment == "impersonation":
        return _run_impersonation(family, key_dist), {}
    if config.experiment == "substitution":
        return _run_substitution(family, key_dist, config.observed), {}
    if config.experiment == "posterior":
        return _run_posterior(family, key_dist, config.observed), {}
    if config.experiment == "beneficial":
        message_dist = build_message_distribution(config.message_distribution, family)
        return _run_beneficial(family, key_dist, config.threshold, message_dist)
    if config.experiment == "distinguish":
        return _run_distinguish(family, key_dist, config), {}
    raise ConfigError(f"cannot run experiment {config.experiment!r} directly")


# -- sweeps ----------------------------------------------------------------


_SWEEP_COLUMNS = {
    "certify": ("epsilon", "is_universal_uniform"),
    "impersonation": ("success_probability", "bound", "bound_holds", "bound_tight"),
    "substitution": ("success_probability", "bound", "bound_holds", "bound_tight"),
    "posterior": ("value", "bound", "bound_holds", "bound_tight"),
    "beneficial": ("beneficial_probability", "break_probability"),
    "distinguish": ("advantage", "bound", "bound_holds", "bound_tight"),
}


def _sweep_point_config(config: ExperimentConfig, value: str) -> ExperimentConfig:
    """One inner config with the sweep axis pinned to a value."""
    sweep = config.sweep
    data = config.to_dict()
    del data["sweep"]
    data["experiment"] = sweep.experiment
    if sweep.axis == "eps_prime":
        data["key_distribution"]["eps_prime"] = value
    elif sweep.axis == "p":
        try:
            data["family"]["p"] = int(value)
        except ValueError:
            raise ConfigError(f"p sweep value {value!r} is not an integer")
    else:
        data["threshold"] = value
    return ExperimentConfig.from_dict(data)


def _row_value(inner: str, results: dict, column: str) -> str:
    source = results["optimal"] if inner == "distinguish" else results
    val = source[column]
    if isinstance(val, bool):
        return "true" if val else "false"
    return str(val)


def _monotone_flags(columns: tuple[str, ...], rows: list[dict[str, str]]) -> dict:
    flags = {}
    for col in columns:
        values = [rows[i][col] for i in range(len(rows))]
        if any("/" not in v for v in values):
            continue
        fracs = [parse_rational(v) for v in values]
        nondec = all(a <= b for a, b in zip(fracs, fracs[1:]))
        noninc = all(a >= b for a, b in zip(fracs, fracs[1:]))
        if nondec and noninc:
            flags[col] = "constant"
        elif nondec:
            flags[col] = "nondecreasing"
        elif noninc:
            flags[col] = "nonincreasing"
        else:
            flags[col] = "none"
    return flags


def _run_sweep(config: ExperimentConfig) -> tuple[dict, dict]:
    sweep = config.sweep
    columns = _SWEEP_COLUMNS[sweep.experiment]
    rows = []
    all_hold = True
    for value in sweep.values:
        point = _sweep_point_config(config, value)
        results, _ = _execute_single(point)
        all_hold = all_hold and all(results["verdicts"].values())
        row = {"axis": sweep.axis, "value": value}
        for col in columns:
            row[col] = _row_value(sweep.experiment, results, col)
        rows.append(row)

    header = ["axis", "value", *columns]
    csv_rows = [header] + [[row[c] for c in header] for row in rows]
    results = {
        "axis": sweep.axis,
        "experiment": sweep.experiment,
        "rows": rows,
        "monotone_columns": _monotone_flags(tuple(columns), rows),
        "verdicts": {"all_rows_bounds_hold": all_hold},
    }
    return results, {"sweep": csv_rows}


# -- entry points ----------------------------------------------------------


def run_experiment(config: ExperimentConfig) -> ReportBundle:
    """Execute one config (single experiment or sweep) without touching disk."""
    start = time.monotonic()
    if config.experiment == "sweep":
        results, tables = _run_sweep(config)
    else:
        results, tables = _execute_single(config)
    duration = time.monotonic() - start
    return ReportBundle(
        config_echo=config.to_dict(),
        results=results,
        csv_tables=tables,
        tool_version=__version__,
        duration_seconds=duration,
    )


def _atomic_write(path: str, payload: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def write_bundle(bundle: ReportBundle, out_dir: str) -> dict[str, str]:
    """Write report.json, CSV tables, and run_meta.json; returns path map."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    report = {
        "config": bundle.config_echo,
        "tool_version": bundle.tool_version,
        "results": bundle.results,
    }
    report_path = os.path.join(out_dir, "report.json")
    _atomic_write(report_path, json.dumps(report, sort_keys=True, indent=2) + "\n")
    paths["report"] = report_path

    for name, rows in sorted(bundle.csv_tables.items()):
        csv_path = os.path.join(out_dir, f"{name}.csv")
        _atomic_write(csv_path, _csv_text(rows))
        paths[name] = csv_path

    meta = {
        "duration_seconds": bundle.duration_seconds,
        "thread_cap": thread_cap(),
    }
    meta_path = os.path.join(out_dir, "run_meta.json")
    _atomic_write(meta_path, json.dumps(meta, sort_keys=True, indent=2) + "\n")
    paths["meta"] = meta_path
    return paths
