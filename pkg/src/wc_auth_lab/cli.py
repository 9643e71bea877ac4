"""Command-line entry point.

    wc-auth-lab run   --config cfg.json --out results/ [--seed N] [--quiet]
    wc-auth-lab sweep --config cfg.json --out results/ [--seed N] [--quiet]

Exit status: 0 when every bound verdict in the report holds, 1 when some
bound is violated, 2 for config errors, 3 for precondition violations,
4 when an enumeration guard is exceeded.
"""

from __future__ import annotations

import argparse
import sys

from .config import ExperimentConfig
from .errors import ConfigError, EnumerationGuardError, PreconditionError
from .runner import ReportBundle, run_experiment, thread_cap, write_bundle

EXIT_OK = 0
EXIT_BOUND_VIOLATED = 1
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_GUARD = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wc-auth-lab",
        description="Exact analysis of Wegman-Carter authentication with imperfect keys",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run the experiment described by a config file"),
        ("sweep", "run a sweep config (one row per axis value)"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument("--out", required=True, help="output directory for reports")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return parser


def _summarize(bundle: ReportBundle) -> str:
    results = bundle.results
    experiment = bundle.config_echo["experiment"]
    verdicts = results.get("verdicts", {})
    bits = [f"experiment={experiment}"]
    for key in ("epsilon", "eps_prime", "success_probability", "value", "advantage",
                "beneficial_probability", "bound"):
        if key in results:
            bits.append(f"{key}={results[key]}")
    if experiment == "sweep":
        bits.append(f"rows={len(results['rows'])}")
    status = "ok" if all(verdicts.values()) else "BOUND VIOLATED"
    bits.append(f"verdicts={status}")
    return " ".join(bits)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        thread_cap()  # validate the env var before doing any work
        config = ExperimentConfig.from_file(args.config)
        if args.command == "sweep" and config.experiment != "sweep":
            raise ConfigError(
                "the sweep command needs a config with experiment = sweep"
            )
        if args.seed is not None:
            config = config.with_seed(args.seed)
        bundle = run_experiment(config)
        paths = write_bundle(bundle, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except EnumerationGuardError as exc:
        print(f"enumeration guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD

    if not args.quiet:
        print(_summarize(bundle))
        print(f"report: {paths['report']}")
    return EXIT_OK if bundle.all_bounds_hold else EXIT_BOUND_VIOLATED


if __name__ == "__main__":
    sys.exit(main())
