"""Command line: ``genmarkov run`` writes experiment tables, ``genmarkov verify`` self-checks."""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .errors import NumericalError
from .experiments import ConfigError, resolve, run_experiment

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

U64_MAX = 2**64 - 1


def load_schema() -> dict:
    return json.loads(resources.files("genmarkov").joinpath("config_schema.json").read_text())


def load_config(path, overrides: dict | None = None) -> dict:
    """Read, validate and resolve a configuration file; flags in ``overrides`` win."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc
    return resolve(raw)


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genmarkov", description=__doc__)
    parser.add_argument("--version", action="version", version=f"genmarkov {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write a CSV table")
    run.add_argument("--config", required=True, help="JSON configuration file")
    run.add_argument("--experiment", choices=["fig1", "fig2", "fig3", "fig4", "fig5", "custom"])
    run.add_argument("--out", help="output CSV path (default: config 'output' or <experiment>.csv)")
    run.add_argument("--seed", type=_seed)

    ver = sub.add_parser("verify", help="run the self-verification suite")
    ver.add_argument("--level", choices=["fast", "full"], default="fast")
    return parser


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, {"experiment": args.experiment, "seed": args.seed})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        table = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = Path(args.out or cfg.get("output") or f"{cfg['experiment']}.csv")
    out.write_text(table.to_csv(cfg))
    print(f"wrote {len(table.rows)} rows to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import format_report, run_checks

    results = run_checks(args.level)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    return cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
