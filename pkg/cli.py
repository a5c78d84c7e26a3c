#!/usr/bin/env python3
"""
Octic Degeneration CLI
Runs the claim checks for the octic family and writes a JSON verification report
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from arrangement import ArrangementError, FamilyArrangement, load_arrangement
from expression_parser import ExpressionSyntaxError
from verification_checks import CheckContext
from verification_report import (SUBCOMMANDS, ConfigError, ReportError, RunConfig, VerificationReport,
                                 emit_report, run_checks)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
ENV_PREFIX = "OCTIC_"
ENV_KEYS = ("prime", "t", "ext_degrees", "jobs", "cache", "report")


def _csv_ints(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _env_config() -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key in ENV_KEYS:
        raw = os.getenv(ENV_PREFIX + key.upper())
        if raw is None:
            continue
        try:
            if key in ("prime", "jobs"):
                out[key] = int(raw)
            elif key == "ext_degrees":
                out[key] = [int(part) for part in raw.split(",") if part.strip()]
            else:
                out[key] = raw
        except ValueError:
            raise ConfigError(f"{ENV_PREFIX}{key.upper()}={raw!r} is not a valid value")
    return out


def load_config(path: Optional[str] = "config.json", overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Environment variables, then the JSON config file (when it exists), then
    explicit overrides; the merged mapping is validated by RunConfig.
    """
    merged = _env_config()
    if path and os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as f:
                user_config = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read {path}: {e}")
        if not isinstance(user_config, dict):
            raise ConfigError(f"{path} must hold a JSON object")
        merged = {**merged, **user_config}
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**merged)


def load_family(source: str) -> FamilyArrangement:
    """`paper-octic` or a path to an arrangement file; read and parse failures become ConfigError."""
    try:
        return load_arrangement(source)
    except OSError as e:
        raise ConfigError(f"cannot read arrangement {source}: {e}")
    except (ExpressionSyntaxError, ArrangementError) as e:
        raise ConfigError(f"{source}: {e}")


def run(subcommand: str, config: RunConfig) -> VerificationReport:
    """Execute the checks registered for a subcommand (all of them for verify-all)."""
    context = CheckContext(config, load_family(config.arrangement))
    return run_checks(subcommand, config, context)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, help="prime p > 5")
    common.add_argument("--t", type=str, help="family parameter, a rational (default: p)")
    common.add_argument("--ext-degrees", dest="ext_degrees", type=_csv_ints,
                        help="extension degrees k to count over, e.g. 1,2")
    common.add_argument("--jobs", type=int, help="worker threads for counting")
    common.add_argument("--cache", type=str, help="count cache file")
    common.add_argument("--report", type=str, help="write the JSON report here instead of stdout")
    common.add_argument("--no-timing", dest="timing", action="store_false", default=None,
                        help="leave elapsed times out of the report")
    common.add_argument("--allow-large", dest="allow_large", action="store_true", default=None,
                        help="permit extension degrees above 3")
    common.add_argument("--arrangement", type=str,
                        help="arrangement file or 'paper-octic' (alias 'builtin-octic')")
    common.add_argument("--strata", type=str, help="strata JSON for the spectral-sequence ledger")
    common.add_argument("--oracle-limit", dest="oracle_limit", type=int,
                        help="largest domain the naive oracle enumerates")
    common.add_argument("--config", type=str, default="config.json", help="JSON config file")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(description="Checks for the degenerating double octic family")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "signature": "incidence census, admissibility and reduction of the studied fibre",
        "degeneracies": "degenerate parameters of the family",
        "jinv": "j-invariant of the pencil and of the pinch points",
        "resolve": "chart pipeline at the triple line",
        "count": "double octic and Legendre point counts",
        "zeta": "Legendre zeta, Tate twist and weight-3 obstruction",
        "specseq": "weight spectral sequence ledger",
        "verify-all": "every check",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT, force=True)

    overrides = {key: getattr(args, key) for key in
                 ("prime", "t", "ext_degrees", "jobs", "cache", "report", "timing",
                  "allow_large", "arrangement", "strata", "oracle_limit")}
    overrides["subcommand"] = args.subcommand
    try:
        config = load_config(args.config, overrides)
        report = run(config.subcommand, config)
    except (ConfigError, ValidationError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2

    try:
        if config.report:
            emit_report(report, config.report, timing=config.timing)
        else:
            sys.stdout.write(report.to_json(config.timing))
    except ReportError as e:
        print(str(e), file=sys.stderr)
        return 2

    for record in report.failures:
        print(f"FAIL {record.id}: {json.dumps(record.data, sort_keys=True)}", file=sys.stderr)
    return 0 if report.overall == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
