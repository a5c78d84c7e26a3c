"""
Verification Report
Run configuration, per-check records, the check registry and deterministic JSON output
"""

import json
import logging
import os
import time
from fractions import Fraction
from typing import Any, Callable, Dict, List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator, model_validator
from sympy import isprime

logger = logging.getLogger(__name__)

VERSION = "1.0.0"
SUBCOMMANDS = ("signature", "degeneracies", "jinv", "resolve", "count", "zeta", "specseq", "verify-all")
MAX_DEFAULT_EXT_DEGREE = 3


class ConfigError(Exception):
    """Invalid run configuration"""


class ReportError(Exception):
    """Report could not be written"""


class SkipCheck(Exception):
    """Raised by a check that does not apply to the current configuration"""


class RunConfig(BaseModel):
    """Validated settings for one verification run"""
    prime: int = 7
    t: Optional[str] = None
    ext_degrees: List[int] = Field(default_factory=lambda: [1, 2])
    jobs: int = 1
    cache: Optional[str] = None
    report: Optional[str] = None
    timing: bool = True
    allow_large: bool = False
    arrangement: str = "paper-octic"
    strata: Optional[str] = None
    oracle_limit: int = 10 ** 7
    subcommand: str = "verify-all"

    @field_validator("prime")
    @classmethod
    def _prime(cls, v: int) -> int:
        if v <= 5 or not isprime(v):
            raise ValueError(f"prime must be a prime greater than 5, got {v}")
        return v

    @field_validator("t")
    @classmethod
    def _rational(cls, v: Optional[str]) -> Optional[str]:
        if v is None:
            return v
        try:
            return str(Fraction(str(v).strip()))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"t must be a rational number, got {v!r}")

    @field_validator("jobs")
    @classmethod
    def _jobs(cls, v: int) -> int:
        if v < 1:
            raise ValueError("jobs must be at least 1")
        return v

    @field_validator("oracle_limit")
    @classmethod
    def _oracle_limit(cls, v: int) -> int:
        if v < 1:
            raise ValueError("oracle_limit must be positive")
        return v

    @field_validator("subcommand")
    @classmethod
    def _subcommand(cls, v: str) -> str:
        if v not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {v!r}")
        return v

    @model_validator(mode="after")
    def _degrees(self) -> "RunConfig":
        if not self.ext_degrees or any(k < 1 for k in self.ext_degrees):
            raise ValueError("extension degrees must be positive")
        if not self.allow_large and max(self.ext_degrees) > MAX_DEFAULT_EXT_DEGREE:
            raise ValueError(f"extension degrees above {MAX_DEFAULT_EXT_DEGREE} need allow_large")
        self.ext_degrees = sorted(set(self.ext_degrees))
        if self.t is None:
            self.t = str(self.prime)
        return self

    @property
    def t_value(self) -> Fraction:
        return Fraction(self.t)

    def echo(self) -> Dict[str, Any]:
        """Settings that shape the results; output locations are left out."""
        return self.model_dump(exclude={"report", "cache", "timing"})


class CheckRecord(BaseModel):
    id: str
    anchor: str
    status: Literal["pass", "fail", "skipped"]
    data: Dict[str, Any] = Field(default_factory=dict)
    elapsed: float = 0.0


class VerificationReport(BaseModel):
    version: str = VERSION
    config: Dict[str, Any] = Field(default_factory=dict)
    checks: List[CheckRecord] = Field(default_factory=list)

    @property
    def overall(self) -> str:
        return "fail" if any(c.status == "fail" for c in self.checks) else "pass"

    @property
    def failures(self) -> List[CheckRecord]:
        return [c for c in self.checks if c.status == "fail"]

    def to_payload(self, timing: bool = True) -> Dict[str, Any]:
        checks = []
        for c in self.checks:
            record = c.model_dump()
            if timing:
                record["elapsed"] = round(c.elapsed, 3)
            else:
                record.pop("elapsed")
            checks.append(record)
        return {"version": self.version, "config": self.config, "checks": checks, "overall": self.overall}

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(jsonable(self.to_payload(timing)), sort_keys=True, indent=2) + "\n"


def jsonable(value: Any) -> Any:
    """Convert check payloads (fractions, numpy scalars, sets, tuples, frames) to JSON types."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, pd.DataFrame):
        return {"columns": [jsonable(c) for c in value.columns],
                "index": [jsonable(i) for i in value.index],
                "rows": [[jsonable(v) for v in row] for row in value.itertuples(index=False)]}
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if hasattr(value, "to_dict"):
        return jsonable(value.to_dict())
    return repr(value)


def emit_report(report: VerificationReport, path: str, timing: bool = True) -> str:
    """Write the report as sorted-key JSON; returns the text written."""
    text = report.to_json(timing)
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise ReportError(f"cannot write report to {path}: {e}")
    logger.info("report written to %s", path)
    return text


# Check registry
CHECKS: Dict[str, Dict[str, Any]] = {}


def register_check(check_id: str, anchor: str, subcommand: str, handler: Callable):
    """Register a check; the handler returns a data dict whose 'ok' key decides pass/fail"""
    CHECKS[check_id] = {
        "id": check_id,
        "anchor": anchor,
        "subcommand": subcommand,
        "handler": handler,
    }


def checks_for(subcommand: str) -> List[Dict[str, Any]]:
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    return [c for c in CHECKS.values() if subcommand == "verify-all" or c["subcommand"] == subcommand]


def run_check(check: Dict[str, Any], config: RunConfig, context: Any) -> CheckRecord:
    start = time.perf_counter()
    try:
        data = dict(check["handler"](config, context))
        status = "pass" if data.pop("ok", False) else "fail"
    except SkipCheck as e:
        data, status = {"reason": str(e)}, "skipped"
    except Exception as e:
        logger.exception("check %s raised", check["id"])
        data, status = {"error": f"{type(e).__name__}: {e}"}, "fail"
    elapsed = time.perf_counter() - start
    if status == "fail":
        logger.error("check %s failed", check["id"])
    else:
        logger.info("check %s: %s (%.2fs)", check["id"], status, elapsed)
    return CheckRecord(id=check["id"], anchor=check["anchor"], status=status,
                       data=jsonable(data), elapsed=elapsed)


def run_checks(subcommand: str, config: RunConfig, context: Any) -> VerificationReport:
    report = VerificationReport(config=jsonable(config.echo()))
    for check in checks_for(subcommand):
        report.checks.append(run_check(check, config, context))
    return report
