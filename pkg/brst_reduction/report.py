"""
BRST Reduction - Report Module

Named check results, run reports and their JSON Schema validation.
Schemas live at <project_root>/schema/; this module lives at
<project_root>/brst_reduction/report.py, so go up one level.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from jsonschema import Draft202012Validator

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schema"
RUN_REPORT_SCHEMA = SCHEMA_DIR / "run_report_v1.json"
DESCRIPTOR_SCHEMA = SCHEMA_DIR / "scenario_descriptor_v1.json"

PASS = "PASS"
FAIL = "FAIL"


@dataclass
class CheckResult:
    """Outcome of one named check.

    Every FAIL carries at least one witness reproducing the failure;
    `certificate` records the bounds a verdict is certified under.
    """

    name: str
    status: str
    checked: int = 0
    witnesses: list = field(default_factory=list)
    certificate: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    seconds: float | None = None

    @classmethod
    def from_failures(cls, name: str, checked: int, failures: list, **extra) -> "CheckResult":
        return cls(name, FAIL if failures else PASS, checked, list(failures), **extra)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self, timing: bool = False) -> dict:
        out = {"name": self.name, "status": self.status, "checked": self.checked}
        if self.witnesses:
            out["witnesses"] = [
                {k: str(v) if not isinstance(v, (int, str)) else v for k, v in w.items()}
                if isinstance(w, dict) else {"witness": str(w)}
                for w in self.witnesses
            ]
        if self.certificate:
            out["certificate"] = self.certificate
        if self.data:
            out["data"] = self.data
        if timing and self.seconds is not None:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass
class RunReport:
    command: str
    scenario: dict
    results: list[CheckResult] = field(default_factory=list)
    timing: bool = False

    def add(self, result: CheckResult) -> CheckResult:
        self.results.append(result)
        logger.info("%s: %s (%d checked)", result.name, result.status, result.checked)
        return result

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "scenario": self.scenario,
            "status": PASS if self.passed else FAIL,
            "results": [r.to_json(self.timing) for r in self.results],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.results:
            line = f"  [{r.status}] {r.name} ({r.checked} checked)"
            if r.certificate:
                line += " " + ", ".join(f"{k}={v}" for k, v in sorted(r.certificate.items()))
            lines.append(line)
            for key, value in sorted(r.data.items()):
                lines.append(f"      {key}: {value}")
            for w in r.witnesses[:5]:
                lines.append(f"      witness: {w}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Schema validation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _validator(path: Path) -> Draft202012Validator:
    with open(path) as f:
        schema = json.load(f)
    logger.debug("Loaded schema from %s", path)
    return Draft202012Validator(schema)


def _collect_errors(validator: Draft202012Validator, data: dict) -> list[dict]:
    """Collect ALL errors (does not stop at first)."""
    errors = []
    for err in validator.iter_errors(data):
        errors.append({
            "path": "/".join(str(p) for p in err.absolute_path) or "(root)",
            "message": err.message,
        })
    return errors


def validate_report(data: dict) -> list[dict]:
    """Validate a report dict; an empty list means valid."""
    return _collect_errors(_validator(RUN_REPORT_SCHEMA), data)


def validate_descriptor(data: dict) -> list[dict]:
    return _collect_errors(_validator(DESCRIPTOR_SCHEMA), data)
