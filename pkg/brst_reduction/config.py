"""
BRST Reduction - Configuration Module

Settings resolution order:
  built-in defaults → data/defaults.yaml (or $BRST_CONFIG) → BRST_* env vars → CLI flags
"""

import os
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

logger = logging.getLogger(__name__)

# Path to the defaults file in data/ directory
DEFAULTS_FILE = Path(__file__).resolve().parent.parent / "data" / "defaults.yaml"

_ENV_INT_KEYS = {
    "BRST_DEGREE_BOUND": "degree_bound",
    "BRST_NU_ORDER": "nu_order",
    "BRST_NORMALIZER_DEGREE_BOUND": "normalizer_degree_bound",
    "BRST_EQUIVALENCE_DEGREE_BOUND": "equivalence_degree_bound",
    "BRST_KOSZUL_SUITE_DEGREE": "koszul_suite_degree",
    "BRST_REDUCED_PRODUCT_DEGREE": "reduced_product_degree",
}


@dataclass(frozen=True)
class Settings:
    degree_bound: int = 8
    nu_order: int = 4
    normalizer_degree_bound: int = 6
    equivalence_degree_bound: int = 6
    koszul_suite_degree: int = 6
    reduced_product_degree: int = 2
    log_level: str = "WARNING"
    seed: int | None = None

    def with_overrides(self, **overrides) -> "Settings":
        """Return a copy with every non-None override applied."""
        values = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **values)


def _load_yaml(path: Path) -> dict:
    """Load the YAML defaults file; missing or malformed files yield {}."""
    if not path.exists():
        return {}
    with open(path, "r") as f:
        try:
            parsed = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            logger.warning("Ignoring malformed config file %s: %s", path, exc)
            return {}
    if not isinstance(parsed, dict):
        return {}
    return parsed


def _from_env() -> dict:
    values = {}
    for env_key, field_name in _ENV_INT_KEYS.items():
        raw = os.environ.get(env_key, "").strip()
        if not raw:
            continue
        try:
            values[field_name] = int(raw)
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", env_key, raw)
    level = os.environ.get("BRST_LOG_LEVEL", "").strip()
    if level:
        values["log_level"] = level.upper()
    seed = os.environ.get("BRST_SEED", "").strip()
    if seed:
        try:
            values["seed"] = int(seed)
        except ValueError:
            logger.warning("Ignoring non-integer BRST_SEED=%r", seed)
    return values


def load_settings(config_path: str | None = None) -> Settings:
    """Resolve settings from the YAML file and the environment."""
    path = Path(config_path or os.environ.get("BRST_CONFIG", "") or DEFAULTS_FILE)
    file_values = _load_yaml(path)
    known = set(Settings.__dataclass_fields__)
    unknown = sorted(set(file_values) - known)
    if unknown:
        logger.warning("Unknown keys in %s: %s", path, ", ".join(unknown))
    settings = Settings().with_overrides(**{k: v for k, v in file_values.items() if k in known})
    return settings.with_overrides(**_from_env())
