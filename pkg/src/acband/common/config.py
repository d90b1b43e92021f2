import os
from pathlib import Path

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from acband.common.errors import ConfigError, InvalidParameter
from acband.common.models import ScenarioSettings


class ScenarioConfig:
    """Scenario profile on disk (JSON or YAML; YAML parsing accepts both)."""

    def __init__(self, profile_path):
        self.path = Path(profile_path)
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                self.profile = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"scenario file {self.path} is not valid JSON/YAML: {e}") from e
        if not isinstance(self.profile, dict):
            raise ConfigError(f"scenario file {self.path} must contain a mapping at top level")

    def get_scenario(self) -> ScenarioSettings:
        try:
            settings = ScenarioSettings.model_validate(self.profile)
        except ValidationError as e:
            raise InvalidParameter(f"invalid scenario {self.path}: {e}") from e
        # relative data paths resolve against the scenario file
        if settings.dataset is not None and not Path(settings.dataset.path).is_absolute():
            settings.dataset.path = str(self.path.parent / settings.dataset.path)
        return settings


def worker_threads(default: int = 1) -> int:
    """Worker-slot cap from ACBAND_THREADS (a .env file is honoured)."""
    load_dotenv()
    raw = os.getenv("ACBAND_THREADS")
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise InvalidParameter(f"ACBAND_THREADS must be a positive integer, got {raw!r}") from e
    if value < 1:
        raise InvalidParameter(f"ACBAND_THREADS must be a positive integer, got {value}")
    return value
