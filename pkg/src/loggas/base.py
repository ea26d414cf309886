"""Base run class for common CLI functionality."""

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional
import uuid

import yaml

from src.loggas.config import RunConfig
from src.logging.json_logger import JSONLogger
from src.util.seed import generate_or_load_seed


class BaseRun:
    """
    Shared plumbing of every CLI command.

    Provides common functionality:
    - Configuration loading (YAML or JSON, chosen by suffix)
    - Logging setup
    - Seed management
    - Report writing with provenance
    """

    def __init__(self, command: str):
        """
        Args:
            command: Subcommand name, recorded in every report
        """
        self.command = command
        self.config: Optional[RunConfig] = None
        self.logger: Optional[JSONLogger] = None
        self.seed: Optional[int] = None
        self.run_id: str = str(uuid.uuid4())

    @staticmethod
    def read_config_data(config_path: str) -> Dict[str, Any]:
        """
        Raw mapping from a YAML or JSON file.

        Raises:
            FileNotFoundError: If config file not found
            ValueError: If the suffix is not .yaml, .yml or .json
        """
        config_file = Path(config_path)

        if not config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        with open(config_file, "r") as f:
            if config_file.suffix in [".yaml", ".yml"]:
                data = yaml.safe_load(f)
            elif config_file.suffix == ".json":
                data = json.load(f)
            else:
                raise ValueError(f"Unsupported config format: {config_file.suffix}")
        if not isinstance(data, dict):
            raise ValueError(f"Configuration root must be a mapping: {config_path}")
        return data

    def load_config(self, config_path: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
        """
        Load and validate configuration, applying command-line overrides.

        ``overrides`` maps dotted keys (``"sampler.steps"``) to values; None
        values are skipped. Validation runs after the overrides are applied.

        Raises:
            pydantic.ValidationError: If the merged configuration is invalid
        """
        data = self.read_config_data(config_path)
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            node = data
            parts = key.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
            node[parts[-1]] = value
        self.config = RunConfig(**data)
        return self.config

    def setup_logging(self, log_file: Optional[str] = None) -> JSONLogger:
        self.logger = JSONLogger(component=self.command, run_id=self.run_id, log_file=log_file)
        return self.logger

    def get_seed(self, manifest_path: str, provided_seed: Optional[int] = None) -> int:
        """
        Get or generate seed for reproducibility.

        Args:
            manifest_path: Path to seed manifest file
            provided_seed: Optional explicit seed

        Returns:
            Seed value to use
        """
        self.seed = generate_or_load_seed(manifest_path, provided_seed)
        return self.seed

    def write_report(self, report_path: str, result: Dict[str, Any]) -> Path:
        """
        Write the JSON report with the resolved config, seed and timestamp.

        Everything except ``generated_at`` is a function of config and seed, so
        two runs differ only in that field.
        """
        report_file = Path(report_path)
        report_file.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "command": self.command,
            "config": self.config.provenance() if self.config is not None else None,
            "seed": self.seed,
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "result": result,
        }
        with open(report_file, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=str)
        return report_file
