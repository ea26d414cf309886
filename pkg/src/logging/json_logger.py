"""JSON logging utilities for structured run events."""

import json
import os
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

VERBOSE_ENV = "LOGGAS_VERBOSE"


def verbose_enabled() -> bool:
    """True when DEBUG events should be emitted."""
    return os.environ.get(VERBOSE_ENV, "").strip().lower() in ("1", "true", "yes")


class JSONLogger:
    """
    Structured JSON logger for solver, sampler and CLI events.

    Emits JSON Lines with standard fields:
    - timestamp: ISO8601 UTC
    - component: module or command emitting the event
    - run_id: UUID shared by every event of one CLI invocation
    - level: DEBUG/INFO/WARN/ERROR
    - message: human-readable message
    - metadata: structured payload (residuals, edges, acceptance rates, ...)

    Events go to stdout; when log_file is given they are also appended there.
    DEBUG events are dropped unless LOGGAS_VERBOSE=1.
    """

    def __init__(self, component: str, run_id: Optional[str] = None, log_file: Optional[str] = None):
        """
        Args:
            component: Component name for log entries
            run_id: Optional run UUID; generated if not provided
            log_file: Optional JSON-lines file that receives a copy of every event
        """
        self.component = component
        self.run_id = run_id or str(uuid.uuid4())
        self.log_file = Path(log_file) if log_file else None

        if self.log_file:
            self.log_file.parent.mkdir(parents=True, exist_ok=True)

    def child(self, component: str) -> "JSONLogger":
        """Logger for a sub-component sharing this run id and file."""
        return JSONLogger(component, self.run_id, str(self.log_file) if self.log_file else None)

    def _write_log(self, level: str, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "component": self.component,
            "run_id": self.run_id,
            "level": level,
            "message": message,
            "metadata": metadata or {},
        }

        log_line = json.dumps(entry, default=str)
        print(log_line, flush=True)

        if self.log_file:
            with open(self.log_file, "a") as f:
                f.write(log_line + "\n")

    def debug(self, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        """Log DEBUG level message (only with LOGGAS_VERBOSE=1)."""
        if verbose_enabled():
            self._write_log("DEBUG", message, metadata)

    def info(self, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        """Log INFO level message."""
        self._write_log("INFO", message, metadata)

    def warn(self, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        """Log WARN level message."""
        self._write_log("WARN", message, metadata)

    def error(self, message: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        """Log ERROR level message."""
        self._write_log("ERROR", message, metadata)
