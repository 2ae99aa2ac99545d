"""Report repository: renders reports and writes them to a file or stdout."""

import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Optional, TextIO

from pydantic import BaseModel

from lumpvol.core.exceptions import ValidationException
from lumpvol.core.logging import get_logger
from lumpvol.schemas.reports import SweepReport
from lumpvol.schemas.run import RunConfig

logger = get_logger(__name__)


class ReportRepository:
    """Repository for command output."""

    def __init__(
        self, out: Optional[str] = None, stream: Optional[TextIO] = None
    ) -> None:
        self.out = Path(out) if out else None
        self.stream = stream

    def render(self, report: BaseModel, config: RunConfig, fmt: str = "json") -> str:
        """Render a report with its config echo."""
        if fmt == "json":
            return self.render_json(report, config)
        if fmt == "csv":
            return self.render_csv(report)
        if fmt == "text":
            return self.render_text(report, config)
        raise ValidationException(f"unknown output format {fmt!r}", field="format")

    def render_json(self, report: BaseModel, config: RunConfig) -> str:
        payload = {
            "config": config.model_dump(mode="json", exclude_none=True),
            "report": report.model_dump(mode="json"),
        }
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"

    def render_csv(self, report: BaseModel) -> str:
        """Sweep table with a fixed header; fitted slopes follow as comment lines."""
        if not isinstance(report, SweepReport):
            raise ValidationException(
                "csv output is only available for sweep tables", field="format"
            )
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([repr(x) for x in row])
        for name, slope in report.slopes.items():
            buffer.write(f"# fitted_slope,{name},{slope!r}\n")
        for s2, note in report.notes.items():
            writer.writerow(["# note", s2, note])
        return buffer.getvalue()

    def render_text(self, report: BaseModel, config: RunConfig) -> str:
        lines = [f"# {key} = {value}" for key, value in self._flat(config)]
        lines += [f"{key}: {value}" for key, value in self._flat(report)]
        return "\n".join(lines) + "\n"

    @staticmethod
    def _flat(model: BaseModel) -> list[tuple[str, Any]]:
        data = model.model_dump(mode="json", exclude_none=True)
        return [(key, value) for key, value in data.items()]

    def save(self, report: BaseModel, config: RunConfig, fmt: str = "json") -> str:
        """Write the rendered report to the output path, or stdout."""
        text = self.render(report, config, fmt)
        if self.out is not None:
            self.out.parent.mkdir(parents=True, exist_ok=True)
            self.out.write_text(text, encoding="utf-8")
            logger.info("report_written", path=str(self.out), format=fmt)
        else:
            (self.stream or sys.stdout).write(text)
        return text
