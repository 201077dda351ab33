"""CSV and JSON writers for experiment reports."""

import csv
import io
import logging
from pathlib import Path
from typing import Optional

from hybridop.schemas.report import ExperimentReport
from hybridop.schemas.run_config import ReportFormat

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("grid", "n", "observed", "reference", "abs_err", "rel_err")


def format_float(value: float) -> str:
    """17 significant digits; round-trips binary64."""
    return format(value, ".17g")


def report_to_csv(report: ExperimentReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report.rows:
        writer.writerow([
            row.grid,
            format_float(row.n),
            format_float(row.observed),
            format_float(row.reference),
            format_float(row.abs_err),
            format_float(row.rel_err),
        ])
    return buffer.getvalue()


def report_to_json(report: ExperimentReport) -> str:
    return report.model_dump_json(indent=2)


def render_report(report: ExperimentReport, fmt: ReportFormat = ReportFormat.CSV) -> str:
    if fmt == ReportFormat.JSON:
        return report_to_json(report)
    return report_to_csv(report)


def write_report(report: ExperimentReport, output: Optional[str], fmt: ReportFormat = ReportFormat.CSV) -> Optional[Path]:
    """Write the rendered report to ``output``; no path means no file."""
    if not output:
        return None
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(report, fmt), encoding="utf-8")
    logger.info("📄 Report written to %s (%s, %d rows)", path, fmt.value, len(report.rows))
    return path
