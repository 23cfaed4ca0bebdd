"""Deterministic CSV/JSON report emission and parsing.

Reports must be byte-identical across reruns of the same config and seed:
floats go through a fixed 17-significant-digit format (which round-trips
doubles exactly), CSV columns have a fixed order, JSON keys are sorted and
nothing time- or host-dependent is written.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

ARTIFACT_VERSION = "0.1.0"

__all__ = [
    "RunReport", "format_value", "write_csv", "read_csv",
    "write_json", "read_json", "write_report", "read_report_json",
]


def format_value(value):
    """Fixed-width decimal for floats; everything else stringified as-is."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse_cell(text):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class RunReport:
    """One experiment run: config echo, row records, summary and checks."""

    subcommand: str
    config: dict
    fieldnames: list
    records: list
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    version: str = ARTIFACT_VERSION

    def passed(self):
        return all(self.checks.values())


def write_csv(path, fieldnames, records):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, quoting=csv.QUOTE_MINIMAL,
                            lineterminator="\r\n")
        writer.writerow(fieldnames)
        for record in records:
            writer.writerow([format_value(record[name])
                             for name in fieldnames])
    return path


def read_csv(path):
    with Path(path).open("r", newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        rows = list(reader)
    if not rows:
        return [], []
    fieldnames = rows[0]
    records = [{name: _parse_cell(cell)
                for name, cell in zip(fieldnames, row)} for row in rows[1:]]
    return fieldnames, records


def write_json(path, payload):
    path = Path(path)
    text = json.dumps(payload, sort_keys=True, indent=2)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _plain(value):
    """Coerce numpy scalars/arrays into JSON-native types, recursively."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "tolist"):
        return _plain(value.tolist())
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    value = float(value)
    # keep the JSON strictly valid; CSV keeps the textual "nan"
    return None if value != value else value


def report_payload(report):
    return _plain({
        "subcommand": report.subcommand,
        "config": report.config,
        "fieldnames": list(report.fieldnames),
        "records": report.records,
        "summary": report.summary,
        "checks": report.checks,
        "version": report.version,
    })


def write_report(report, outdir, basename=None):
    """Emit <basename>.csv and <basename>.json; returns the two paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    basename = basename or report.subcommand
    csv_path = write_csv(outdir / f"{basename}.csv", report.fieldnames,
                         report.records)
    json_path = write_json(outdir / f"{basename}.json",
                           report_payload(report))
    return csv_path, json_path


def read_report_json(path):
    payload = read_json(path)
    return RunReport(subcommand=payload["subcommand"],
                     config=payload["config"],
                     fieldnames=payload["fieldnames"],
                     records=payload["records"],
                     summary=payload["summary"],
                     checks=payload["checks"],
                     version=payload["version"])
