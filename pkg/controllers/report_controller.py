import csv
import hashlib
import io
import json
import logging
import math
import os
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

from utils.constants import SIGNIFICANT_DIGITS
from utils.errors import ReportWriteError, PreconditionError
from utils.precision import format_real, is_mp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunResult:
    """Outcome of one subcommand: the JSON payload and optional CSV rows."""
    subcommand: str
    payload: object
    passed: bool = True
    csv_header: Optional[Tuple[str, ...]] = None
    csv_rows: Tuple[tuple, ...] = field(default=(), compare=False)
    plain_text: Optional[str] = None


# Prefix marking floats already written as text; json escapes it as \u0001
_NUMBER_MARK = "\x01"
_MARKED_NUMBER = re.compile(r'"\\u0001([^"]*)"')


def _fixed_floats(value):
    if isinstance(value, float) and math.isfinite(value):
        return _NUMBER_MARK + format_real(value, SIGNIFICANT_DIGITS)
    if isinstance(value, dict):
        return {key: _fixed_floats(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_fixed_floats(item) for item in value]
    return value


def dumps_report(data, **kwargs):
    """json.dumps with every finite float written at 17 significant digits."""
    text = json.dumps(_fixed_floats(data), ensure_ascii=False, **kwargs)
    return _MARKED_NUMBER.sub(r"\1", text)


def _cell(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return "" if value is None else str(value)
    if isinstance(value, (int, float)) or is_mp(value):
        return format_real(value, SIGNIFICANT_DIGITS)
    return str(value)


class ReportController:
    """
    Controller for rendering and writing run reports.
    """
    def __init__(self, app):
        self.app = app

    def config_hash(self, run):
        """First 12 hex digits of the SHA-256 of the canonical run settings."""
        text = dumps_report(run.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]

    def envelope(self, result, run):
        """The payload with the run settings (seed included) attached."""
        return {
            "subcommand": result.subcommand,
            "pass": result.passed,
            "config": run.to_dict(),
            "result": result.payload,
        }

    def render_json(self, data):
        return dumps_report(data, indent=2) + "\n"

    def render_csv(self, header, rows):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
        return buffer.getvalue()

    def render_plain(self, payload):
        """Bare values print as themselves; mappings as ``key: value`` lines."""
        if isinstance(payload, dict):
            return "".join(f"{key}: {self._plain_value(value)}\n" for key, value in payload.items())
        if isinstance(payload, list):
            return "".join(self.render_plain(item) + ("\n" if isinstance(item, dict) else "")
                           for item in payload)
        return f"{self._plain_value(payload)}\n"

    def _plain_value(self, value):
        if isinstance(value, (dict, list)):
            return dumps_report(value)
        return _cell(value)

    def render(self, result, run, output_format):
        if output_format == "csv" and result.csv_header:
            return self.render_csv(result.csv_header, result.csv_rows)
        if output_format == "plain":
            if result.plain_text is not None:
                return result.plain_text
            return self.render_plain(result.payload)
        return self.render_json(self.envelope(result, run))

    def _write(self, path, text):
        try:
            with open(path, "w", encoding="utf-8", newline="") as file:
                file.write(text)
        except OSError as e:
            raise ReportWriteError(f"Failed to write {path}: {e}") from e
        logger.info("Wrote %s", path)
        return path

    def report_bundle(self, results, out_dir, run):
        """
        Write ``<subcommand>-<hash>.json`` per result, plus ``.csv`` when the result has rows.

        Args:
            results (list): RunResult objects
            out_dir (str): target directory, created when missing
            run (RunConfig): settings whose hash names the files

        Returns:
            list: written paths
        """
        results = list(results)
        if not results:
            raise PreconditionError("a report bundle needs at least one result")
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as e:
            raise ReportWriteError(f"Failed to create {out_dir}: {e}") from e

        digest = self.config_hash(run)
        paths = []
        for result in results:
            stem = os.path.join(out_dir, f"{result.subcommand}-{digest}")
            paths.append(self._write(stem + ".json", self.render_json(self.envelope(result, run))))
            if result.csv_header:
                paths.append(self._write(stem + ".csv", self.render_csv(result.csv_header, result.csv_rows)))
        return paths
