"""Read-only access to a run directory: parse the series.csv header line,
enforce the schema version, and expose columns by name."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

SUPPORTED_SCHEMA = 1


class SchemaMismatchError(Exception):
    pass


class MissingColumnError(Exception):
    def __init__(self, column: str):
        super().__init__(f"series.csv is missing required column {column!r}")
        self.column = column


class NoDataError(Exception):
    pass


@dataclass
class RunData:
    run_dir: str
    summary: dict
    columns: list[str] | None          # None when the run has no series.csv
    data: np.ndarray | None            # shape (rows, len(columns))

    def column(self, name: str) -> np.ndarray:
        if self.columns is None:
            raise MissingColumnError(name)
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise MissingColumnError(name) from None
        return self.data[:, idx]

    def first_beta(self) -> str:
        betas = self.summary.get("config", {}).get("betas") or [0.5]
        return f"{betas[0]:g}"


def _parse_header_comment(line: str) -> dict:
    if not line.startswith("# fractrans-series"):
        raise SchemaMismatchError(
            "series.csv does not start with a fractrans-series header")
    fields = {}
    for token in line[1:].split():
        if "=" in token:
            key, val = token.split("=", 1)
            fields[key] = val
    return fields


def load_series(path: str) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = _parse_header_comment(fh.readline().rstrip("\n"))
        schema = int(header.get("schema", -1))
        if schema != SUPPORTED_SCHEMA:
            raise SchemaMismatchError(
                f"series.csv schema version {schema} is not supported "
                f"(expected {SUPPORTED_SCHEMA})")
        columns = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not rows:
        raise NoDataError("series.csv contains no data rows")
    width = len(columns)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise SchemaMismatchError(
                f"series.csv row {i + 1} has {len(row)} fields, "
                f"expected {width}")
    return columns, np.array(rows, dtype=float)


def load_run(run_dir: str) -> RunData:
    summary_path = os.path.join(run_dir, "summary.json")
    if not os.path.isfile(summary_path):
        raise FileNotFoundError(f"no summary.json in {run_dir}")
    with open(summary_path) as fh:
        summary = json.load(fh)
    schema = summary.get("schema_version")
    if schema != SUPPORTED_SCHEMA:
        raise SchemaMismatchError(
            f"summary schema version {schema} is not supported "
            f"(expected {SUPPORTED_SCHEMA})")
    series_path = os.path.join(run_dir, "series.csv")
    columns = data = None
    if os.path.isfile(series_path):
        columns, data = load_series(series_path)
    return RunData(run_dir, summary, columns, data)
