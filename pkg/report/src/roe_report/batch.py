"""Batch discovery and schema validation.

A run is a directory containing a ``certificate.json`` (schema
``roe-cert/1``), optionally with its ``config.json`` (``roe-config/1``)
and ``goal.csv`` (``roe-goal/1``, a ``# schema=...`` comment line, then a
header row). A batch is every run found under a directory, sorted by run
name. Inputs are only ever read.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path


class SchemaMismatch(Exception):
    """An input file does not carry the expected schema or columns."""


CERT_SCHEMA = "roe-cert/1"
CONFIG_SCHEMA = "roe-config/1"
GOAL_SCHEMA = "roe-goal/1"
GOAL_COLUMNS = ["eps", "m", "residual", "worst_side", "worst_set",
                "feasible_d0.9", "feasible_d0.5", "feasible_d0.1"]


@dataclass(frozen=True)
class GoalRow:
    eps: float
    m: float
    residual: float
    worst_side: str
    worst_set: str
    feasible: dict


@dataclass(frozen=True)
class Run:
    name: str
    certificate: dict
    config: dict | None
    goal_rows: list[GoalRow] | None

    @property
    def failed(self) -> bool:
        return self.certificate.get("h") is None

    @property
    def truth(self) -> dict | None:
        return self.certificate.get("truth")


@dataclass(frozen=True)
class ExperimentBatch:
    root: str
    runs: list[Run]

    def goal_runs(self) -> list[Run]:
        return [r for r in self.runs if r.goal_rows is not None]

    def truth_runs(self) -> list[Run]:
        return [r for r in self.runs if not r.failed and r.truth is not None]

    def failures(self) -> list[Run]:
        return [r for r in self.runs if r.failed]


def _load_json(path: Path, expected_schema: str) -> dict:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"{path}: unreadable ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("schema") != expected_schema:
        raise SchemaMismatch(
            f"{path}: expected schema {expected_schema!r}, "
            f"found {doc.get('schema')!r}")
    return doc


def load_goal_csv(path: Path) -> list[GoalRow]:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#"):
        raise SchemaMismatch(f"{path}: missing schema comment line")
    if f"schema={GOAL_SCHEMA}" not in lines[0]:
        raise SchemaMismatch(f"{path}: unexpected schema line {lines[0]!r}")
    reader = csv.reader(lines[1:])
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatch(f"{path}: missing header row") from None
    missing = [c for c in GOAL_COLUMNS if c not in header]
    if missing:
        raise SchemaMismatch(f"{path}: missing column(s) {missing}")
    index = {c: header.index(c) for c in GOAL_COLUMNS}
    rows = []
    for raw in reader:
        if not raw:
            continue
        try:
            rows.append(GoalRow(
                eps=float(raw[index["eps"]]),
                m=float(raw[index["m"]]),
                residual=float(raw[index["residual"]]),
                worst_side=raw[index["worst_side"]],
                worst_set=raw[index["worst_set"]],
                feasible={d: raw[index[f"feasible_d{d}"]] == "1"
                          for d in ("0.9", "0.5", "0.1")},
            ))
        except (ValueError, IndexError) as exc:
            raise SchemaMismatch(f"{path}: malformed row {raw!r}") from exc
    return rows


def discover_batch(root) -> ExperimentBatch:
    """Collect every run directory under ``root`` (sorted by name)."""
    root = Path(root)
    if not root.is_dir():
        raise SchemaMismatch(f"{root}: not a directory")
    runs = []
    for cert_path in sorted(root.rglob("certificate.json")):
        run_dir = cert_path.parent
        certificate = _load_json(cert_path, CERT_SCHEMA)
        config_path = run_dir / "config.json"
        config = _load_json(config_path, CONFIG_SCHEMA) \
            if config_path.exists() else None
        goal_path = run_dir / "goal.csv"
        goal_rows = load_goal_csv(goal_path) if goal_path.exists() else None
        runs.append(Run(
            name=str(run_dir.relative_to(root)),
            certificate=certificate,
            config=config,
            goal_rows=goal_rows,
        ))
    return ExperimentBatch(root=str(root), runs=runs)
