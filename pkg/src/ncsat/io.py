"""Config documents (YAML), result CSVs and run manifests."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import yaml
from pydantic import ValidationError

from .engine import BerRecord
from .errors import ConfigParseError, ConfigValidationError, ResultOrderError
from .scenario import PRESETS, ScenarioConfig

CSV_HEADER = [
    "n_ele",
    "R",
    "snr_db",
    "user_id",
    "bit_errors",
    "bits",
    "ber",
    "aggregate_ber",
    "frames",
    "seed",
]
RESULTS_NAME = "results.csv"
MANIFEST_NAME = "manifest.yaml"


def parse_config(text: str) -> ScenarioConfig:
    """Parse a YAML scenario document.

    An optional ``preset`` key supplies defaults from a built-in scenario;
    every other top-level key overrides the corresponding field. Unknown keys
    are rejected.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigParseError(problem, line=line) from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigParseError(f"top level must be a mapping, got {type(doc).__name__}", line=1)

    doc = dict(doc)
    preset = doc.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigValidationError(
                f"preset: unknown preset {preset!r}; choose from {sorted(PRESETS)}", ["preset"]
            )
        base = PRESETS[preset]().model_dump()
        base.update(doc)
        doc = base

    return _validate(doc)


def override_config(config: ScenarioConfig, **updates) -> ScenarioConfig:
    """Re-validated copy of ``config`` with ``updates`` applied."""
    doc = config.model_dump()
    doc.update(updates)
    return _validate(doc)


def _validate(doc: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(doc)
    except ValidationError as exc:
        fields = []
        lines = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "<document>"
            fields.append(loc)
            lines.append(f"{loc}: {err['msg']}")
        raise ConfigValidationError("invalid config:\n  " + "\n  ".join(lines), fields) from exc


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def config_document(config: ScenarioConfig) -> dict:
    """Plain mapping that :func:`parse_config` maps back to ``config``."""
    doc = config.model_dump()
    doc["user_positions_deg"] = [list(p) for p in doc["user_positions_deg"]]
    return doc


def dump_config(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config_document(config), sort_keys=False)


@dataclass(frozen=True)
class RunManifest:
    config: ScenarioConfig
    output_dir: Path
    config_path: Optional[str] = None
    tool_version: str = ""
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def master_seed(self) -> int:
        return self.config.master_seed

    def document(self) -> dict:
        return {
            "config_path": self.config_path,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
            "master_seed": self.master_seed,
            "results": RESULTS_NAME,
            "config": config_document(self.config),
        }


def _fmt(x: float) -> str:
    return repr(float(x))


def results_csv(records: Sequence[BerRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        agg = _fmt(r.aggregate_ber)
        for j, (e, b, ber) in enumerate(zip(r.per_user_bit_errors, r.per_user_bits, r.per_user_ber)):
            w.writerow([r.n_ele, r.R, _fmt(r.snr_db), j, e, b, _fmt(ber), agg, r.frames_run, r.master_seed])
        w.writerow(
            [r.n_ele, r.R, _fmt(r.snr_db), -1, r.total_errors, r.total_bits, agg, agg, r.frames_run, r.master_seed]
        )
    return buf.getvalue()


def check_sweep_order(records: Sequence[BerRecord], config: ScenarioConfig) -> None:
    expected = config.points()
    got = [(r.n_ele, r.snr_db) for r in records]
    if got != expected:
        raise ResultOrderError(f"records are not in sweep order: expected {expected}, got {got}")


def emit_results(records: Sequence[BerRecord], manifest: RunManifest) -> tuple[Path, Path]:
    """Write ``results.csv`` and ``manifest.yaml`` into ``manifest.output_dir``."""
    if not records:
        raise ValueError("no records to emit")
    check_sweep_order(records, manifest.config)
    out = Path(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / RESULTS_NAME
    manifest_path = out / MANIFEST_NAME
    csv_path.write_text(results_csv(records))
    manifest_path.write_text(yaml.safe_dump(manifest.document(), sort_keys=False))
    return csv_path, manifest_path


def read_results_csv(path) -> list[BerRecord]:
    """Inverse of :func:`results_csv`; aggregate rows are cross-checked, not stored."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        rows = list(reader)

    records = []
    pending: list[dict] = []
    for row in rows:
        if int(row["user_id"]) >= 0:
            pending.append(row)
            continue
        rec = BerRecord(
            n_ele=int(row["n_ele"]),
            R=int(row["R"]),
            snr_db=float(row["snr_db"]),
            per_user_bit_errors=tuple(int(p["bit_errors"]) for p in pending),
            per_user_bits=tuple(int(p["bits"]) for p in pending),
            frames_run=int(row["frames"]),
            master_seed=int(row["seed"]),
        )
        if [int(p["user_id"]) for p in pending] != list(range(len(pending))):
            raise ValueError("user rows out of order")
        if rec.total_errors != int(row["bit_errors"]) or rec.aggregate_ber != float(row["aggregate_ber"]):
            raise ValueError(f"aggregate row inconsistent for n_ele={rec.n_ele}, snr={rec.snr_db}")
        records.append(rec)
        pending = []
    if pending:
        raise ValueError("trailing user rows without aggregate row")
    return records


def load_manifest_config(path) -> ScenarioConfig:
    doc = yaml.safe_load(Path(path).read_text())
    return parse_config(yaml.safe_dump(doc["config"]))
