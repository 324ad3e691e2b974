"""CSV/JSON writers for sweep tables and per-frame ledgers."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .aoi import FrameRecord

RESULT_COLUMNS = (
    "value", "aoi_avg", "aoi_stderr", "paoi_avg", "paoi_stderr",
    "coverage", "delivered", "lost_comm", "lost_detect",
)
COUNT_COLUMNS = ("delivered", "lost_comm", "lost_detect")
LEDGER_COLUMNS = ("i", "t_i", "t'_i", "T_i", "Y_i", "delivered")
SIGNIFICANT = 6


class NonFiniteError(ValueError):
    """A NaN or infinite value reached an output table."""


def round_sig(x: float, digits: int = SIGNIFICANT) -> float:
    return float(f"{x:.{digits}g}")


def _check_finite(name, x):
    if not math.isfinite(x):
        raise NonFiniteError(f"non-finite value in column {name!r}: {x}")


@dataclass
class ResultTable:
    """Sweep output. Float cells are held at the precision they are written with."""

    parameter: str
    rows: list[dict] = field(default_factory=list)

    def add(self, row: dict):
        missing = set(RESULT_COLUMNS) - set(row)
        if missing:
            raise ValueError(f"row lacks columns {sorted(missing)}")
        clean = {}
        for c in RESULT_COLUMNS:
            v = row[c]
            if c in COUNT_COLUMNS:
                clean[c] = int(v)
            else:
                v = float(v)
                _check_finite(c, v)
                clean[c] = round_sig(v)
        self.rows.append(clean)

    @classmethod
    def from_sweep(cls, parameter: str, rows) -> "ResultTable":
        table = cls(parameter)
        for r in rows:
            table.add(r.as_dict() if hasattr(r, "as_dict") else r)
        return table

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in self.rows:
            w.writerow([str(r[c]) if c in COUNT_COLUMNS else f"{r[c]:.{SIGNIFICANT}g}"
                        for c in RESULT_COLUMNS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, parameter: str = "") -> "ResultTable":
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader))
        if header != RESULT_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        table = cls(parameter)
        for line in reader:
            table.add(dict(zip(header, line)))
        return table

    def to_json(self) -> str:
        return json.dumps({"parameter": self.parameter, "columns": list(RESULT_COLUMNS),
                           "rows": self.rows}, indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        doc = json.loads(text)
        return cls.from_sweep(doc["parameter"], doc["rows"])


def ledger_rows(records: Sequence[FrameRecord]) -> list[tuple]:
    """One row per frame. T_i and Y_i refer to delivered frames only; they
    are left empty for lost frames and for a frame that never reached ground."""
    rows = []
    prev = 0.0
    for r in records:
        arrival = r.arrival
        finite = math.isfinite(arrival)
        if r.delivered:
            T, Y = arrival - r.capture_time, r.capture_time - prev
            prev = r.capture_time
        else:
            T = Y = None
        rows.append((r.index, r.capture_time, arrival if finite else None, T, Y, int(r.delivered)))
    return rows


def ledger_csv(records: Sequence[FrameRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LEDGER_COLUMNS)
    for row in ledger_rows(records):
        w.writerow(["" if v is None else repr(v) for v in row])
    return buf.getvalue()


def read_ledger(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != LEDGER_COLUMNS:
        raise ValueError(f"unexpected ledger header {reader.fieldnames}")
    out = []
    for row in reader:
        out.append({
            "i": int(row["i"]),
            "t_i": float(row["t_i"]),
            "t'_i": float(row["t'_i"]) if row["t'_i"] else None,
            "T_i": float(row["T_i"]) if row["T_i"] else None,
            "Y_i": float(row["Y_i"]) if row["Y_i"] else None,
            "delivered": bool(int(row["delivered"])),
        })
    return out


def records_from_ledger(rows: Sequence[dict]) -> list[FrameRecord]:
    return [
        FrameRecord(r["i"], r["t_i"], (r["t'_i"] if r["t'_i"] is not None else math.inf,),
                    r["delivered"])
        for r in rows
    ]


def dumps_json(doc) -> str:
    """Strict JSON: refuses NaN and infinities."""
    try:
        return json.dumps(doc, indent=2, allow_nan=False, sort_keys=False)
    except ValueError as exc:
        raise NonFiniteError(str(exc)) from None


class OutputSession:
    """Collects files for one command; on failure every file written so far is removed.

    Files are written to a temporary name and renamed into place.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.written: list[Path] = []

    def __enter__(self):
        self.directory.mkdir(parents=True, exist_ok=True)
        return self

    def write(self, name: str, text: str) -> Path:
        path = self.directory / name
        tmp = path.with_name(path.name + ".partial")
        tmp.write_text(text)
        os.replace(tmp, path)
        self.written.append(path)
        return path

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            for p in self.written:
                p.unlink(missing_ok=True)
            for p in self.directory.glob("*.partial"):
                p.unlink(missing_ok=True)
        return False
