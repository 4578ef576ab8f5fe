"""Micro-data ingestion, society files and report serialization.

Society files are JSON documents::

    {"schema_version": "1", "name": "...",
     "types": [{"label": "R", "share": 0.2,
                "distribution": [{"income": 1.0, "prob": 0.1}, ...]}, ...]}

Micro-data is CSV with a ``type,income[,weight]`` header.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import jsonschema
import numpy as np

from .dominance import CAFamilyResult, DominanceVerdict
from .exceptions import SchemaError, ValidationError
from .indices import EvaluationReport, InequalityReport, SweepRow
from .model import IncomeDistribution, Society, TypeEntry
from .welfare import WeightVector

SCHEMA_VERSION = "1"

SOCIETY_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "types"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": ["string", "null"]},
        "types": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "share", "distribution"],
                "properties": {
                    "label": {"type": "string"},
                    "share": {"type": "number"},
                    "distribution": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["income", "prob"],
                            "properties": {
                                "income": {"type": "number"},
                                "prob": {"type": "number"},
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

_VALIDATOR = jsonschema.Draft202012Validator(SOCIETY_SCHEMA)


# ---------------------------------------------------------------------------
# micro-data


@dataclass(frozen=True)
class MicroRecord:
    type_label: str
    income: float
    weight: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.income) and self.income > 0):
            raise ValidationError(f"income must be > 0, got {self.income!r}")
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise ValidationError(f"weight must be > 0, got {self.weight!r}")


@dataclass(frozen=True)
class Binning:
    """``Binning()`` keeps every observed income; ``Binning(k)`` uses k pooled quantile bins."""

    quantiles: int | None = None

    def __post_init__(self):
        if self.quantiles is not None and self.quantiles < 1:
            raise ValueError("quantile binning needs k >= 1")

    @classmethod
    def parse(cls, text: str) -> "Binning":
        text = text.strip().lower()
        if text == "exact":
            return cls()
        if text.startswith("quantile:"):
            try:
                return cls(int(text.split(":", 1)[1]))
            except ValueError:
                pass
        raise ValueError(f"unknown binning {text!r}; expected 'exact' or 'quantile:<k>'")

    def __str__(self) -> str:
        return "exact" if self.quantiles is None else f"quantile:{self.quantiles}"


EXACT = Binning()


def read_microdata_csv(source: str | os.PathLike | IO[str]) -> Iterator[MicroRecord]:
    """Yield records from a ``type,income[,weight]`` CSV file."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            yield from read_microdata_csv(fh)
        return
    reader = csv.reader(source)
    header = [h.strip().lower() for h in next(reader, [])]
    if header not in (["type", "income"], ["type", "income", "weight"]):
        raise ValidationError(f"micro-data header must be 'type,income[,weight]', got {header!r}")
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ValidationError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
        try:
            income = float(row[1])
            weight = float(row[2]) if len(row) == 3 else 1.0
        except ValueError:
            raise ValidationError(f"row {row_no}: cannot parse number in {row!r}") from None
        try:
            yield MicroRecord(row[0].strip(), income, weight)
        except ValidationError as exc:
            raise ValidationError(f"row {row_no}: {exc}") from None


def _weighted_quantile_edges(y: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    order = np.argsort(y, kind="stable")
    ys, cw = y[order], np.cumsum(w[order])
    cw = cw / cw[-1]
    idx = np.searchsorted(cw, np.arange(1, k) / k, side="left")
    return ys[np.minimum(idx, len(ys) - 1)]


def ingest_microdata(records: Iterable[MicroRecord], binning: Binning = EXACT, name: str | None = None) -> Society:
    """Turn individual records into a society.

    Type shares are weight shares.  With exact binning each type gets one atom
    per distinct income.  With ``k`` quantile bins the pooled sample is cut at
    its weighted quantiles and each type's mass in a bin sits at the type's
    weighted mean income within that bin.
    """
    labels: list[str] = []
    rows: dict[str, list[tuple[float, float]]] = {}
    for rec in records:
        if rec.type_label not in rows:
            labels.append(rec.type_label)
            rows[rec.type_label] = []
        rows[rec.type_label].append((float(rec.income), float(rec.weight)))
    if not labels:
        raise ValidationError("no micro-data records")

    type_weight = {lab: math.fsum(w for _, w in rows[lab]) for lab in labels}
    total = math.fsum(type_weight.values())

    if binning.quantiles is None:
        dists = {}
        for lab in labels:
            acc: dict[float, list[float]] = {}
            for y, w in rows[lab]:
                acc.setdefault(y, []).append(w)
            ys = sorted(acc)
            dists[lab] = IncomeDistribution(
                tuple(ys), tuple(math.fsum(acc[y]) / type_weight[lab] for y in ys)
            )
    else:
        all_y = np.array([y for lab in labels for y, _ in rows[lab]])
        all_w = np.array([w for lab in labels for _, w in rows[lab]])
        edges = _weighted_quantile_edges(all_y, all_w, binning.quantiles)
        dists = {}
        for lab in labels:
            ys = np.array([y for y, _ in rows[lab]])
            ws = np.array([w for _, w in rows[lab]])
            bins = np.searchsorted(edges, ys, side="left")
            atoms, masses = [], []
            for b in np.unique(bins):
                sel = bins == b
                mass = math.fsum(ws[sel])
                atoms.append(math.fsum(ws[sel] * ys[sel]) / mass)
                masses.append(mass / type_weight[lab])
            dists[lab] = IncomeDistribution(tuple(atoms), tuple(masses))

    return Society(
        tuple(TypeEntry(lab, type_weight[lab] / total, dists[lab]) for lab in labels), name=name
    )


# ---------------------------------------------------------------------------
# society documents


def society_to_document(society: Society) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": society.name,
        "types": [
            {
                "label": t.label,
                "share": t.share,
                "distribution": [{"income": y, "prob": p} for y, p in zip(t.dist.incomes, t.dist.probs)],
            }
            for t in society.types
        ],
    }


def society_from_document(doc: dict) -> Society:
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "".join(f"/{p}" for p in err.absolute_path)
        raise SchemaError(err.message, pointer)
    bad_labels, messages, entries = [], [], []
    for t in doc["types"]:
        try:
            dist = IncomeDistribution(
                tuple(a["income"] for a in t["distribution"]),
                tuple(a["prob"] for a in t["distribution"]),
            )
            entries.append(TypeEntry(t["label"], t["share"], dist))
        except ValidationError as exc:
            bad_labels.append(t["label"])
            messages.append(str(exc))
    if bad_labels:
        raise ValidationError("; ".join(sorted(set(messages))), tuple(bad_labels))
    return Society(tuple(entries), name=doc.get("name"))


def dumps_society(society: Society) -> str:
    return json.dumps(society_to_document(society), indent=2, ensure_ascii=False) + "\n"


def save_society(society: Society, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_society(society))


def load_society(path: str | os.PathLike) -> Society:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
    return society_from_document(doc)


# ---------------------------------------------------------------------------
# reports


def _fmt(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def _to_plain(obj):
    if isinstance(obj, WeightVector):
        return obj.as_dict()
    if isinstance(obj, (EvaluationReport, InequalityReport, SweepRow, CAFamilyResult, DominanceVerdict)):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _dump(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(k, ensure_ascii=False) + ": ")
            _dump(v, out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _dump(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v) -> str:
    return _fmt(v).strip('"') if isinstance(v, float) else str(v)


def _table(obj) -> tuple[list[str], list[list]]:
    if isinstance(obj, (list, tuple)) and obj and all(isinstance(r, SweepRow) for r in obj):
        header = [f.name for f in dataclasses.fields(SweepRow)]
        return header, [[getattr(r, h) for h in header] for r in obj]
    if isinstance(obj, InequalityReport):
        header = [f.name for f in dataclasses.fields(InequalityReport)]
        return header, [[getattr(obj, h) for h in header]]
    if isinstance(obj, DominanceVerdict):
        return ["rho", "theta", "margin"], [list(r) for r in zip(obj.theta_grid, obj.thetas, obj.margins)]
    if isinstance(obj, WeightVector):
        return ["label", "weight"], [[lab, w] for lab, w in zip(obj.labels, obj.weights)]
    if isinstance(obj, EvaluationReport):
        return ["label", "type_utility", "weight"], [
            [lab, obj.type_utilities[lab], w] for lab, w in zip(obj.weights.labels, obj.weights.weights)
        ]
    raise TypeError(f"no CSV layout for {type(obj).__name__}")


def emit_report(report, fmt: str = "json") -> bytes:
    """Serialize a report deterministically.

    Floats are written with 17 significant digits so they read back
    bit-for-bit; infinities become the strings ``"inf"`` / ``"-inf"``.
    """
    if fmt == "json":
        out: list[str] = []
        _dump(_to_plain(report), out)
        return ("".join(out) + "\n").encode("utf-8")
    if fmt == "csv":
        header, rows = _table(report)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}; expected 'json' or 'csv'")
