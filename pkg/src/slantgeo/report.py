"""Check reports, tolerance bundle and deterministic serialization.

Two runs with identical inputs must produce byte-identical JSON, so the JSON
emitter here controls key order and float formatting itself (17 significant
digits) instead of relying on library defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields


@dataclass(frozen=True)
class Tolerances:
    """Residual bounds by identity class.

    algebraic: identities that are plain linear algebra on jet output.
    derivative: identities mixing closed-form derivatives of operator fields.
    fd_oracle: agreement with the central finite-difference oracle (tests).
    angle_constancy: allowed wobble of slant angles across sample points.
    cluster_gap: eigenvalue gap below which pencil eigenvalues are grouped.
    """

    algebraic: float = 1e-9
    derivative: float = 1e-6
    fd_oracle: float = 1e-5
    angle_constancy: float = 1e-7
    cluster_gap: float = 1e-8

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0.0:
                raise ValueError(f"tolerance {f.name} must be strictly positive")

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class IdentityRecord:
    """Outcome of one identity: max residual over all points and test vectors."""

    id: str
    points: int
    max_residual: float
    tolerance: float
    passed: bool
    note: str | None = None
    vacuous: bool = False

    def __post_init__(self):
        if not math.isfinite(self.max_residual):
            raise ValueError(f"non-finite residual in identity {self.id!r}")


@dataclass(frozen=True)
class CheckReport:
    """A named suite's worth of identity records plus an overall verdict."""

    suite_id: str
    records: tuple[IdentityRecord, ...]
    status: str  # pass | fail | skipped | vacuous
    note: str | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def max_residual(self) -> float:
        return max((r.max_residual for r in self.records), default=0.0)

    @classmethod
    def from_records(cls, suite_id: str, records: tuple[IdentityRecord, ...],
                     note: str | None = None) -> "CheckReport":
        if not all(r.passed for r in records):
            status = "fail"
        elif records and all(r.vacuous for r in records):
            status = "vacuous"
        else:
            status = "pass"
        return cls(suite_id=suite_id, records=records, status=status, note=note)

    @classmethod
    def skipped(cls, suite_id: str, note: str) -> "CheckReport":
        return cls(suite_id=suite_id, records=(), status="skipped", note=note)


# ---------------------------------------------------------------------------
# Deterministic JSON


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("cannot serialize a non-finite float")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def json_dumps(obj) -> str:
    """Minimal JSON emitter: sorted keys, floats at 17 significant digits."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return _escape(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(json_dumps(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: kv[0])
        return "{" + ",".join(_escape(k) + ":" + json_dumps(v) for k, v in items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_to_dict(report: CheckReport) -> dict:
    return {
        "id": report.suite_id,
        "status": report.status,
        "note": report.note,
        "identities": [
            {
                "id": r.id,
                "max_residual": r.max_residual,
                "tolerance": r.tolerance,
                "pass": r.passed,
                "note": r.note,
            }
            for r in report.records
        ],
    }


def report_to_text(report: CheckReport) -> str:
    lines = [f"suite {report.suite_id}: {report.status.upper()}"
             + (f"  [{report.note}]" if report.note else "")]
    for r in report.records:
        flag = "pass" if r.passed else "FAIL"
        line = (f"  {r.id:<34} {flag}  max_residual={r.max_residual:.3e}"
                f"  tol={r.tolerance:.1e}  points={r.points}")
        if r.note:
            line += f"  [{r.note}]"
        lines.append(line)
    return "\n".join(lines)
