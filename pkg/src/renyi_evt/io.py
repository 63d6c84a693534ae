"""CSV/JSON emission with exact rationals and a run manifest."""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import platform
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__

DECIMAL_DIGITS = 15

if hasattr(sys, "set_int_max_str_digits"):
    # exact rationals at large k run to ~10^5 decimal digits
    sys.set_int_max_str_digits(0)


def decimal_str(v, digits: int = DECIMAL_DIGITS) -> str:
    """``digits`` significant digits; exponents beyond float range are kept."""
    if v is None:
        return ""
    if isinstance(v, Fraction):
        with mpmath.workprec(digits * 4 + 16):
            return mpmath.nstr(mpmath.mpf(v.numerator) / v.denominator, digits)
    if isinstance(v, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(v, digits)
    if isinstance(v, float):
        return f"{v:.{digits}g}"
    return str(v)


def cell(v) -> str:
    """Serialized form of one value: rationals as ``num/den``."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (mpmath.mpf, mpmath.mpc, float)):
        return decimal_str(v)
    return str(v)


def with_decimal_columns(row: dict) -> dict:
    """Each non-integer rational column gets a ``<name>_dec`` companion for plotting."""
    out = {}
    for key, v in row.items():
        out[key] = v
        if isinstance(v, Fraction) and v.denominator != 1:
            out[f"{key}_dec"] = decimal_str(v)
    return out


def parse_cell(s: str):
    """Inverse of :func:`cell` for the types emitted here."""
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return mpmath.mpf(s)
    except (ValueError, TypeError):
        return s


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    budgets: dict
    rng: dict | None = None
    tool_version: str = __version__
    python: str = field(default_factory=platform.python_version)
    started: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat())
    finished: str | None = None
    summary: dict | None = None  # scalar results that do not fit the row table

    def finish(self) -> "RunManifest":
        self.finished = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["parameters"] = {k: cell(v) if isinstance(v, Fraction) else v for k, v in self.parameters.items()}
        if self.summary is not None:
            d["summary"] = {k: cell(v) if not isinstance(v, (int, str)) else v for k, v in self.summary.items()}
        return d


def columns_of(rows: list[dict]) -> list[str]:
    cols: list[str] = []
    for r in rows:
        for key in r:
            if key not in cols:
                cols.append(key)
    return cols


def csv_text(rows: list[dict]) -> str:
    rows = [with_decimal_columns(r) for r in rows]
    cols = columns_of(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([cell(r.get(c)) for c in cols])
    return buf.getvalue()


def json_text(rows: list[dict], manifest: RunManifest) -> str:
    rows = [with_decimal_columns(r) for r in rows]
    payload = {"manifest": manifest.to_dict(), "rows": [{k: cell(v) for k, v in r.items()} for r in rows]}
    return json.dumps(payload, indent=2) + "\n"


def write_output(path: str | Path, rows: list[dict], manifest: RunManifest, fmt: str | None = None) -> list[Path]:
    """Write rows as CSV (manifest in a ``.manifest.json`` sidecar) or JSON (manifest embedded)."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    manifest.finish()
    if fmt == "json":
        path.write_text(json_text(rows, manifest), encoding="utf-8")
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(rows))
    side = path.with_name(path.name + ".manifest.json")
    side.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")
    return [path, side]


def read_csv(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [{k: parse_cell(v) for k, v in r.items()} for r in csv.DictReader(fh)]


def format_table(rows: list[dict], max_width: int = 28) -> str:
    """Aligned plain-text table; long exact values are shown as decimals."""
    if not rows:
        return "(no rows)"
    cols = columns_of(rows)

    def show(v):
        s = cell(v)
        if isinstance(v, Fraction) and len(s) > max_width:
            s = decimal_str(v)
        return s if len(s) <= max_width else s[: max_width - 3] + "..."

    body = [[show(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(b[i]) for b in body)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(b, widths)) for b in body]
    return "\n".join(lines)
