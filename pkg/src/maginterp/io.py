"""Deterministic CSV/JSON emission and the potential-file reader."""
from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import ParseError
from .klt import PotentialGrid, parse_tail

SCHEMA_VERSION = 1


def fmt(x) -> str:
    """15 significant digits, locale independent."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.14e" % x


def _json_value(x):
    if isinstance(x, str) or x is None:
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return fmt(x)
    # round-trip through the fixed text form so csv and json carry the same numbers
    return float(fmt(x))


def render_csv(metadata: dict, columns: list[str], rows: list[list]) -> str:
    out = []
    for key in sorted(metadata):
        out.append(f"# {key}: {json.dumps(metadata[key], sort_keys=True)}")
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(fmt(v) for v in row))
    return "\n".join(out) + "\n"


def render_json(metadata: dict, columns: list[str], rows: list[list]) -> str:
    doc = {"metadata": metadata, "columns": columns,
           "rows": [[_json_value(v) for v in row] for row in rows]}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def render(fmt_name: str, metadata, columns, rows) -> str:
    if fmt_name == "json":
        return render_json(metadata, columns, rows)
    return render_csv(metadata, columns, rows)


def read_csv_table(text: str) -> tuple[dict, list[str], list[list[str]]]:
    """Inverse of render_csv (values left as strings)."""
    meta, columns, rows = {}, None, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        elif columns is None:
            columns = line.split(",")
        elif line:
            rows.append(line.split(","))
    return meta, columns or [], rows


_HEADER_ITEM = re.compile(r"^([A-Za-z_]+)=(\S+)$")


def parse_potential(text: str, source: str = "<potential>") -> PotentialGrid:
    """Read '# d=<2|3> tail=<none|constant|power:k> [offset=<o>]' then 'r,phi' rows.

    A literal 'r,phi' column header and further '#' comment lines are allowed.
    """
    lines = text.splitlines()
    header = None
    rs, phis = [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if header is None and ("d=" in body or "tail=" in body):
                header = {}
                for tok in body.split():
                    m = _HEADER_ITEM.match(tok)
                    if not m:
                        raise ParseError(f"{source}: malformed header item {tok!r}", lineno)
                    header[m.group(1)] = m.group(2)
            continue
        if header is None:
            raise ParseError(f"{source}: data before the '# d=... tail=...' header", lineno)
        if line.replace(" ", "").lower() == "r,phi":
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ParseError(f"{source}: expected 2 columns 'r,phi', got {len(parts)}", lineno)
        try:
            r, phi = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ParseError(f"{source}: non-numeric value in {line!r}", lineno) from exc
        if not (math.isfinite(r) and math.isfinite(phi)):
            raise ParseError(f"{source}: non-finite value", lineno)
        if r < 0:
            raise ParseError(f"{source}: negative radius {r}", lineno)
        if rs and r <= rs[-1]:
            raise ParseError(f"{source}: radius {r} not strictly increasing", lineno)
        rs.append(r)
        phis.append(phi)
    if header is None:
        raise ParseError(f"{source}: missing '# d=<2|3> tail=<model>' header")
    unknown = set(header) - {"d", "tail", "offset"}
    if unknown:
        raise ParseError(f"{source}: unknown header keys {sorted(unknown)}")
    if header.get("d") not in ("2", "3"):
        raise ParseError(f"{source}: header needs d=2 or d=3")
    if len(rs) < 2:
        raise ParseError(f"{source}: need at least two data rows")
    try:
        model, k = parse_tail(header.get("tail", "none"))
        offset = float(header.get("offset", 0.0))
        return PotentialGrid(np.array(rs), np.array(phis), int(header["d"]), model, k, offset)
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from exc


def read_potential(path) -> PotentialGrid:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_potential(text, str(path))


def write_potential(path, pot: PotentialGrid) -> None:
    head = f"# d={pot.d} tail={pot.tail_description}"
    if pot.tail_offset:
        head += f" offset={pot.tail_offset!r}"
    body = "\n".join(f"{r!r},{v!r}" for r, v in zip(pot.nodes.tolist(), pot.values.tolist()))
    Path(path).write_text(head + "\nr,phi\n" + body + "\n")
