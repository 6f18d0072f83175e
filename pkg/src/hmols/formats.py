"""Interchange formats: grid files for squares, JSON for block designs,
and JSON certificates for cyclotomic searches.

Grid files carry 1-based symbols with "." for blanks, matching how the
squares are usually printed; everything else is 0-based JSON.  Both
printers emit a canonical form (sorted holes, lexicographically sorted
blocks, fixed whitespace) so that parse-then-print is byte-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .designs import (
    BLANK,
    HOLE_NONE,
    HOLE_SINGLE,
    HOLE_UNIFORM,
    BlockDesign,
    HoleyLatinSquareSet,
    IncompleteMolsSet,
    LatinSquare,
)
from .errors import MalformedInput

# ---------------------------------------------------------------------------
# grid files
# ---------------------------------------------------------------------------


def _cell_str(x: int) -> str:
    return "." if x == BLANK else str(int(x) + 1)


def _cell_val(tok: str, size: int) -> int:
    if tok == ".":
        return BLANK
    try:
        v = int(tok) - 1
    except ValueError:
        raise MalformedInput(f"bad cell token {tok!r}") from None
    if not 0 <= v < size:
        raise MalformedInput(f"symbol {tok} out of range 1..{size}")
    return v


def _rows_str(arr) -> list[str]:
    return [" ".join(_cell_str(x) for x in row) for row in arr]


def _holes_str(holes) -> str:
    return "|".join(",".join(str(x + 1) for x in cell) for cell in holes)


def _parse_holes(text: str) -> tuple:
    cells = []
    for part in text.split("|"):
        cells.append(tuple(int(x) - 1 for x in part.split(",")))
    return tuple(cells)


def grid_dumps(obj) -> str:
    """Canonical grid text for a latin square, HMOLS set, or IMOLS set."""
    if isinstance(obj, LatinSquare):
        lines = [f"latin {obj.n}"] + _rows_str(obj.cells)
    elif isinstance(obj, HoleyLatinSquareSet):
        lines = [f"hmols {obj.k} {obj.h} {obj.n}", f"holes {_holes_str(obj.holes)}"]
        for t in range(obj.k):
            if t:
                lines.append("")
            lines.extend(_rows_str(obj.squares[t]))
    elif isinstance(obj, IncompleteMolsSet):
        hole = ",".join(str(x + 1) for x in obj.hole) if obj.hole else "-"
        lines = [f"imols {obj.k} {obj.n}", f"hole {hole}"]
        for t in range(obj.k):
            if t:
                lines.append("")
            lines.extend(_rows_str(obj.squares[t]))
    else:
        raise MalformedInput(f"cannot serialize {type(obj).__name__} as a grid")
    return "\n".join(lines) + "\n"


def _parse_blocks(lines, count, side, size):
    squares = np.full((count, side, side), BLANK, dtype=np.int32)
    pos = 0
    for t in range(count):
        if t:
            if pos >= len(lines) or lines[pos] != "":
                raise MalformedInput("expected a blank line between squares")
            pos += 1
        for r in range(side):
            if pos >= len(lines):
                raise MalformedInput("grid body ended early")
            toks = lines[pos].split(" ")
            if len(toks) != side:
                raise MalformedInput(f"row has {len(toks)} cells, expected {side}")
            squares[t, r] = [_cell_val(x, size) for x in toks]
            pos += 1
    if pos != len(lines):
        raise MalformedInput("trailing content after grid body")
    return squares


def grid_loads(text: str):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # the canonical trailing newline
    if not lines:
        raise MalformedInput("empty grid file")
    head = lines[0].split(" ")
    if head[0] == "latin":
        if len(head) != 2:
            raise MalformedInput("latin header is 'latin n'")
        n = int(head[1])
        squares = _parse_blocks(lines[1:], 1, n, n)
        return LatinSquare.from_array(squares[0])
    if head[0] == "hmols":
        if len(head) != 4 or len(lines) < 2 or not lines[1].startswith("holes "):
            raise MalformedInput("hmols header is 'hmols k h n' + holes line")
        k, h, n = (int(x) for x in head[1:])
        holes = _parse_holes(lines[1][len("holes "):])
        squares = _parse_blocks(lines[2:], k, h * n, h * n)
        return HoleyLatinSquareSet.from_arrays(h=h, n=n, holes=holes, squares=squares)
    if head[0] == "imols":
        if len(head) != 3 or len(lines) < 2 or not lines[1].startswith("hole "):
            raise MalformedInput("imols header is 'imols k n' + hole line")
        k, n = int(head[1]), int(head[2])
        hole_txt = lines[1][len("hole "):]
        hole = () if hole_txt == "-" else tuple(int(x) - 1 for x in hole_txt.split(","))
        squares = _parse_blocks(lines[2:], k, n, n)
        return IncompleteMolsSet.from_arrays(n=n, hole=hole, squares=squares)
    raise MalformedInput(f"unknown grid kind {head[0]!r}")


# ---------------------------------------------------------------------------
# block design JSON
# ---------------------------------------------------------------------------

_KIND_BY_HOLES = {HOLE_NONE: "TD", HOLE_UNIFORM: "HTD", HOLE_SINGLE: "ITD"}
_HOLES_BY_KIND = {v: k for k, v in _KIND_BY_HOLES.items()}


def design_dumps(d: BlockDesign) -> str:
    doc = {
        "kind": _KIND_BY_HOLES[d.hole_kind],
        "k": d.k,
        "group_size": d.group_size,
        "index": d.index,
        "holes": [list(c) for c in d.holes],
        "blocks": [[int(x) for x in row] for row in d.sorted_blocks()],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def design_loads(text: str) -> BlockDesign:
    doc = json.loads(text)
    try:
        kind = _HOLES_BY_KIND[doc["kind"]]
        return BlockDesign.new(k=doc["k"], group_size=doc["group_size"],
                               index=doc["index"], blocks=doc["blocks"],
                               hole_kind=kind,
                               holes=tuple(tuple(c) for c in doc["holes"]))
    except KeyError as exc:
        raise MalformedInput(f"design file misses field {exc}") from None


# ---------------------------------------------------------------------------
# search certificates
# ---------------------------------------------------------------------------


def cert_dumps(cert: dict) -> str:
    """Certificate: {h, d, q, omega, col_selection, u_vectors, seed}.

    col_selection may be null when the template column assignment is yet
    to be recovered; u_vectors then carry null blanks at template width.
    """
    doc = {
        "h": cert["h"],
        "d": cert["d"],
        "q": cert["q"],
        "omega": cert.get("omega"),
        "col_selection": cert.get("col_selection"),
        "u_vectors": [[None if x is None else int(x) for x in u]
                      for u in cert["u_vectors"]],
        "seed": cert.get("seed"),
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def cert_loads(text: str) -> dict:
    doc = json.loads(text)
    for key in ("h", "d", "q", "u_vectors"):
        if key not in doc:
            raise MalformedInput(f"certificate misses field {key!r}")
    if doc.get("col_selection") is not None:
        doc["col_selection"] = [int(x) for x in doc["col_selection"]]
    doc["u_vectors"] = [[None if x is None else int(x) for x in u]
                        for u in doc["u_vectors"]]
    return doc
