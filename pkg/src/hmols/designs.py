"""Core design objects and their exhaustive verifiers.

Latin squares, holey MOLS sets, incomplete MOLS sets, and block designs
(transversal designs TD_lam(k,n), holey HTD(k,h^n), incomplete
ITD(k,(n;h))) share one convention: symbols and points are 0-based
integers internally and 1-based in the printed grid surface syntax,
with -1 marking a blank cell.

Verifiers count every pair exactly (vectorized bincounts per group or
square pair) and return the full violation list rather than failing
fast, so mutation tests and composition debugging see every defect.
All objects are immutable after construction; verification is pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf
from .errors import (
    AmbiguousCell,
    BadIndices,
    InvalidInput,
    MalformedInput,
    NotAnHTD,
    OrderTooSmall,
    TooManyGroups,
)

BLANK = -1

# violation kinds
ROW_DUP = "RowDup"
COL_DUP = "ColDup"
HOLE_SYMBOL = "HoleSymbol"
PAIR_MISSING = "PairMissing"
PAIR_REPEATED = "PairRepeated"
BLOCK_SHAPE = "BlockShape"
COUNT_MISMATCH = "CountMismatch"


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int32)
    a.setflags(write=False)
    return a


def _check_holes_partition(holes, size: int, cell_size: int | None = None):
    """Holes must be disjoint subsets of range(size); returns them sorted by
    minimum element with sorted members."""
    seen = set()
    norm = []
    for h in holes:
        cell = tuple(sorted(int(x) for x in h))
        if not cell:
            raise MalformedInput("empty hole cell")
        if cell_size is not None and len(cell) != cell_size:
            raise MalformedInput(f"hole cell {cell} is not of size {cell_size}")
        for x in cell:
            if not 0 <= x < size or x in seen:
                raise MalformedInput(f"hole element {x} repeated or out of range")
            seen.add(x)
        norm.append(cell)
    return tuple(sorted(norm, key=lambda c: c[0]))


def _hole_of_array(holes, size: int) -> np.ndarray:
    """Map point -> hole id (or -1 when the point is in no hole)."""
    hole_of = np.full(size, -1, dtype=np.int32)
    for t, cell in enumerate(holes):
        for x in cell:
            hole_of[x] = t
    return hole_of


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    violations: tuple

    def kinds(self) -> set[str]:
        return {kind for kind, _ in self.violations}


def _report(violations) -> VerificationReport:
    return VerificationReport(valid=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# latin squares
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatinSquare:
    """An n x n array over symbols 0..n-1, blanks allowed."""

    n: int
    cells: np.ndarray

    @staticmethod
    def from_array(cells) -> "LatinSquare":
        arr = np.asarray(cells)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise MalformedInput(f"latin square must be square, got {arr.shape}")
        n = arr.shape[0]
        if arr.min() < -1 or arr.max() >= n:
            raise MalformedInput("symbol out of range")
        return LatinSquare(n=n, cells=_freeze(arr))


def verify_latin(sq: LatinSquare) -> VerificationReport:
    """Each row and column holds each symbol at most once."""
    v = []
    n = sq.n
    for i in range(n):
        row = sq.cells[i]
        filled = row[row != BLANK]
        counts = np.bincount(filled, minlength=n)
        for s in np.nonzero(counts > 1)[0]:
            v.append((ROW_DUP, (i, int(s))))
    for j in range(n):
        col = sq.cells[:, j]
        filled = col[col != BLANK]
        counts = np.bincount(filled, minlength=n)
        for s in np.nonzero(counts > 1)[0]:
            v.append((COL_DUP, (j, int(s))))
    return _report(v)


# ---------------------------------------------------------------------------
# holey MOLS
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HoleyLatinSquareSet:
    """k squares of side h*n over a shared partition into n holes of size h.

    Every square is blank exactly on the union of H_t x H_t, symbols of a
    hole never meet rows or columns of that hole, and the squares are
    pairwise orthogonal off the holes.
    """

    k: int
    h: int
    n: int
    holes: tuple
    squares: np.ndarray  # (k, hn, hn)

    @staticmethod
    def from_arrays(h: int, n: int, holes, squares) -> "HoleyLatinSquareSet":
        g = h * n
        arr = np.asarray(squares)
        if arr.ndim != 3 or arr.shape[1:] != (g, g):
            raise MalformedInput(f"expected (k, {g}, {g}) squares, got {arr.shape}")
        if arr.size and (arr.min() < -1 or arr.max() >= g):
            raise MalformedInput("symbol out of range")
        norm = _check_holes_partition(holes, g, cell_size=h)
        if len(norm) != n:
            raise MalformedInput(f"expected {n} holes, got {len(norm)}")
        return HoleyLatinSquareSet(k=arr.shape[0], h=h, n=n, holes=norm,
                                   squares=_freeze(arr))

    def hole_of(self) -> np.ndarray:
        return _hole_of_array(self.holes, self.h * self.n)


def _verify_holey_square(v, sq_idx, square, hole_of, g):
    """Shared per-square checks: blank placement, duplicates, hole symbols."""
    same_hole = (hole_of[:, None] == hole_of[None, :]) & (hole_of[:, None] >= 0)
    blank = square == BLANK
    for i, j in zip(*np.nonzero(blank != same_hole)):
        v.append((COUNT_MISMATCH, (sq_idx, int(i), int(j))))
    fi, fj = np.nonzero(~blank)
    syms = square[fi, fj]
    # duplicates within a row / column
    for kind, idx in ((ROW_DUP, fi), (COL_DUP, fj)):
        counts = np.bincount(idx * g + syms, minlength=g * g)
        for key in np.nonzero(counts > 1)[0]:
            v.append((kind, (sq_idx, int(key // g), int(key % g))))
    # a symbol of hole t may not appear in rows or columns indexed by hole t
    bad = (hole_of[syms] >= 0) & \
        ((hole_of[syms] == hole_of[fi]) | (hole_of[syms] == hole_of[fj]))
    for i, j, s in zip(fi[bad], fj[bad], syms[bad]):
        v.append((HOLE_SYMBOL, (sq_idx, int(i), int(j), int(s))))


def _verify_pairwise(v, squares, g, expected):
    """Superimpose square pairs and compare ordered-symbol-pair counts with
    the expected multiplicity matrix (over filled cells of the first)."""
    k = squares.shape[0]
    for p in range(k):
        for r in range(p + 1, k):
            a, b = squares[p], squares[r]
            mask = (a != BLANK) & (b != BLANK)
            keys = a[mask].astype(np.int64) * g + b[mask]
            counts = np.bincount(keys, minlength=g * g).reshape(g, g)
            for x, y in zip(*np.nonzero(counts < expected)):
                v.append((PAIR_MISSING, (p, r, int(x), int(y),
                                         int(counts[x, y]))))
            for x, y in zip(*np.nonzero(counts > expected)):
                v.append((PAIR_REPEATED, (p, r, int(x), int(y),
                                          int(counts[x, y]))))


def verify_hmols(s: HoleyLatinSquareSet) -> VerificationReport:
    """Exact check of the holey-MOLS conditions by counting all pairs."""
    v = []
    g = s.h * s.n
    hole_of = s.hole_of()
    for idx in range(s.k):
        _verify_holey_square(v, idx, s.squares[idx], hole_of, g)
    same_hole = hole_of[:, None] == hole_of[None, :]
    expected = np.where(same_hole, 0, 1)
    _verify_pairwise(v, s.squares, g, expected)
    return _report(v)


# ---------------------------------------------------------------------------
# incomplete MOLS (single common hole)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IncompleteMolsSet:
    """k squares of order n with a single common hole H: cells H x H blank,
    hole symbols absent from hole rows/columns, orthogonal off the hole."""

    k: int
    n: int
    hole: tuple
    squares: np.ndarray  # (k, n, n)

    @staticmethod
    def from_arrays(n: int, hole, squares) -> "IncompleteMolsSet":
        arr = np.asarray(squares)
        if arr.ndim != 3 or arr.shape[1:] != (n, n):
            raise MalformedInput(f"expected (k, {n}, {n}) squares, got {arr.shape}")
        if arr.size and (arr.min() < -1 or arr.max() >= n):
            raise MalformedInput("symbol out of range")
        cell = tuple(sorted(int(x) for x in hole))
        if len(set(cell)) != len(cell) or any(not 0 <= x < n for x in cell):
            raise MalformedInput("hole repeats or leaves range")
        return IncompleteMolsSet(k=arr.shape[0], n=n, hole=cell, squares=_freeze(arr))

    def hole_of(self) -> np.ndarray:
        hole_of = np.full(self.n, -1, dtype=np.int32)
        for x in self.hole:
            hole_of[x] = 0
        return hole_of


def verify_imols(s: IncompleteMolsSet) -> VerificationReport:
    v = []
    hole_of = s.hole_of()
    for idx in range(s.k):
        _verify_holey_square(v, idx, s.squares[idx], hole_of, s.n)
    same_hole = (hole_of[:, None] >= 0) & (hole_of[None, :] >= 0)
    expected = np.where(same_hole, 0, 1)
    _verify_pairwise(v, s.squares, s.n, expected)
    return _report(v)


# ---------------------------------------------------------------------------
# block designs
# ---------------------------------------------------------------------------

HOLE_NONE = "none"
HOLE_UNIFORM = "uniform"
HOLE_SINGLE = "single"


@dataclass(frozen=True)
class BlockDesign:
    """k groups of group_size points with blocks transverse to the groups.

    The hole structure, shared by all groups, is either absent, a uniform
    partition into n holes of size h (holey TD), or one hole (incomplete
    TD).  Blocks are ordered k-tuples of per-group point indices, kept as
    a list with multiset semantics: TD_lam with lam > 1 legitimately
    repeats blocks.
    """

    k: int
    group_size: int
    index: int
    hole_kind: str
    holes: tuple
    blocks: np.ndarray  # (B, k)

    @staticmethod
    def new(k, group_size, index, blocks, hole_kind=HOLE_NONE, holes=()) -> "BlockDesign":
        arr = np.asarray(blocks, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, k)
        if arr.ndim != 2 or arr.shape[1] != k:
            raise MalformedInput(f"blocks must be ({arr.shape[0]}, {k}), got {arr.shape}")
        if k < 2:
            raise MalformedInput("a block design needs at least two groups")
        if hole_kind == HOLE_NONE:
            norm = ()
            if holes:
                raise MalformedInput("holes given for hole_kind 'none'")
        elif hole_kind == HOLE_UNIFORM:
            sizes = {len(c) for c in holes}
            if len(sizes) != 1:
                raise MalformedInput("uniform holes must have equal sizes")
            h = sizes.pop()
            norm = _check_holes_partition(holes, group_size, cell_size=h)
            if len(norm) * h != group_size:
                raise MalformedInput("uniform holes must partition the points")
        elif hole_kind == HOLE_SINGLE:
            if len(holes) != 1:
                raise MalformedInput("single profile takes exactly one hole")
            norm = _check_holes_partition(holes, group_size)
        else:
            raise MalformedInput(f"unknown hole kind {hole_kind!r}")
        return BlockDesign(k=k, group_size=group_size, index=index,
                           hole_kind=hole_kind, holes=norm, blocks=_freeze(arr))

    # derived uniform profile parameters
    @property
    def hole_size(self) -> int:
        return len(self.holes[0]) if self.holes else 0

    @property
    def hole_count(self) -> int:
        return len(self.holes)

    def hole_of(self) -> np.ndarray:
        return _hole_of_array(self.holes, self.group_size)

    def sorted_blocks(self) -> np.ndarray:
        """Blocks in canonical (lexicographic) order."""
        order = np.lexsort(self.blocks.T[::-1])
        return self.blocks[order]


def expected_block_count(d: BlockDesign) -> int:
    """index * (number of cross-hole ordered pairs per group pair)."""
    g = d.group_size
    return d.index * (g * g - sum(len(c) ** 2 for c in d.holes))


def verify_design(d: BlockDesign) -> VerificationReport:
    """Exact pair-coverage check: every cross-group pair outside the holes
    in exactly `index` blocks, same-hole pairs in none, block count and
    shapes consistent with the profile."""
    v = []
    g = d.group_size
    blocks = d.blocks
    if blocks.size and (blocks.min() < 0 or blocks.max() >= g):
        bad = np.nonzero((blocks < 0) | (blocks >= g))[0]
        for b in np.unique(bad):
            v.append((BLOCK_SHAPE, (int(b),)))
        return _report(v)
    expected_count = expected_block_count(d)
    if blocks.shape[0] != expected_count:
        v.append((COUNT_MISMATCH, (blocks.shape[0], expected_count)))
    hole_of = d.hole_of()
    in_hole = hole_of >= 0
    same_hole = (hole_of[:, None] == hole_of[None, :]) & in_hole[:, None] & in_hole[None, :]
    expected = np.where(same_hole, 0, d.index).astype(np.int64)
    for r in range(d.k):
        for s in range(r + 1, d.k):
            keys = blocks[:, r].astype(np.int64) * g + blocks[:, s]
            counts = np.bincount(keys, minlength=g * g).reshape(g, g)
            for x, y in zip(*np.nonzero(counts < expected)):
                v.append((PAIR_MISSING, (r, s, int(x), int(y), int(counts[x, y]))))
            for x, y in zip(*np.nonzero(counts > expected)):
                v.append((PAIR_REPEATED, (r, s, int(x), int(y), int(counts[x, y]))))
    return _report(v)


# ---------------------------------------------------------------------------
# HMOLS <-> HTD equivalence and relatives
# ---------------------------------------------------------------------------

def hmols_to_htd(s: HoleyLatinSquareSet) -> BlockDesign:
    """k HMOLS of type h^n to HTD(k+2, h^n): groups are rows, columns, and
    one group per square; one block per filled cell."""
    rep = verify_hmols(s)
    if not rep.valid:
        raise InvalidInput(f"not a valid HMOLS set: {rep.violations[:3]}")
    g = s.h * s.n
    hole_of = s.hole_of()
    cross = hole_of[:, None] != hole_of[None, :]
    fi, fj = np.nonzero(cross)
    cols = [fi, fj] + [s.squares[t][fi, fj] for t in range(s.k)]
    blocks = np.stack(cols, axis=1)
    return BlockDesign.new(k=s.k + 2, group_size=g, index=1, blocks=blocks,
                           hole_kind=HOLE_UNIFORM, holes=s.holes)


def htd_to_hmols(d: BlockDesign, row_group: int = 0, col_group: int = 1) -> HoleyLatinSquareSet:
    """HTD(k, h^n) with k >= 3 to the equivalent k-2 HMOLS of type h^n."""
    if d.hole_kind != HOLE_UNIFORM or d.k < 3:
        raise NotAnHTD(f"need a uniform-hole design on >= 3 groups, "
                       f"got {d.hole_kind} on {d.k}")
    if row_group == col_group or not (0 <= row_group < d.k and 0 <= col_group < d.k):
        raise BadIndices("row and column groups must be distinct and in range")
    rep = verify_design(d)
    if not rep.valid:
        raise InvalidInput(f"not a valid HTD: {rep.violations[:3]}")
    g = d.group_size
    others = [t for t in range(d.k) if t not in (row_group, col_group)]
    squares = np.full((len(others), g, g), BLANK, dtype=np.int32)
    rows = d.blocks[:, row_group]
    cols = d.blocks[:, col_group]
    seen = np.zeros((g, g), dtype=bool)
    if seen[rows, cols].any() or len(np.unique(rows.astype(np.int64) * g + cols)) != len(rows):
        dup_keys, dup_counts = np.unique(rows.astype(np.int64) * g + cols, return_counts=True)
        first = dup_keys[dup_counts > 1][0]
        raise AmbiguousCell(f"two blocks share cell ({first // g}, {first % g})")
    for t, grp in enumerate(others):
        squares[t, rows, cols] = d.blocks[:, grp]
    return HoleyLatinSquareSet.from_arrays(h=d.hole_size, n=d.hole_count,
                                           holes=d.holes, squares=squares)


def imols_to_itd(s: IncompleteMolsSet) -> BlockDesign:
    """k incomplete MOLS with a common hole to ITD(k+2, (n; h)), read the
    same way as the holey conversion."""
    rep = verify_imols(s)
    if not rep.valid:
        raise InvalidInput(f"not a valid incomplete MOLS set: {rep.violations[:3]}")
    hole = set(s.hole)
    fi, fj = np.nonzero(np.array(
        [[not (i in hole and j in hole) for j in range(s.n)] for i in range(s.n)]))
    cols = [fi, fj] + [s.squares[t][fi, fj] for t in range(s.k)]
    blocks = np.stack(cols, axis=1)
    if s.hole:
        return BlockDesign.new(k=s.k + 2, group_size=s.n, index=1, blocks=blocks,
                               hole_kind=HOLE_SINGLE, holes=(s.hole,))
    return BlockDesign.new(k=s.k + 2, group_size=s.n, index=1, blocks=blocks)


# ---------------------------------------------------------------------------
# base constructions from finite fields
# ---------------------------------------------------------------------------

def td_from_field(k: int, q: int) -> BlockDesign:
    """TD(k, q) over GF(q): blocks (a + u*g_i) for the first k field
    elements g_i, over all a, u.

    A (q+1)-st group is supported by adjoining the coordinate u itself
    (the slope of the line), the usual projective completion; this is
    what makes TD(3, 2) constructible.
    """
    f = gf.field_new(q)  # raises NotPrimePower
    if k > q + 1:
        raise TooManyGroups(f"TD({k},{q}) needs k <= q + 1")
    if k < 2:
        raise MalformedInput("need at least two groups")
    blocks = np.empty((q * q, k), dtype=np.int32)
    idx = 0
    for a in range(q):
        for u in range(q):
            for i in range(k):
                blocks[idx, i] = u if i == q else f.add(a, f.mul(u, i))
            idx += 1
    return BlockDesign.new(k=k, group_size=q, index=1, blocks=blocks)


def unit_hole_htd(k: int, q: int) -> BlockDesign:
    """HTD(k, 1^q) from the idempotent squares L_a(x,y) = a*x + (1-a)*y over
    GF(q), a not in {0, 1}: one block per off-diagonal cell."""
    f = gf.field_new(q)
    if q < 3:
        raise OrderTooSmall(f"HTD(k,1^q) needs q >= 3, got {q}")
    if k > q:
        raise TooManyGroups(f"HTD({k},1^{q}) supports at most q groups")
    if k < 3:
        raise MalformedInput("need at least three groups")
    mults = list(range(2, k))  # the k-2 chosen values of a
    blocks = []
    for x in range(q):
        for y in range(q):
            if x == y:
                continue
            row = [x, y]
            for a in mults:
                row.append(f.add(f.mul(a, x), f.mul(f.sub(1, a), y)))
            blocks.append(row)
    holes = tuple((t,) for t in range(q))
    return BlockDesign.new(k=k, group_size=q, index=1, blocks=np.array(blocks),
                           hole_kind=HOLE_UNIFORM, holes=holes)


def restrict_groups(d: BlockDesign, keep) -> BlockDesign:
    """Project every block to the kept groups; hole and index profile carry over."""
    keep = [int(i) for i in keep]
    if len(keep) < 2 or len(set(keep)) != len(keep) or \
            any(not 0 <= i < d.k for i in keep):
        raise BadIndices(f"bad group selection {keep} for k = {d.k}")
    return BlockDesign.new(k=len(keep), group_size=d.group_size, index=d.index,
                           blocks=d.blocks[:, keep], hole_kind=d.hole_kind,
                           holes=d.holes)


def relabel_points(d: BlockDesign, perms) -> BlockDesign:
    """Apply one permutation of the point set per group (perms[i][old] = new).

    Only hole-free designs: per-group relabeling would tear a shared hole
    partition apart.
    """
    if d.hole_kind != HOLE_NONE:
        raise MalformedInput("per-group relabeling needs a hole-free design")
    perms = np.asarray(perms, dtype=np.int64)
    if perms.shape != (d.k, d.group_size):
        raise BadIndices("need one full permutation per group")
    blocks = np.empty_like(d.blocks)
    for i in range(d.k):
        blocks[:, i] = perms[i][d.blocks[:, i]]
    return BlockDesign.new(k=d.k, group_size=d.group_size, index=d.index,
                           blocks=blocks)
