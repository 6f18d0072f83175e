"""Recursive constructions: index-multiplying products, the diagonal
product joining holey squares on the diagonal and plain MOLS off it,
the Wilson-style composition with a truncated group, marked-subdesign
products that yield incomplete TDs, and the truncate-and-fill ITD
composition.

Every operation verifies its ingredients, assembles the block set
exactly as the underlying proof prescribes, and verifies the output
before returning, so the constructions are proof-carrying: an invalid
result can only escape as an exception.  Composed designs use
structured point labels internally (layer offsets into each group's
index space), flattened so holes stay explicit index lists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .designs import (
    HOLE_NONE,
    HOLE_SINGLE,
    HOLE_UNIFORM,
    BlockDesign,
    relabel_points,
    td_from_field,
    verify_design,
)
from . import gf
from .errors import (
    GroupCountMismatch,
    IngredientInvalid,
    InvalidMark,
    NoDisjointBlocks,
    NoSubfieldMark,
    ParameterMismatch,
)


def _require_valid(d: BlockDesign, role: str) -> None:
    rep = verify_design(d)
    if not rep.valid:
        raise IngredientInvalid(f"{role} fails verification: {rep.violations[:3]}")


def _checked_output(d: BlockDesign, what: str) -> BlockDesign:
    rep = verify_design(d)
    if not rep.valid:
        raise IngredientInvalid(f"{what} failed its own verification: "
                                f"{rep.violations[:3]}")
    return d


# ---------------------------------------------------------------------------
# marked sub-designs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarkedDesign:
    """A TD with a distinguished sub-TD(k, h') whose deletion opens a hole.

    sub_points lists, per group, the h' points the sub-design lives on
    (the subsets may differ between groups); sub_blocks indexes the
    blocks forming the sub-TD.
    """

    design: BlockDesign
    sub_points: tuple   # k tuples of equal size h'
    sub_blocks: tuple   # indices into design.blocks

    @property
    def sub_order(self) -> int:
        return len(self.sub_points[0])


def validate_mark(m: MarkedDesign) -> None:
    """The marked blocks, restricted to the marked points, must form a
    plain TD(k, h')."""
    d = m.design
    sizes = {len(c) for c in m.sub_points}
    if len(m.sub_points) != d.k or len(sizes) != 1:
        raise InvalidMark("need one equal-size point subset per group")
    h_sub = sizes.pop()
    ranks = []
    for i, cell in enumerate(m.sub_points):
        cell = sorted(cell)
        if len(set(cell)) != len(cell) or \
                any(not 0 <= x < d.group_size for x in cell):
            raise InvalidMark(f"group {i} marks repeated or foreign points")
        ranks.append({x: r for r, x in enumerate(cell)})
    idxs = sorted(set(int(b) for b in m.sub_blocks))
    if len(idxs) != len(m.sub_blocks) or \
            any(not 0 <= b < len(d.blocks) for b in idxs):
        raise InvalidMark("sub-block indices repeat or leave range")
    sub = np.empty((len(idxs), d.k), dtype=np.int32)
    for row, b in enumerate(idxs):
        for i in range(d.k):
            x = int(d.blocks[b, i])
            if x not in ranks[i]:
                raise InvalidMark(f"block {b} leaves the marked points in group {i}")
            sub[row, i] = ranks[i][x]
    rep = verify_design(BlockDesign.new(k=d.k, group_size=h_sub, index=1,
                                        blocks=sub))
    if not rep.valid:
        raise InvalidMark(f"marked blocks are not a TD(k,{h_sub}): "
                          f"{rep.violations[:3]}")


def mark_trivial(td: BlockDesign) -> MarkedDesign:
    """The whole design as its own mark; deleting it leaves a full hole."""
    m = MarkedDesign(design=td,
                     sub_points=tuple(tuple(range(td.group_size))
                                      for _ in range(td.k)),
                     sub_blocks=tuple(range(len(td.blocks))))
    validate_mark(m)
    return m


def mark_block(td: BlockDesign, which: int = 0) -> MarkedDesign:
    """A single block as a sub-TD(k, 1); deleting it gives an (n;1) hole."""
    blk = td.blocks[which]
    m = MarkedDesign(design=td,
                     sub_points=tuple((int(x),) for x in blk),
                     sub_blocks=(which,))
    validate_mark(m)
    return m


def mark_subfield(k: int, q: int, sub_order: int) -> MarkedDesign:
    """Field TD(k, q) with a sub-TD(k, h') aligned on a subfield of order h'.

    The block set of the field TD is indexed by (a, u); a sub-TD arises
    from any rank-2 module W over the subfield F such that each group's
    coordinate map collapses W onto just h' points.  Found by exhaustive
    search over generator pairs; small because q is.
    """
    fq = gf.field_new(q)
    sub_factors = gf.factorize(sub_order)
    if len(sub_factors) != 1 or sub_factors[0][0] != fq.p or \
            fq.e % sub_factors[0][1] != 0:
        raise NoSubfieldMark(f"GF({sub_order}) is not a subfield of GF({q})")
    td = td_from_field(k, q)
    subfield = [x for x in range(q) if fq.pow(x, sub_order) == x]

    def coord(a, u, i):
        return u if i == q else fq.add(a, fq.mul(u, i))

    pairs = [(a, u) for a in range(q) for u in range(q)]
    for w1 in pairs:
        if w1 == (0, 0):
            continue
        for w2 in pairs:
            span = set()
            for al in subfield:
                for be in subfield:
                    span.add((fq.add(fq.mul(al, w1[0]), fq.mul(be, w2[0])),
                              fq.add(fq.mul(al, w1[1]), fq.mul(be, w2[1]))))
            if len(span) != sub_order * sub_order:
                continue
            images = [{coord(a, u, i) for a, u in span} for i in range(k)]
            if all(len(img) == sub_order for img in images):
                sub_blocks = tuple(sorted(a * q + u for a, u in span))
                m = MarkedDesign(design=td,
                                 sub_points=tuple(tuple(sorted(img))
                                                  for img in images),
                                 sub_blocks=sub_blocks)
                validate_mark(m)
                return m
    raise NoSubfieldMark(f"no subfield sub-TD({k},{sub_order}) in TD({k},{q})")


def itd_from_marked(m: MarkedDesign) -> BlockDesign:
    """Delete the marked sub-TD: an ITD(k, (n; h')) with the hole relabeled
    onto the first h' points of every group."""
    validate_mark(m)
    d = m.design
    h_sub = m.sub_order
    perms = np.empty((d.k, d.group_size), dtype=np.int64)
    for i, cell in enumerate(m.sub_points):
        hole_sorted = sorted(cell)
        rest = [x for x in range(d.group_size) if x not in set(cell)]
        for r, x in enumerate(hole_sorted):
            perms[i, x] = r
        for r, x in enumerate(rest):
            perms[i, x] = h_sub + r
    keep = np.ones(len(d.blocks), dtype=bool)
    keep[list(m.sub_blocks)] = False
    blocks = np.empty((int(keep.sum()), d.k), dtype=np.int64)
    kept = d.blocks[keep]
    for i in range(d.k):
        blocks[:, i] = perms[i][kept[:, i]]
    if h_sub == 0:
        out = BlockDesign.new(k=d.k, group_size=d.group_size, index=d.index,
                              blocks=blocks)
    else:
        out = BlockDesign.new(k=d.k, group_size=d.group_size, index=d.index,
                              blocks=blocks, hole_kind=HOLE_SINGLE,
                              holes=(tuple(range(h_sub)),))
    return _checked_output(out, f"ITD({d.k},({d.group_size};{h_sub}))")


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def td_product(d1: BlockDesign, d2) -> BlockDesign | MarkedDesign:
    """TD_(l1*l2)(k, n1*n2): a copy of d2's block set on every block of d1.

    When d2 carries a mark, the output carries the induced mark on the
    copy placed on the lexicographically first block of d1.
    """
    mark = None
    if isinstance(d2, MarkedDesign):
        mark, d2 = d2, d2.design
    if d1.k != d2.k:
        raise GroupCountMismatch(f"{d1.k} groups vs {d2.k}")
    if d1.hole_kind != HOLE_NONE or d2.hole_kind != HOLE_NONE:
        raise ParameterMismatch("the product multiplies plain TDs")
    _require_valid(d1, "first factor")
    _require_valid(d2, "second factor")
    n2 = d2.group_size
    b1 = d1.blocks.astype(np.int64)
    b2 = d2.blocks.astype(np.int64)
    prod = (b1[:, None, :] * n2 + b2[None, :, :]).reshape(-1, d1.k)
    out = BlockDesign.new(k=d1.k, group_size=d1.group_size * n2,
                          index=d1.index * d2.index, blocks=prod)
    out = _checked_output(out, "product TD")
    if mark is None:
        return out
    first = int(np.lexsort(b1.T[::-1])[0])
    beta = d1.blocks[first]
    sub_points = tuple(tuple(sorted(int(beta[i]) * n2 + z
                                    for z in mark.sub_points[i]))
                       for i in range(d1.k))
    sub_blocks = tuple(first * len(b2) + j for j in mark.sub_blocks)
    carried = MarkedDesign(design=out, sub_points=sub_points,
                           sub_blocks=sub_blocks)
    validate_mark(carried)
    return carried


def diag_product(a: BlockDesign, b: BlockDesign, c: BlockDesign) -> BlockDesign:
    """HTD(k, h^(m*n)) from an HTD(k, 1^m), a TD(k, h*n) and an HTD(k, h^n):
    a copy of c on each of the m layers, and a copy of b across the layers
    selected by every block of a."""
    for d, role in ((a, "layer design"), (b, "cross design"), (c, "diagonal design")):
        if d.k != a.k:
            raise GroupCountMismatch(f"{role} has {d.k} groups, expected {a.k}")
    if a.hole_kind != HOLE_UNIFORM or a.hole_size != 1:
        raise ParameterMismatch("first ingredient must be an HTD(k,1^m)")
    if c.hole_kind != HOLE_UNIFORM:
        raise ParameterMismatch("third ingredient must be a holey TD")
    if b.hole_kind != HOLE_NONE or b.index != 1 or c.index != 1 or a.index != 1:
        raise ParameterMismatch("cross ingredient must be a plain TD of index 1")
    h, n = c.hole_size, c.hole_count
    m = a.group_size
    if b.group_size != h * n:
        raise ParameterMismatch(f"TD group size {b.group_size} != h*n = {h * n}")
    if n == 1 and h > 1:
        # an HTD(k,h^1) has no blocks; the composition is degenerate
        raise ParameterMismatch("diagonal ingredient of type h^1 is degenerate")
    _require_valid(a, "layer HTD")
    _require_valid(b, "cross TD")
    _require_valid(c, "diagonal HTD")
    k = a.k
    layer = n * h
    pieces = []
    for w in range(m):
        pieces.append(c.blocks.astype(np.int64) + w * layer)
    offsets = a.blocks.astype(np.int64) * layer          # (A, k)
    bb = b.blocks.astype(np.int64)                       # (B, k)
    if len(offsets):
        pieces.append((offsets[:, None, :] + bb[None, :, :]).reshape(-1, k))
    blocks = np.concatenate(pieces) if pieces else np.empty((0, k))
    holes = tuple(tuple(w * layer + x for x in cell)
                  for w in range(m) for cell in c.holes)
    out = BlockDesign.new(k=k, group_size=m * layer, index=1, blocks=blocks,
                          hole_kind=HOLE_UNIFORM, holes=holes)
    return _checked_output(out, f"HTD({k},{h}^{m * n})")


# ---------------------------------------------------------------------------
# Wilson-style composition
# ---------------------------------------------------------------------------

def parallel_class_reduction(r: BlockDesign) -> tuple[BlockDesign, BlockDesign]:
    """Normalize a TD(k+1, t) for composition: relabel the first k groups
    so the blocks through symbol 0 of the last group become the constant
    blocks (x, ..., x, 0), and project the remaining blocks to the first
    k groups, which yields an HTD(k, 1^t) with singleton holes.
    """
    k = r.k - 1
    t = r.group_size
    cls = r.blocks[r.blocks[:, k] == 0]
    order = np.lexsort(cls.T[::-1])
    cls = cls[order]
    perms = np.tile(np.arange(t, dtype=np.int64), (r.k, 1))
    for ell, blk in enumerate(cls):
        for i in range(k):
            perms[i, int(blk[i])] = ell
    rr = relabel_points(r, perms)
    non_class = rr.blocks[rr.blocks[:, k] != 0][:, :k]
    unit = BlockDesign.new(k=k, group_size=t, index=1, blocks=non_class,
                           hole_kind=HOLE_UNIFORM,
                           holes=tuple((x,) for x in range(t)))
    return rr, unit


def wilson_compose(r: BlockDesign, a: BlockDesign, b: BlockDesign,
                   e, f: BlockDesign | None, u: int) -> BlockDesign:
    """HTD(k, h^(m*t+u)) assembled in four kinds of blocks: copies of the
    HTD(k,h^m) on the layers of one parallel class of the TD(k+1,t),
    copies of the TD(k,hm) on blocks missing the truncated part Y, copies
    of the ITD(k,(hm+h;h)) with the hole aligned over the Y point the
    block meets, and one HTD(k,h^u) on Y itself.

    e may be a MarkedDesign (deleted on the fly) or a ready ITD; e and f
    are only consulted when u > 0.
    """
    if a.hole_kind != HOLE_UNIFORM:
        raise ParameterMismatch("second ingredient must be a holey TD")
    h, m = a.hole_size, a.hole_count
    if r.k != a.k + 1:
        raise GroupCountMismatch(f"resolvable TD needs {a.k + 1} groups, has {r.k}")
    if b.k != a.k:
        raise GroupCountMismatch("cross TD group count differs")
    t = r.group_size
    if not 0 <= u < t:
        raise ParameterMismatch(f"need 0 <= u < t, got u = {u}, t = {t}")
    if r.index != 1 or r.hole_kind != HOLE_NONE:
        raise ParameterMismatch("first ingredient must be a plain TD(k+1,t)")
    if b.group_size != h * m or b.index != 1 or b.hole_kind != HOLE_NONE:
        raise ParameterMismatch(f"cross TD must be a TD(k,{h * m})")
    _require_valid(r, "resolvable TD")
    _require_valid(a, "layer HTD")
    _require_valid(b, "cross TD")
    k = a.k
    layer = h * m

    e_itd = None
    if u > 0:
        e_itd = itd_from_marked(e) if isinstance(e, MarkedDesign) else e
        if e_itd.hole_kind != HOLE_SINGLE or e_itd.hole_size != h or \
                e_itd.group_size != layer + h or e_itd.k != k:
            raise ParameterMismatch(f"need an ITD({k},({layer + h};{h}))")
        if f is None or f.hole_kind != HOLE_UNIFORM or f.hole_size != h or \
                f.hole_count != u or f.k != k:
            raise ParameterMismatch(f"need an HTD({k},{h}^{u})")
        _require_valid(e_itd, "incomplete TD")
        _require_valid(f, "truncation HTD")

    rr, _ = parallel_class_reduction(r)
    y_base = t * layer  # the Y part sits after the t layers

    pieces = []
    # first kind: the HTD(k,h^m) on each layer of the parallel class
    for ell in range(t):
        pieces.append(a.blocks.astype(np.int64) + ell * layer)

    non_class = rr.blocks[rr.blocks[:, k] != 0]
    miss = non_class[non_class[:, k] > u]
    meet = non_class[non_class[:, k] <= u]
    # second kind: TD(k,hm) across the layers of blocks missing Y
    if len(miss):
        offs = miss[:, :k].astype(np.int64) * layer
        pieces.append((offs[:, None, :] + b.blocks[None, :, :].astype(np.int64))
                      .reshape(-1, k))
    # third kind: the ITD with its hole over the met Y point
    if len(meet):
        hole = sorted(e_itd.holes[0])
        rest = [x for x in range(e_itd.group_size) if x not in set(hole)]
        hole_rank = {x: r_ for r_, x in enumerate(hole)}
        rest_rank = {x: r_ for r_, x in enumerate(rest)}
        f_holes = f.holes
        for blk in meet:
            y0 = int(blk[k]) - 1
            dest = np.empty((e_itd.group_size, k), dtype=np.int64)
            for i in range(k):
                x_i = int(blk[i])
                for p in range(e_itd.group_size):
                    if p in hole_rank:
                        dest[p, i] = y_base + f_holes[y0][hole_rank[p]]
                    else:
                        dest[p, i] = x_i * layer + rest_rank[p]
            cols = [dest[e_itd.blocks[:, i], i] for i in range(k)]
            pieces.append(np.stack(cols, axis=1))
    # fourth kind: the HTD(k,h^u) on Y
    if u > 0:
        pieces.append(f.blocks.astype(np.int64) + y_base)

    blocks = np.concatenate(pieces)
    holes = tuple(tuple(ell * layer + x for x in cell)
                  for ell in range(t) for cell in a.holes)
    if u > 0:
        holes = holes + tuple(tuple(y_base + x for x in cell) for cell in f.holes)
    out = BlockDesign.new(k=k, group_size=t * layer + u * h, index=1,
                          blocks=blocks, hole_kind=HOLE_UNIFORM, holes=holes)
    return _checked_output(out, f"HTD({k},{h}^{m * t + u})")


# ---------------------------------------------------------------------------
# truncate-and-fill ITD composition
# ---------------------------------------------------------------------------

def _find_disjoint_blocks(d: BlockDesign) -> tuple[int, int]:
    """First pair of blocks (greedy scan) sharing no point in any group."""
    blocks = d.blocks
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if (blocks[i] != blocks[j]).all():
                return i, j
    raise NoDisjointBlocks(f"no two disjoint blocks among {len(blocks)}")


def _align_block_at(d: BlockDesign, which: int, position: int) -> BlockDesign:
    """Relabel every group so the chosen block becomes constant = position."""
    perms = np.tile(np.arange(d.group_size, dtype=np.int64), (d.k, 1))
    for i in range(d.k):
        x = int(d.blocks[which, i])
        perms[i, x], perms[i, position] = position, x
    return relabel_points(d, perms)


def _align_two_blocks(d: BlockDesign, i1: int, i2: int, p1: int, p2: int) -> BlockDesign:
    """Relabel so block i1 is constant p1 and block i2 constant p2; they
    must be disjoint."""
    perms = np.empty((d.k, d.group_size), dtype=np.int64)
    for i in range(d.k):
        a, b = int(d.blocks[i1, i]), int(d.blocks[i2, i])
        rest = [x for x in range(d.group_size) if x not in (a, b)]
        slots = [p for p in range(d.group_size) if p not in (p1, p2)]
        perms[i, a], perms[i, b] = p1, p2
        for x, p in zip(rest, slots):
            perms[i, x] = p
    return relabel_points(d, perms)


def _drop_constant_blocks(d: BlockDesign, positions) -> np.ndarray:
    keep = np.ones(len(d.blocks), dtype=bool)
    for p in positions:
        hit = (d.blocks == p).all(axis=1)
        keep &= ~hit
    return d.blocks[keep].astype(np.int64)


def itd_truncate_compose(k: int, m: int, t: int, u: int, v: int,
                         r2: BlockDesign, dm: BlockDesign, dm1: BlockDesign,
                         dm2: BlockDesign, du: BlockDesign | None) -> BlockDesign:
    """ITD(k, (mt+u+v; v)): truncate two groups of a TD(k+2, t) to u and v
    points, inflate full-group points by weight m and truncated points by
    weight 1, and fill blocks by size: TD(k,m), TD(k,m+1) minus a block
    aligned on the weight-1 point, TD(k,m+2) minus two disjoint aligned
    blocks; the u side is filled with a TD(k,u), the v side is the hole.
    """
    if not (0 <= u <= t and 0 <= v <= t):
        raise ParameterMismatch(f"need 0 <= u, v <= t, got u={u}, v={v}, t={t}")
    if r2.k != k + 2 or r2.group_size != t or r2.index != 1:
        raise ParameterMismatch(f"first ingredient must be a TD({k + 2},{t})")
    for d, size, role in ((dm, m, "TD(k,m)"), (dm1, m + 1, "TD(k,m+1)"),
                          (dm2, m + 2, "TD(k,m+2)")):
        if d.k != k or d.group_size != size or d.hole_kind != HOLE_NONE:
            raise ParameterMismatch(f"{role} has the wrong shape")
        _require_valid(d, role)
    if u > 0:
        if du is None or du.k != k or du.group_size != u:
            raise ParameterMismatch(f"need a TD({k},{u}) for the u side")
        _require_valid(du, "TD(k,u)")
    _require_valid(r2, "outer TD")

    fill1 = _drop_constant_blocks(_align_block_at(dm1, 0, m), [m])
    j1, j2 = _find_disjoint_blocks(dm2)
    fill2 = _drop_constant_blocks(_align_two_blocks(dm2, j1, j2, m, m + 1),
                                  [m, m + 1])

    main = v + u  # main points (w, x) start after the hole and the u side
    pieces = []
    for blk in r2.blocks:
        x = blk[:k].astype(np.int64)
        y = int(blk[k]) if int(blk[k]) < u else None
        z = int(blk[k + 1]) if int(blk[k + 1]) < v else None
        offs = main + x * m
        if y is None and z is None:
            pieces.append(offs[None, :] + dm.blocks.astype(np.int64))
            continue
        if y is not None and z is not None:
            fill = fill2
        else:
            fill = fill1
        dest = np.empty((m + 2, k), dtype=np.int64)
        dest[:m] = offs[None, :] + np.arange(m, dtype=np.int64)[:, None]
        dest[m] = (v + y) if y is not None else z
        if y is not None and z is not None:
            dest[m + 1] = z
        cols = [dest[fill[:, i], i] for i in range(k)]
        pieces.append(np.stack(cols, axis=1))
    if u > 0:
        pieces.append(du.blocks.astype(np.int64) + v)
    blocks = np.concatenate(pieces)
    size = m * t + u + v
    if v > 0:
        out = BlockDesign.new(k=k, group_size=size, index=1, blocks=blocks,
                              hole_kind=HOLE_SINGLE, holes=(tuple(range(v)),))
    else:
        out = BlockDesign.new(k=k, group_size=size, index=1, blocks=blocks)
    return _checked_output(out, f"ITD({k},({size};{v}))")
