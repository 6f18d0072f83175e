"""Template matrices, higher-index TD projection, allowed-coset tables,
difference-vector search over GF(q), relative difference families, and
the general expansion of an indexed TD into a holey TD.

The reduced search works over the rows of the dot-product template of
GF(h)^d, grouped into h blocks of lam = h^(d-1) consecutive rows; block
i reuses one free vector scaled by successive powers of the primitive
root.  A candidate passes when, for every column pair, the difference
quotients across row blocks avoid the cyclotomic classes excluded by
equal template differences.  Certificates record (h, d, q, omega,
columns, vectors, seed) and are never trusted without re-running the
exact difference count.

Searches draw every random choice from one seeded stream, so identical
seeds give identical certificates regardless of machine or worker
count.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from . import gf
from .designs import (
    HOLE_NONE,
    HOLE_UNIFORM,
    PAIR_MISSING,
    PAIR_REPEATED,
    BlockDesign,
    VerificationReport,
    _report,
    verify_design,
)
from .errors import (
    BadColumns,
    Exhausted,
    IndexMismatch,
    InvalidFamily,
    MalformedInput,
    MalformedSolution,
    SizeBound,
    TooManyGroups,
)

DEFAULT_SIZE_BOUND = 4096
DEFAULT_BUDGET = 200_000


# ---------------------------------------------------------------------------
# template matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TemplateMatrix:
    """The h^d x h^d table of dot products u.v over GF(h), rows and columns
    both in lexicographic order of the vectors of GF(h)^d."""

    h: int
    d: int
    field: gf.FieldSpec
    cols: tuple          # vector labels, lex order
    entries: np.ndarray  # (h^d, h^d) element indices

    @property
    def lam(self) -> int:
        return self.h ** (self.d - 1)

    @property
    def size(self) -> int:
        return self.h ** self.d


def template(h: int, d: int, size_bound: int = DEFAULT_SIZE_BOUND) -> TemplateMatrix:
    """entries[u][v] = u.v over GF(h) for all h^d lex-ordered vectors."""
    f = gf.field_new(h)  # raises NotPrimePower
    if d < 1:
        raise ValueError("dimension must be positive")
    size = h ** d
    if size > size_bound:
        raise SizeBound(f"template would have {size} rows (bound {size_bound})")
    vecs = list(itertools.product(range(h), repeat=d))
    entries = np.zeros((size, size), dtype=np.int32)
    for i, u in enumerate(vecs):
        for j, v in enumerate(vecs):
            acc = 0
            for x, y in zip(u, v):
                acc = f.add(acc, f.mul(x, y))
            entries[i, j] = acc
    entries.setflags(write=False)
    return TemplateMatrix(h=h, d=d, field=f, cols=tuple(vecs), entries=entries)


def td_projection(h: int, d: int, k: int, cols=None,
                  size_bound: int = DEFAULT_SIZE_BOUND) -> BlockDesign:
    """TD of index h^(d-1) on k groups of size h: group v gets a + u.v over
    all a in GF(h), u in GF(h)^d, restricted to k template columns (the
    first k in lex order unless a selection is supplied)."""
    t = template(h, d, size_bound)
    if k > t.size or k < 2:
        raise TooManyGroups(f"need 2 <= k <= {t.size}, got {k}")
    if cols is None:
        cols = list(range(k))
    cols = _check_cols(t, cols)
    if k != len(cols):
        raise BadColumns("column selection does not match k")
    f = t.field
    rows = t.entries[:, cols]
    blocks = np.empty((h * t.size, k), dtype=np.int32)
    idx = 0
    for a in range(h):
        shifted = f.add_arr(rows, np.full_like(rows, a))
        blocks[idx:idx + t.size] = shifted
        idx += t.size
    return BlockDesign.new(k=k, group_size=h, index=t.lam, blocks=blocks)


# ---------------------------------------------------------------------------
# allowed cosets
# ---------------------------------------------------------------------------

def _check_cols(t: TemplateMatrix, cols) -> list[int]:
    cols = [int(c) for c in cols]
    if len(set(cols)) != len(cols) or any(not 0 <= c < t.size for c in cols):
        raise BadColumns(f"columns {cols} repeat or leave 0..{t.size - 1}")
    return cols


@dataclass(frozen=True)
class AllowedCosetTable:
    """For row blocks i < j and column positions r < s (into col_selection),
    the cyclotomic classes a difference quotient may occupy.

    A class c is excluded when some row of block i and some row of block j
    at offsets e, e' have equal (r,s)-difference with e' - e = c mod lam.
    """

    h: int
    d: int
    lam: int
    col_selection: tuple
    allowed: dict  # (i, j, r, s) -> frozenset of classes

    def classes_for(self, i: int, j: int, r: int, s: int) -> frozenset:
        """Allowed classes for the quotient D_i / D_j in any orientation:
        swapping (i, j) negates the classes, swapping (r, s) is free."""
        if r > s:
            r, s = s, r
        if i < j:
            return self.allowed[(i, j, r, s)]
        base = self.allowed[(j, i, r, s)]
        return frozenset((-c) % self.lam for c in base)


def allowed_cosets(t: TemplateMatrix, cols) -> AllowedCosetTable:
    """Scan all row pairs across the h row blocks of lam consecutive rows."""
    cols = _check_cols(t, cols)
    if len(cols) < 2:
        raise BadColumns("need at least two columns")
    f, lam, h = t.field, t.lam, t.h
    allowed = {}
    full = frozenset(range(lam))
    for r in range(len(cols)):
        for s in range(r + 1, len(cols)):
            dcol = f.sub_arr(t.entries[:, cols[r]], t.entries[:, cols[s]])
            for i in range(h):
                di = dcol[i * lam:(i + 1) * lam]
                for j in range(i + 1, h):
                    dj = dcol[j * lam:(j + 1) * lam]
                    equal = di[:, None] == dj[None, :]
                    excluded = {(e2 - e1) % lam
                                for e1, e2 in zip(*np.nonzero(equal))}
                    allowed[(i, j, r, s)] = full - excluded
    return AllowedCosetTable(h=h, d=t.d, lam=lam,
                             col_selection=tuple(cols), allowed=allowed)


# ---------------------------------------------------------------------------
# u-vector solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UVectorSolution:
    """h free vectors in GF(q)^k whose scaled copies, paired with the
    template rows, develop into a relative difference family."""

    h: int
    d: int
    q: int
    col_selection: tuple
    u: tuple      # h tuples of k field elements
    omega: int
    seed: int | None = None

    @property
    def k(self) -> int:
        return len(self.col_selection)

    def to_cert(self) -> dict:
        return {"h": self.h, "d": self.d, "q": self.q, "omega": self.omega,
                "col_selection": list(self.col_selection),
                "u_vectors": [list(v) for v in self.u], "seed": self.seed}


def _quotient_class(ctx, fq, d_i, d_j):
    return gf.class_of(ctx, fq.mul(d_i, fq.inv(d_j)))


def _uvector_violations(table: AllowedCosetTable, ctx: gf.CyclotomyContext, u):
    """All broken constraints of a full assignment: repeated entries within
    a vector, or a cross-block quotient in a forbidden class."""
    fq = ctx.field
    k = len(table.col_selection)
    bad = []
    for i, vec in enumerate(u):
        for r in range(k):
            for s in range(r + 1, k):
                if vec[r] == vec[s]:
                    bad.append(("EqualEntries", (i, r, s)))
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            for r in range(k):
                for s in range(r + 1, k):
                    d_i = fq.sub(u[i][r], u[i][s])
                    d_j = fq.sub(u[j][r], u[j][s])
                    if d_i == 0 or d_j == 0:
                        continue  # reported as EqualEntries above
                    if _quotient_class(ctx, fq, d_i, d_j) not in \
                            table.allowed[(i, j, r, s)]:
                        bad.append(("ForbiddenCoset", (i, j, r, s)))
    return bad


def verify_uvectors(h: int, d: int, cols, q: int, u, omega: int | None = None,
                    seed=None) -> UVectorSolution:
    """Validate given vectors against the quotient-coset constraints and
    wrap them as a solution; raises MalformedSolution when they fail."""
    t = template(h, d)
    table = allowed_cosets(t, cols)
    fq = gf.field_new(q)
    if (q - 1) % t.lam != 0:
        raise IndexMismatch(f"q = {q} is not 1 mod {t.lam}")
    ctx = gf.cyclotomy_new(fq, t.lam)
    if omega is not None and omega != ctx.omega:
        raise MalformedSolution(f"certificate omega {omega} is not the "
                                f"canonical primitive root {ctx.omega}")
    u = tuple(tuple(int(x) for x in vec) for vec in u)
    if len(u) != h or any(len(vec) != len(table.col_selection) for vec in u):
        raise MalformedSolution(f"need {h} vectors of width "
                                f"{len(table.col_selection)}")
    if any(not 0 <= x < q for vec in u for x in vec):
        raise MalformedSolution("vector entry outside GF(q)")
    bad = _uvector_violations(table, ctx, u)
    if bad:
        raise MalformedSolution(f"constraints violated: {bad[:4]}")
    return UVectorSolution(h=h, d=d, q=q, col_selection=table.col_selection,
                           u=u, omega=ctx.omega, seed=seed)


class _RestartAbandoned(Exception):
    pass


def search_uvectors(h: int, d: int, cols, q: int, seed: int = 0,
                    budget: int = DEFAULT_BUDGET,
                    restart_nodes: int = 4096) -> UVectorSolution:
    """Seeded randomized search for the h free vectors.

    Entries are chosen left to right, one vector after another, drawing
    candidate values in seeded-random order and pruning against the
    allowed-coset table; dead prefixes are backtracked, and a restart
    with fresh random orders begins once a restart has spent
    restart_nodes candidate evaluations.  The budget caps evaluations
    over all restarts; Exhausted is a retry signal, never a disproof.
    """
    t = template(h, d)
    table = allowed_cosets(t, cols)
    k = len(table.col_selection)
    fq = gf.field_new(q)
    if fq.e != 1:
        raise ValueError("the vector search runs over prime fields only")
    if (q - 1) % t.lam != 0:
        raise IndexMismatch(f"q = {q} is not 1 mod {t.lam}")
    ctx = gf.cyclotomy_new(fq, t.lam)
    if k > q:
        raise Exhausted(f"entries must be distinct: k = {k} > q = {q}")
    rng = random.Random(seed)
    values = list(range(q))
    state = {"budget": budget, "nodes": 0}

    def feasible(u, i, r, x):
        for s in range(r):
            if u[i][s] == x:
                return False
        for j in range(i):
            for s in range(r):
                # columns (s, r) with s < r; constraint on block pair (j, i)
                d_i = fq.sub(u[i][s], x)
                d_j = fq.sub(u[j][s], u[j][r])
                if d_i == 0 or d_j == 0:
                    return False
                if _quotient_class(ctx, fq, d_j, d_i) not in \
                        table.allowed[(j, i, s, r)]:
                    return False
        return True

    def extend(u, pos):
        if pos == h * k:
            return True
        i, r = divmod(pos, k)
        order = values[:]
        rng.shuffle(order)
        for x in order:
            if state["budget"] <= 0:
                raise Exhausted(f"budget {budget} consumed")
            if state["nodes"] <= 0:
                raise _RestartAbandoned
            state["budget"] -= 1
            state["nodes"] -= 1
            if feasible(u, i, r, x):
                u[i][r] = x
                if extend(u, pos + 1):
                    return True
                u[i][r] = None
        return False

    while True:
        u = [[None] * k for _ in range(h)]
        state["nodes"] = restart_nodes
        try:
            found = extend(u, 0)
        except _RestartAbandoned:
            continue
        if not found:
            # the whole tree was refuted within this restart's node cap;
            # other value orders cannot help, but callers treat Exhausted
            # as a retry hint anyway
            raise Exhausted(f"search space refuted or budget spent at q = {q}")
        sol = verify_uvectors(h, d, cols, q, u, seed=seed)
        # double-check by the independent difference count
        rep = verify_rdm(assemble_rdf(sol))
        if not rep.valid:
            raise AssertionError("search acceptance disagrees with the "
                                 "difference count; this is a bug")
        return sol


def match_columns(t: TemplateMatrix, u_raw, q: int):
    """Recover an injective assignment of the nonblank vector positions to
    template columns under which the quotient constraints all hold.

    The backtracking is complete and deterministic (columns tried in lex
    order), so Exhausted here is a disproof for this template and field.
    Returns the list of assigned column ranks, ordered like the nonblank
    positions.
    """
    u_rows = [list(vec) for vec in u_raw]
    if len(u_rows) != t.h or any(len(vec) != t.size for vec in u_rows):
        raise MalformedSolution(f"need {t.h} raw vectors of width {t.size}")
    positions = [p for p in range(t.size) if u_rows[0][p] is not None]
    for vec in u_rows:
        if [p for p in range(t.size) if vec[p] is not None] != positions:
            raise MalformedSolution("vectors blank at different positions")
    k = len(positions)
    fq = gf.field_new(q)
    if (q - 1) % t.lam != 0:
        raise IndexMismatch(f"q = {q} is not 1 mod {t.lam}")
    ctx = gf.cyclotomy_new(fq, t.lam)
    lam, h = t.lam, t.h

    # all quotients are well-defined once no vector repeats an entry
    u_vals = [[int(vec[p]) for p in positions] for vec in u_rows]
    for vec in u_vals:
        if len(set(vec)) != len(vec):
            raise Exhausted("a vector repeats an entry; no assignment exists")
    qclass = {}
    for i in range(h):
        for j in range(i + 1, h):
            for a in range(k):
                for b in range(a + 1, k):
                    d_i = fq.sub(u_vals[i][a], u_vals[i][b])
                    d_j = fq.sub(u_vals[j][a], u_vals[j][b])
                    qclass[(i, j, a, b)] = _quotient_class(ctx, fq, d_i, d_j)

    # precompute exclusion sets for every template column pair
    excl = {}
    for c1 in range(t.size):
        for c2 in range(c1 + 1, t.size):
            dcol = t.field.sub_arr(t.entries[:, c1], t.entries[:, c2])
            for i in range(h):
                di = dcol[i * lam:(i + 1) * lam]
                for j in range(i + 1, h):
                    dj = dcol[j * lam:(j + 1) * lam]
                    equal = di[:, None] == dj[None, :]
                    excl[(i, j, c1, c2)] = frozenset(
                        (e2 - e1) % lam for e1, e2 in zip(*np.nonzero(equal)))

    assignment = [None] * k
    used = [False] * t.size

    def ok(a: int, col: int) -> bool:
        # quotient classes and exclusion sets are both invariant under
        # swapping the two columns, so sorted keys suffice
        for b in range(a):
            c1, c2 = min(col, assignment[b]), max(col, assignment[b])
            for i in range(h):
                for j in range(i + 1, h):
                    if qclass[(i, j, b, a)] in excl[(i, j, c1, c2)]:
                        return False
        return True

    def extend(a: int) -> bool:
        if a == k:
            return True
        for col in range(t.size):
            if used[col]:
                continue
            if ok(a, col):
                used[col] = True
                assignment[a] = col
                if extend(a + 1):
                    return True
                used[col] = False
                assignment[a] = None
        return False

    if not extend(0):
        raise Exhausted("no column assignment satisfies the constraints")
    return list(assignment)


# ---------------------------------------------------------------------------
# relative difference families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelativeDifferenceFamily:
    """Base blocks over G = GF(h) x GF(q) whose pairwise coordinate
    differences cover G minus the subgroup GF(h) x {0} exactly once.

    Group elements are flattened as z*h + alpha so the subgroup is the
    first h indices and its cosets are the h-point intervals.
    """

    h_field: gf.FieldSpec
    q_field: gf.FieldSpec
    k: int
    base_blocks: np.ndarray  # (B, k) flattened G indices

    @property
    def group_order(self) -> int:
        return self.h_field.q * self.q_field.q

    def g_sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        h = self.h_field.q
        za, alpha_a = a // h, a % h
        zb, alpha_b = b // h, b % h
        return self.q_field.sub_arr(za, zb) * h + self.h_field.sub_arr(alpha_a, alpha_b)

    def g_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        h = self.h_field.q
        za, alpha_a = a // h, a % h
        zb, alpha_b = b // h, b % h
        return self.q_field.add_arr(za, zb) * h + self.h_field.add_arr(alpha_a, alpha_b)


def assemble_rdf(sol: UVectorSolution) -> RelativeDifferenceFamily:
    """Base blocks t_m paired with omega^e * u_(block of m), developed over
    x in C_0; h*(q-1) blocks of width k."""
    t = template(sol.h, sol.d)
    if len(sol.col_selection) != len(sol.u[0]) or len(sol.u) != sol.h:
        raise MalformedSolution("vector widths do not match the columns")
    fh, fq = t.field, gf.field_new(sol.q)
    lam = t.lam
    if (sol.q - 1) % lam != 0:
        raise MalformedSolution(f"q = {sol.q} is not 1 mod {lam}")
    ctx = gf.cyclotomy_new(fq, lam)
    if ctx.omega != sol.omega:
        raise MalformedSolution("solution omega differs from the canonical root")
    cols = list(sol.col_selection)
    c0 = ctx.coset_zero()
    k = len(cols)
    blocks = np.empty((t.size * len(c0), k), dtype=np.int64)
    idx = 0
    for m in range(t.size):
        i, e = divmod(m, lam)
        w = ctx.omega_pow(e)
        u_m = [fq.mul(w, sol.u[i][r]) for r in range(k)]
        t_row = [int(t.entries[m, c]) for c in cols]
        for x in c0:
            for r in range(k):
                blocks[idx, r] = fq.mul(x, u_m[r]) * sol.h + t_row[r]
            idx += 1
    return RelativeDifferenceFamily(h_field=fh, q_field=fq, k=k,
                                    base_blocks=blocks.astype(np.int32))


def verify_rdm(fam: RelativeDifferenceFamily) -> VerificationReport:
    """Exact count: for every r < s the difference multiset must equal
    G minus the subgroup, each element exactly once."""
    g = fam.group_order
    h = fam.h_field.q
    if fam.q_field.q < 2 or fam.base_blocks.size == 0:
        raise MalformedInput("degenerate family: no differences to cover")
    expected = np.ones(g, dtype=np.int64)
    expected[:h] = 0  # the subgroup GF(h) x {0}
    v = []
    for r in range(fam.k):
        for s in range(r + 1, fam.k):
            diffs = fam.g_sub(fam.base_blocks[:, r], fam.base_blocks[:, s])
            counts = np.bincount(diffs, minlength=g)
            for a in np.nonzero(counts < expected)[0]:
                v.append((PAIR_MISSING, (r, s, int(a), int(counts[a]))))
            for a in np.nonzero(counts > expected)[0]:
                v.append((PAIR_REPEATED, (r, s, int(a), int(counts[a]))))
    return _report(v)


def develop_rdf(fam: RelativeDifferenceFamily) -> BlockDesign:
    """Develop the base blocks additively over G: an HTD(k, h^q) whose
    holes are the cosets of the subgroup."""
    rep = verify_rdm(fam)
    if not rep.valid:
        raise InvalidFamily(f"difference family fails: {rep.violations[:3]}")
    g = fam.group_order
    h = fam.h_field.q
    shifts = np.arange(g, dtype=np.int64)
    dev = fam.g_add(fam.base_blocks[None, :, :].astype(np.int64),
                    shifts[:, None, None])
    blocks = dev.reshape(-1, fam.k)
    holes = tuple(tuple(range(z * h, (z + 1) * h)) for z in range(fam.q_field.q))
    return BlockDesign.new(k=fam.k, group_size=g, index=1, blocks=blocks,
                           hole_kind=HOLE_UNIFORM, holes=holes)


# ---------------------------------------------------------------------------
# general expansion of an indexed TD
# ---------------------------------------------------------------------------

def expand_td_to_htd(td: BlockDesign, q: int, seed: int = 0,
                     budget: int = DEFAULT_BUDGET) -> BlockDesign:
    """Expand a TD of index lam and group size h into an HTD(k, h^q).

    Incidence pairs are labeled 0..lam-1 by enumerating, for each cross
    pair of cells, its lam containing blocks in canonical order; each
    block then needs a k-tuple over GF(q) whose pairwise differences lie
    in the labeled cyclotomic classes, found by seeded search with the
    given per-block budget.  The output is verified before return.
    """
    lam = td.index
    fq = gf.field_new(q)
    if fq.e != 1:
        raise ValueError("the expansion search runs over prime fields only")
    if (q - 1) % lam != 0:
        raise IndexMismatch(f"q = {q} is not 1 mod lam = {lam}")
    if td.hole_kind != HOLE_NONE:
        raise MalformedInput("expansion starts from a plain TD")
    rep = verify_design(td)
    if not rep.valid:
        raise MalformedInput(f"input TD fails verification: {rep.violations[:3]}")
    ctx = gf.cyclotomy_new(fq, lam)
    h, k = td.group_size, td.k
    blocks = td.sorted_blocks()

    # mu labels: rank of each block among the lam blocks covering the pair
    labels = np.zeros((len(blocks), k, k), dtype=np.int32)
    counter: dict = {}
    for b, blk in enumerate(blocks):
        for i in range(k):
            for j in range(i + 1, k):
                key = (i, j, int(blk[i]), int(blk[j]))
                t = counter.get(key, 0)
                counter[key] = t + 1
                labels[b, i, j] = t

    rng = random.Random(seed)
    values = list(range(q))
    phis = np.empty((len(blocks), k), dtype=np.int64)
    for b in range(len(blocks)):
        phis[b] = _search_phi(fq, ctx, labels[b], k, q, rng, values, budget)

    c0 = np.array(ctx.coset_zero(), dtype=np.int64)
    shifts = np.arange(q, dtype=np.int64)
    # z[b, a, c, r] = a * phi[b, r] + c in GF(q); prime q, so plain mod
    z = (c0[None, :, None, None] * phis[:, None, None, :]
         + shifts[None, None, :, None]) % q
    pts = z * h + blocks[:, None, None, :].astype(np.int64)
    out_blocks = pts.reshape(-1, k)
    holes = tuple(tuple(range(zz * h, (zz + 1) * h)) for zz in range(q))
    out = BlockDesign.new(k=k, group_size=h * q, index=1, blocks=out_blocks,
                          hole_kind=HOLE_UNIFORM, holes=holes)
    out_rep = verify_design(out)
    if not out_rep.valid:
        raise AssertionError(f"expanded design fails verification: "
                             f"{out_rep.violations[:3]}; this is a bug")
    return out


def _search_phi(fq, ctx, label_matrix, k, q, rng, values, budget):
    """One k-tuple over GF(q) with phi_i - phi_j in C_(label[i][j]); the
    first coordinate is pinned to 0 since only differences matter."""
    budget_left = budget
    while True:
        phi = [0] + [None] * (k - 1)
        dead = False
        for i in range(1, k):
            rng.shuffle(values)
            chosen = None
            for x in values:
                if budget_left <= 0:
                    raise Exhausted(f"per-block budget {budget} consumed")
                budget_left -= 1
                good = True
                for j in range(i):
                    diff = fq.sub(phi[j], x)
                    if diff == 0 or \
                            gf.class_of(ctx, diff) != label_matrix[j, i]:
                        good = False
                        break
                if good:
                    chosen = x
                    break
            if chosen is None:
                dead = True
                break
            phi[i] = chosen
        if not dead:
            return phi
