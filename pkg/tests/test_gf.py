import itertools

import numpy as np
import pytest

from hmols import gf
from hmols.errors import (
    IndexNotDividing,
    IndexOutOfRange,
    NotPrimePower,
    ZeroHasNoClass,
    ZeroInverse,
)


def brute_force_irreducible_quadratics_gf2():
    """Oracle: enumerate monic quadratics over GF(2), keep those with no root
    and no factorization into linear terms (degree 2: no root == irreducible)."""
    out = []
    for c0, c1 in itertools.product(range(2), repeat=2):
        # x^2 + c1 x + c0, evaluated at 0 and 1 mod 2
        if (c0) % 2 != 0 and (1 + c1 + c0) % 2 != 0:
            out.append((c0, c1, 1))
    return out


def brute_force_order(q, x):
    """Oracle: multiplicative order of x modulo q (prime q only)."""
    t, v = 1, x % q
    while v != 1:
        v = (v * x) % q
        t += 1
    return t


def test_field_new_prime():
    f = gf.field_new(7)
    assert (f.q, f.p, f.e) == (7, 7, 1)
    assert f.modulus == ()


def test_field_new_gf4_modulus_is_unique_irreducible():
    quads = brute_force_irreducible_quadratics_gf2()
    assert quads == [(1, 1, 1)]  # x^2 + x + 1 is the only one
    f = gf.field_new(4)
    assert (f.p, f.e) == (2, 2)
    assert f.modulus == (1, 1, 1)


def test_field_new_rejects_non_prime_powers():
    for q in (1, 6, 12, 100):
        with pytest.raises(NotPrimePower):
            gf.field_new(q)


def test_field_op_examples():
    f7 = gf.field_new(7)
    assert gf.field_op(f7, "mul", 3, 5) == 1
    f4 = gf.field_new(4)
    # indices encode {0, 1, x, x+1} as {0, 1, 2, 3}; x*x = x+1 mod x^2+x+1
    assert gf.field_op(f4, "mul", 2, 2) == 3
    with pytest.raises(ZeroInverse):
        gf.field_op(f7, "inv", 0)
    with pytest.raises(IndexOutOfRange):
        gf.field_op(f7, "add", 7, 0)
    with pytest.raises(IndexOutOfRange):
        gf.field_op(f7, "add", 1, -1)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9, 13, 16, 25, 27, 49, 64])
def test_field_axioms_exhaustive(q):
    f = gf.field_new(q)
    els = list(f.elements())
    # additive and multiplicative identities, inverses
    for a in els:
        assert f.add(a, 0) == a
        assert f.mul(a, 1) == a
        assert f.add(a, f.neg(a)) == 0
        if a:
            assert f.mul(a, f.inv(a)) == 1
    # commutativity everywhere, associativity/distributivity on a grid
    for a in els:
        for b in els:
            assert f.add(a, b) == f.add(b, a)
            assert f.mul(a, b) == f.mul(b, a)
    step = max(1, q // 8)
    sample = els[::step]
    for a in sample:
        for b in sample:
            for c in sample:
                assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
                assert f.add(a, f.add(b, c)) == f.add(f.add(a, b), c)
                assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))


def test_vectorized_tables_match_scalar():
    for q in (5, 4, 9):
        f = gf.field_new(q)
        a = np.arange(q).repeat(q).reshape(q, q)
        b = np.arange(q).reshape(1, q).repeat(q, axis=0)
        add = f.add_arr(a, b)
        sub = f.sub_arr(a, b)
        for x in range(q):
            for y in range(q):
                assert add[x, y] == f.add(x, y)
                assert sub[x, y] == f.sub(x, y)


def test_primitive_root_small():
    assert gf.primitive_root(gf.field_new(3)) == 2
    f7 = gf.field_new(7)
    w = gf.primitive_root(f7)
    assert brute_force_order(7, 2) < 6 and brute_force_order(7, 3) == 6
    assert w == 3
    with pytest.raises(ValueError):
        gf.primitive_root(gf.field_new(2))


def test_primitive_root_401():
    f = gf.field_new(401)
    w = gf.primitive_root(f)
    # oracle: smallest x whose order is exactly 400
    smallest = next(x for x in range(2, 401) if brute_force_order(401, x) == 400)
    assert w == smallest == 3


def test_primitive_root_powers_never_one_early():
    for q in (9, 16, 27, 53):
        f = gf.field_new(q)
        w = gf.primitive_root(f)
        divisors = [d for d in range(1, q - 1) if (q - 1) % d == 0]
        for d in divisors:
            assert f.pow(w, d) != 1


def test_cyclotomy_classes_mod7():
    f = gf.field_new(7)
    ctx = gf.cyclotomy_new(f, 2)
    assert ctx.class_members(0) == [1, 2, 4]  # nonzero squares mod 7
    assert ctx.class_members(1) == [3, 5, 6]
    ctx1 = gf.cyclotomy_new(f, 1)
    assert ctx1.class_members(0) == [1, 2, 3, 4, 5, 6]
    with pytest.raises(IndexNotDividing):
        gf.cyclotomy_new(f, 4)


def test_class_of_examples():
    ctx = gf.cyclotomy_new(gf.field_new(7), 2)
    assert gf.class_of(ctx, 3) == 1  # 3 is a nonsquare mod 7
    assert gf.class_of(ctx, 1) == 0
    with pytest.raises(ZeroHasNoClass):
        gf.class_of(ctx, 0)
    with pytest.raises(IndexOutOfRange):
        gf.class_of(ctx, 9)


@pytest.mark.parametrize("q,lam", [(7, 2), (7, 3), (13, 4), (9, 2), (16, 5), (25, 8)])
def test_class_multiplicativity_and_sizes(q, lam):
    f = gf.field_new(q)
    ctx = gf.cyclotomy_new(f, lam)
    size = (q - 1) // lam
    seen = set()
    for i in range(lam):
        members = ctx.class_members(i)
        assert len(members) == size
        assert not seen.intersection(members)
        seen.update(members)
    assert len(seen) == q - 1
    for x in range(1, q):
        for y in range(1, q):
            assert gf.class_of(ctx, f.mul(x, y)) == \
                (gf.class_of(ctx, x) + gf.class_of(ctx, y)) % lam
