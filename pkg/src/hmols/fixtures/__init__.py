"""Shipped fixtures: the type-2^4 HMOLS pair, the order-6 incomplete pair
with hole size 2, the 9x9 base-3 template matrix, and the u-vector
certificate for the 11-column search over GF(401).

Large constructed designs are never shipped; certificates rebuild them
on demand.
"""

from __future__ import annotations

import importlib.resources

import numpy as np

from .. import formats


def fixture_text(name: str) -> str:
    return importlib.resources.files(__package__).joinpath(name).read_text()


def fixture_path(name: str):
    return importlib.resources.files(__package__).joinpath(name)


def hmols_pair_2_4():
    """The pair of HMOLS of type 2^4 with holes {1,2},{3,4},{5,6},{7,8}."""
    return formats.grid_loads(fixture_text("hmols_2_4.grid"))


def imols_pair_6_2():
    """The orthogonal pair of order-6 incomplete squares with hole {1,2}."""
    return formats.grid_loads(fixture_text("imols_6_2.grid"))


def template_3_2_matrix() -> np.ndarray:
    """The 9x9 dot-product table of GF(3)^2 in lexicographic order."""
    rows = [[int(t) for t in line.split()]
            for line in fixture_text("template_3_2.txt").splitlines()]
    return np.array(rows, dtype=np.int32)


def cert_2_401() -> dict:
    """Difference vectors for h=2, d=4, q=401; the template column
    assignment is deliberately absent and is recovered by matching."""
    return formats.cert_loads(fixture_text("cert_2_401.json"))
