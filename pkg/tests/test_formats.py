import numpy as np
import pytest

from hmols import designs as dz
from hmols import formats
from hmols.errors import MalformedInput
from hmols.fixtures import fixture_text, hmols_pair_2_4, imols_pair_6_2


FIXTURE_FILES = ["hmols_2_4.grid", "imols_6_2.grid", "cert_2_401.json"]


@pytest.mark.parametrize("name", ["hmols_2_4.grid", "imols_6_2.grid"])
def test_grid_fixtures_round_trip_byte_identical(name):
    text = fixture_text(name)
    assert formats.grid_dumps(formats.grid_loads(text)) == text


def test_cert_fixture_round_trip_byte_identical():
    text = fixture_text("cert_2_401.json")
    assert formats.cert_dumps(formats.cert_loads(text)) == text


def test_latin_grid_round_trip():
    sq = dz.LatinSquare.from_array([[(i + j) % 4 for j in range(4)]
                                    for i in range(4)])
    text = formats.grid_dumps(sq)
    again = formats.grid_loads(text)
    assert np.array_equal(again.cells, sq.cells)
    assert formats.grid_dumps(again) == text


def test_grid_rejects_garbage():
    with pytest.raises(MalformedInput):
        formats.grid_loads("nonsense 3\n1 2 3\n")
    with pytest.raises(MalformedInput):
        formats.grid_loads("latin 2\n1 2\n1\n")
    with pytest.raises(MalformedInput):
        formats.grid_loads("latin 2\n1 5\n2 1\n")


def test_design_json_round_trip():
    htd = dz.hmols_to_htd(hmols_pair_2_4())
    text = formats.design_dumps(htd)
    again = formats.design_loads(text)
    assert again.k == htd.k and again.hole_kind == htd.hole_kind
    assert again.holes == htd.holes
    assert np.array_equal(again.sorted_blocks(), htd.sorted_blocks())
    assert formats.design_dumps(again) == text


def test_design_json_kinds():
    td = dz.td_from_field(3, 4)
    assert '"kind": "TD"' in formats.design_dumps(td)
    itd = dz.imols_to_itd(imols_pair_6_2())
    assert '"kind": "ITD"' in formats.design_dumps(itd)


def test_imols_empty_hole_round_trip():
    sq = np.array([[[(a * x + y) % 3 for y in range(3)] for x in range(3)]
                   for a in (1, 2)])
    s = dz.IncompleteMolsSet.from_arrays(n=3, hole=(), squares=sq)
    text = formats.grid_dumps(s)
    assert "hole -" in text
    again = formats.grid_loads(text)
    assert again.hole == ()
    assert formats.grid_dumps(again) == text
