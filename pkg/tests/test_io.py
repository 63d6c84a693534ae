import json
from fractions import Fraction as F

import mpmath
from hypothesis import given
from hypothesis import strategies as st

from renyi_evt.io import (
    RunManifest,
    cell,
    csv_text,
    decimal_str,
    format_table,
    parse_cell,
    read_csv,
    write_output,
)


def test_cells():
    assert cell(F(3, 4)) == "3/4"
    assert cell(True) == "true"
    assert cell(None) == ""
    assert parse_cell("3/4") == F(3, 4)
    assert parse_cell("17") == 17
    assert parse_cell("false") is False


def test_decimal_keeps_huge_exponents():
    tiny = F(1, 2**5000)
    assert decimal_str(tiny).endswith("e-1506")
    assert decimal_str(F(2, 3)) == "0.666666666666667"


def test_csv_round_trip(tmp_path):
    rows = [{"k": 8, "p": F(13, 32), "x": mpmath.mpf(1) / 3, "ok": True}, {"k": 9, "p": F(1, 3**40), "x": None, "ok": False}]
    paths = write_output(tmp_path / "t.csv", rows, RunManifest("test", {"beta": 2}, {}))
    assert [p.name for p in paths] == ["t.csv", "t.csv.manifest.json"]
    back = read_csv(paths[0])
    assert back[0]["p"] == F(13, 32) and back[1]["p"] == F(1, 3**40)
    assert back[0]["p_dec"] == mpmath.mpf("0.40625")
    assert back[1]["ok"] is False and back[1]["x"] is None
    head = paths[0].read_bytes().split(b"\r\n")[0]
    assert head == b"k,p,p_dec,x,ok"
    manifest = json.loads(paths[1].read_text())
    assert manifest["subcommand"] == "test" and manifest["finished"]


def test_json_embeds_manifest(tmp_path):
    rows = [{"q": 1, "p": F(1, 2)}]
    (path,) = write_output(tmp_path / "t.json", rows, RunManifest("cluster", {"lambda": F(1, 2)}, {"intervals": 5}))
    payload = json.loads(path.read_text())
    assert set(payload) == {"manifest", "rows"}
    assert payload["rows"][0]["p"] == "1/2"
    assert payload["manifest"]["parameters"]["lambda"] == "1/2"


def test_csv_is_deterministic():
    rows = [{"k": k, "p": F(k, k + 1)} for k in range(5)]
    assert csv_text(rows) == csv_text(rows)


def test_format_table_abbreviates_long_fractions():
    out = format_table([{"p": F(1, 3**80)}])
    assert "e-" in out and "/" not in out


@given(st.lists(st.fractions(min_value=0, max_value=1), min_size=1, max_size=8))
def test_fraction_cells_round_trip(values):
    assert [parse_cell(cell(v)) for v in values] == values
