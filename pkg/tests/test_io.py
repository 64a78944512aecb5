import io as _io
from pathlib import Path

import numpy as np
import pytest

from fracstab.errors import FracStabError, ParseError, ValidationError
from fracstab.io import (
    emit_csv,
    fmt_scalar,
    fmt_state,
    load_system,
    parse_history_preset,
    parse_input_preset,
    parse_profile_preset,
    parse_system,
    serialize_system,
    system_to_dict,
)

SYSTEMS = sorted((Path(__file__).parent / "data" / "systems").glob("*.toml"))

MINIMAL = """\
q = 1
n = 1
p = 0
A0 = [[-1]]
B0 = [[0]]

[nonlinearity]
kind = "zero"
"""


def test_minimal_document():
    sys = parse_system(MINIMAL)
    assert (sys.q, sys.n, sys.p, sys.m_in) == (1.0, 1, 0, 1)
    assert sys.a0.tolist() == [[-1.0]]
    assert sys.nonlinearity.kind == "zero"


def test_negative_tau_names_field_and_line():
    doc = MINIMAL.replace("p = 0", "p = 1") + "\n[[delays]]\ntau = -1\nA = [[0.0]]\n"
    with pytest.raises(ValidationError, match=r"taus\[0\] must be > 0") as info:
        parse_system(doc)
    assert info.value.field == "taus[0]"
    assert info.value.line == 11


def test_arity_mismatch():
    with pytest.raises(ValidationError, match="p = 1") as info:
        parse_system(MINIMAL.replace("p = 0", "p = 1"))
    assert info.value.field == "delays"


def test_malformed_toml_has_line():
    with pytest.raises(ParseError) as info:
        parse_system("q = 1\nA0 = [[1, 2]\n")
    assert info.value.line is not None


@pytest.mark.parametrize(
    "edit, field",
    [
        (("kind = \"zero\"", "kind = \"zero\"\nbogus = 1"), "nonlinearity"),
        (("q = 1", "q = 1\nextra = 2"), "extra"),
        (("q = 1", "q = \"one\""), "q"),
        (("A0 = [[-1]]", "A0 = [[-1, 0]]"), None),
        (("kind = \"zero\"", "kind = \"tanh\"\nscale = [1.0]\nL = 0.5"), None),
        (("n = 1", "n = 2"), "A0"),
    ],
)
def test_invalid_documents(edit, field):
    with pytest.raises(ValidationError) as info:
        parse_system(MINIMAL.replace(*edit))
    if field is not None:
        assert info.value.field == field


def test_defaults_for_optional_keys():
    sys = parse_system("q = 0.5\nA0 = [[1, 0], [0, 1]]\n")
    assert sys.p == 0 and sys.b0.shape == (2, 1) and sys.nonlinearity.kind == "zero"


@pytest.mark.parametrize("path", SYSTEMS, ids=lambda p: p.stem)
def test_round_trip(path):
    first = load_system(path)
    text = serialize_system(first)
    second = parse_system(text)
    assert system_to_dict(second) == system_to_dict(first)
    assert serialize_system(second) == text


def test_load_missing_file(tmp_path):
    with pytest.raises(FracStabError, match="cannot read"):
        load_system(tmp_path / "nope.toml")


def test_presets():
    h = parse_history_preset("constant:0.5,-0.25")
    assert h(np.array([-1.0]), 2).tolist() == [[0.5, -0.25]]
    assert parse_history_preset("poly:1,2")(np.array([-1.0]), 1)[0, 0] == -1.0
    assert parse_history_preset("sin:0.5,1").kind == "sinusoid"
    assert parse_input_preset("zero").sup_norm == 0.0
    assert parse_input_preset("sin:0.3,2").sup_norm == 0.3
    grid = np.linspace(0, 1, 3)
    assert parse_profile_preset("poly:1,1", grid, "a").tolist() == [1.0, 1.5, 2.0]
    assert parse_profile_preset("constant:2", grid, "g").tolist() == [2.0] * 3
    for bad in ("zero:1", "sin:1", "gauss:1", "constant:x"):
        with pytest.raises(ValidationError):
            parse_history_preset(bad)
    with pytest.raises(ValidationError):
        parse_input_preset("constant:")


def test_number_formatting():
    assert fmt_state(0.1) == "0.1"
    assert float(fmt_state(1 / 3)) == 1 / 3
    assert fmt_scalar(1 / 3) == "0.333333333333"
    assert fmt_scalar(1.0) == "1"


def test_csv_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    emit_csv(["t", "x", "norm"], [], out)
    assert out.read_bytes() == b"t,x,norm\n"


def test_csv_single_row_and_lf():
    buf = _io.StringIO()
    emit_csv(["t", "x", "norm"], [["0.0", "1.0", "1.0"]], buf)
    assert buf.getvalue() == "t,x,norm\n0.0,1.0,1.0\n"


def test_csv_trajectory_length(tmp_path):
    out = tmp_path / "traj.csv"
    grid = np.linspace(0, 1, 1025)
    emit_csv(["t", "x"], ([fmt_state(t), fmt_state(np.exp(-t))] for t in grid), out)
    lines = out.read_bytes().split(b"\n")
    assert lines[-1] == b"" and len(lines) - 1 == 1026
    assert b"\r" not in out.read_bytes()


def test_csv_rejects_ragged_rows():
    with pytest.raises(ValidationError):
        emit_csv(["a", "b"], [["1"]], _io.StringIO())


def test_csv_unwritable(tmp_path):
    with pytest.raises(FracStabError, match="cannot write"):
        emit_csv(["a"], [], tmp_path / "missing" / "x.csv")
