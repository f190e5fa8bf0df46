import json
import random

import pytest

from bvcalc.grammar import ParseError, format_expr, parse_expr, parse_model_file
from bvcalc.cli import main

from util_random import ghost_model, plane_model, random_expr


MODEL_TEXT = """
[base]
dim = 1
[fields]
q ghost = 0
[sections]
s1: q = sin(x1)
s1: dag(q) = g1*sin(x1)
"""


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "scalar.model"
    path.write_text(MODEL_TEXT)
    return str(path)


# -- grammar -------------------------------------------------------------------

def test_round_trip_on_random_expressions():
    models = [ghost_model(), plane_model()]
    rng = random.Random(99)
    for i in range(1000):
        model = models[i % 2]
        e = random_expr(model, rng, with_attach=True)
        text = format_expr(e)
        assert parse_expr(text, model) == e, text


def test_parse_basic_forms():
    m = ghost_model()
    assert parse_expr("q_xx", m) == m.jet("q", (2,))
    assert parse_expr("q''", m) == m.jet("q", (2,))
    assert parse_expr("dag(q)_x * q", m) == m.jet("q", (1,), dagger=True) * m.jet("q")
    assert parse_expr("2/3 * sin(q)", m) == m.sin("q").scale(__import__("fractions").Fraction(2, 3))
    assert parse_expr("D[1](q^2)", m) == (m.jet("q") * m.jet("q", (1,))).scale(2)
    assert parse_expr("hbar^-1 * i * q", m) is not None
    assert parse_expr("q_{x1 x1}", m) == m.jet("q", (2,))


def test_parse_plane_indices():
    m = plane_model()
    assert parse_expr("u_{x1 x2}", m) == m.jet("u", (1, 1))
    assert parse_expr("x2 * u", m) == m.x(1) * m.jet("u")


def test_parse_errors_have_positions():
    m = ghost_model()
    with pytest.raises(ParseError):
        parse_expr("q +* q", m)
    with pytest.raises(ParseError):
        parse_expr("nope", m)
    with pytest.raises(ParseError):
        parse_expr("sin(dag(q))", m)  # odd argument rejected
    with pytest.raises(ParseError):
        parse_expr("q_{x9}", m)


def test_model_file_parsing():
    model, sections = parse_model_file(MODEL_TEXT)
    assert model.base_dim == 1
    assert model.fields == (("q", 0),)
    assert ("q", True) in sections["s1"]
    with pytest.raises(ParseError):
        parse_model_file("[base]\nwrong = 1\n")
    with pytest.raises(ParseError):
        parse_model_file("[unknown]\n")
    with pytest.raises(ParseError):
        parse_model_file("[base]\ndim = 1\n")  # missing fields


# -- commands -------------------------------------------------------------------

def test_cmd_euler(model_file, capsys):
    assert main(["euler", model_file, "--expr", "q*q_xx", "--field", "q"]) == 0
    out = capsys.readouterr().out.strip()
    assert out == "2*q_xx"


def test_cmd_schouten_and_laplacian(model_file, capsys):
    assert main(["schouten", model_file, "--f", "dag(q)*q_x", "--g", "q^2",
                 "--collapse"]) == 0
    out = capsys.readouterr().out
    assert "-2*q*q_x" in out
    assert main(["laplacian", model_file, "--expr", "dag(q)*q*q_xx"]) == 0
    out = capsys.readouterr().out
    assert "frz[0:x1 x1](q)" in out and "q_xx" in out


def test_cmd_check_json_schema(model_file, capsys):
    rc = main(["check", "skew", "--cases", "5", "--seed", "3", "--json"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema"] == 1
    assert payload["suite"] == "skew"
    assert payload["cases"] == 5
    assert payload["passed"] is True
    assert len(payload["results"]) == 5
    assert all(set(r) >= {"case", "seed", "passed"} for r in payload["results"])


def test_cmd_check_naive_regression(capsys):
    rc = main(["check", "derivation-1c", "--scalar-pair", "--mode", "naive"])
    assert rc == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "discrepancy density" in out


def test_cmd_check_seed_determinism(capsys):
    main(["check", "derivation-1c", "--cases", "4", "--seed", "11", "--json"])
    first = capsys.readouterr().out
    main(["check", "derivation-1c", "--cases", "4", "--seed", "11", "--json"])
    second = capsys.readouterr().out
    a, b = json.loads(first), json.loads(second)
    a.pop("elapsed_s"), b.pop("elapsed_s")
    assert a == b


def test_cmd_example_scalar(capsys):
    rc = main(["example", "scalar"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "LHS = RHS (structural) ; LHS ~ RHS (cohomological)" in out


def test_cmd_evaluate(model_file, capsys):
    rc = main(["evaluate", model_file, "--expr", "q^2", "--section", "s1",
               "--points", "16"])
    assert rc == 0
    assert "3.14159" in capsys.readouterr().out


def test_cmd_usage_errors(model_file, capsys):
    assert main(["euler", model_file, "--expr", "q +* q", "--field", "q"]) == 2
    assert main(["evaluate", model_file, "--expr", "q", "--section", "nope"]) == 2


def test_bvcalc_seed_env(model_file, monkeypatch, capsys):
    monkeypatch.setenv("BVCALC_SEED", "21")
    from bvcalc.cli import build_parser
    args = build_parser().parse_args(["check", "skew", "--cases", "1"])
    assert args.seed == 21
