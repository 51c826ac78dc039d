import pytest

from sathub.cli import main, parse_product
from sathub.dimacs import loads
from sathub.node import ServerNode
from sathub.rpc import web_call


@pytest.fixture
def node():
    n = ServerNode(workers=2).start()
    yield n
    n.stop()


def test_parse_product_forms():
    assert parse_product("15") == 15
    assert parse_product("0b1111") == 15
    assert parse_product("0b0") == 0
    with pytest.raises(ValueError):
        parse_product("fifteen")


def test_encode_to_dimacs_file(tmp_path, capsys):
    out = tmp_path / "f15.cnf"
    code = main(["encode", "--l", "4", "--product", "15", "--out", str(out)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "u vars:    1..4" in stdout
    assert "v vars:    5..8" in stdout
    doc = loads(out.read_text())
    assert doc.var_count >= 8
    assert len(doc.clauses) > 0
    assert any("u vars" in comment for comment in doc.comments)


def test_encode_rejects_bad_length(capsys):
    assert main(["encode", "--l", "3", "--product", "10", "--out", "x.cnf"]) == 1
    assert "power of two" in capsys.readouterr().err


def test_encode_rejects_wide_product(capsys):
    assert main(["encode", "--l", "4", "--product", "70000", "--out", "x.cnf"]) == 1
    assert "bits" in capsys.readouterr().err


def test_encode_bit_string_product(tmp_path):
    out = tmp_path / "bits.cnf"
    assert main(["encode", "--l", "4", "--product", "0b00001111", "--out", str(out)]) == 0
    # same instance as decimal 15
    other = tmp_path / "dec.cnf"
    main(["encode", "--l", "4", "--product", "15", "--out", str(other)])
    assert loads(out.read_text()).clauses == loads(other.read_text()).clauses


def test_encode_into_live_memory(node, capsys):
    created = web_call(node.endpoint, "SatCnf.create", {"initialVariableCount": 0})
    code = main(["encode", "--l", "4", "--product", "15", "--out", created["directUrl"]])
    assert code == 0
    clauses = web_call(
        node.endpoint, "SatCnf.clauses", object_ref=created["objectRef"]
    )["clauses"]
    assert len(clauses) > 0


def test_solve_dimacs_roundtrip(tmp_path, capsys):
    path = tmp_path / "inst.cnf"
    path.write_text("p cnf 2 2\n1 2 0\n-1 2 0\n")
    assert main(["solve", str(path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "SAT"
    assert out[1].endswith(" 0")

    path.write_text("p cnf 1 2\n1 0\n-1 0\n")
    assert main(["solve", str(path)]) == 20
    assert capsys.readouterr().out.splitlines()[0] == "UNSAT"


def test_solve_missing_file(capsys):
    assert main(["solve", "/nonexistent/x.cnf"]) == 1


def test_factor_15(node, capsys):
    code = main(["factor", "15", "--l", "4", "--endpoint", node.endpoint])
    assert code == 0
    assert "15 = 5 × 3" in capsys.readouterr().out


def test_factor_prime_unsat(node, capsys):
    code = main(["factor", "23", "--l", "4", "--endpoint", node.endpoint])
    assert code == 20
    assert "UNSAT (no two factors of length 4)" in capsys.readouterr().out


def test_factor_square(node, capsys):
    code = main(["factor", "49", "--l", "4", "--endpoint", node.endpoint])
    assert code == 0
    assert "49 = 7 × 7" in capsys.readouterr().out


def test_factor_portfolio(node, capsys):
    code = main(["factor", "35", "--l", "4", "--endpoint", node.endpoint, "--portfolio", "2"])
    assert code == 0
    assert "35 = 7 × 5" in capsys.readouterr().out


def test_factor_endpoint_from_env(node, capsys, monkeypatch):
    monkeypatch.setenv("SATHUB_ENDPOINT", node.endpoint)
    assert main(["factor", "21", "--l", "4"]) == 0
    assert "21 = 7 × 3" in capsys.readouterr().out


def test_factor_no_endpoint(capsys, monkeypatch):
    monkeypatch.delenv("SATHUB_ENDPOINT", raising=False)
    assert main(["factor", "15", "--l", "4"]) == 1
    assert "endpoint" in capsys.readouterr().err


def test_factor_transport_error(capsys, monkeypatch):
    assert main(["factor", "15", "--l", "4", "--endpoint", "http://127.0.0.1:9"]) == 1


def test_factor_releases_memory(node):
    main(["factor", "15", "--l", "4", "--endpoint", node.endpoint])
    # the instance created for the factoring job was deleted afterwards
    assert node.memory._objects == {}


def test_factor_8633_portfolio_3():
    big = ServerNode(workers=3).start()
    try:
        import io
        from contextlib import redirect_stdout

        buffer = io.StringIO()
        with redirect_stdout(buffer):
            code = main(
                ["factor", "8633", "--l", "8", "--endpoint", big.endpoint, "--portfolio", "3"]
            )
        assert code == 0
        assert "8633 = 97 × 89" in buffer.getvalue()
    finally:
        big.stop()


def test_two_serves_on_one_port_second_fails():
    first = ServerNode(workers=1).start()
    try:
        port = int(first.endpoint.rsplit(":", 1)[1])
        with pytest.raises(OSError):
            ServerNode(workers=1, port=port)
    finally:
        first.stop()
