import re

import pytest

from lhlc.circuit import serialize_circuit
from lhlc.cli import main
from lhlc.instances import move_reject, swap_reject
from lhlc.operators import locality_audit, parse_hamiltonian, serialize_hamiltonian, single


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {
        "x": "circuit v1\nqubits 1 0\ngate X q1\n",
        "h": "circuit v1\nqubits 1 0\ngate H q1\n",
        "cz": "circuit v1\nqubits 2 0\ngate CPHASE q1 q2\n",
        "bad": "circuit v1\nqubits 1 0\ngate CPHASE q1 q1\n",
        "swap": serialize_circuit(swap_reject()),
        "move": serialize_circuit(move_reject()),
    }.items():
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        paths[name] = str(p)
    z = tmp_path / "z.ham"
    z.write_text(serialize_hamiltonian(single("Z", 1, 1)))
    paths["z"] = str(z)
    paths["dir"] = tmp_path
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compile_x_log(files, capsys):
    out_path = files["dir"] / "x.ham"
    code, out, _ = run(capsys, "compile", files["x"], "--locality", "log", "--J-in", 1, "--J-prop", 1, "--out", out_path)
    assert code == 0
    h = parse_hamiltonian(out_path.read_text())
    assert h.system_size == 2 and len(h) == 2
    assert h.labels == ("out", "prop")
    assert "terms M          2" in out
    assert "a = 0.01" in out


def test_compile_header_echoes_parameters(files, capsys):
    out_path = files["dir"] / "x.ham"
    run(capsys, "compile", files["x"], "--J-in", 2.5, "--out", out_path)
    text = out_path.read_text()
    assert "# J_in = 2.5" in text and "# penalties = explicit" in text and "# locality = log" in text


def test_compile_two_local(files, capsys):
    out_path = files["dir"] / "cz.ham"
    code, out, _ = run(capsys, "compile", files["cz"], "--locality", "two", "--L", 4, "--out", out_path)
    assert code == 0
    assert locality_audit(parse_hamiltonian(out_path.read_text()))[0] == 2
    assert re.search(r"max locality\s+2", out)


def test_compile_usage_errors(files, capsys):
    out_path = files["dir"] / "o.ham"
    assert run(capsys, "compile", files["cz"], "--locality", "two", "--out", out_path)[0] == 2
    assert run(capsys, "compile", files["bad"], "--out", out_path)[0] == 2
    assert run(capsys, "compile", files["x"], "--auto-penalties", "--J-in", 1, "--out", out_path)[0] == 2
    assert run(capsys, "compile", files["dir"] / "missing.txt", "--out", out_path)[0] == 2
    code, _, err = run(capsys, "compile", files["bad"], "--out", out_path)
    assert "line 3" in err
    assert run(capsys, "frobnicate")[0] == 2


def test_spectrum(files, capsys):
    code, out, _ = run(capsys, "spectrum", files["z"], "--method", "dense")
    assert code == 0
    assert out.splitlines()[0] == "lambda_min = -1.0"


def test_spectrum_unresolvable_scale(files, capsys):
    p = files["dir"] / "big.ham"
    p.write_text(serialize_hamiltonian(single("X", 1, 2, 1e12) + single("Z", 2, 2)))
    assert run(capsys, "spectrum", p)[0] == 4


def test_history(files, capsys):
    ham = files["dir"] / "x.ham"
    run(capsys, "compile", files["x"], "--J-in", 1, "--J-prop", 1, "--out", ham)
    code, out, _ = run(capsys, "history", files["x"], "--witness", 0, "--against", ham)
    assert code == 0
    lines = out.splitlines()
    assert lines[1].split() == ["label", "energy"]
    assert [ln.split()[0] for ln in lines[2:]] == ["out", "prop", "total"]
    assert float(lines[-1].split()[1]) == 0.0


def test_history_two_local_uses_recorded_padding(files, capsys):
    ham = files["dir"] / "move.ham"
    run(capsys, "compile", files["move"], "--locality", "two", "--L", 4,
        "--J-in", 1, "--J1", 1, "--J2", 1, "--J-clock", 1, "--out", ham)
    code, out, _ = run(capsys, "history", files["move"], "--witness", 0, "--against", ham)
    assert code == 0 and "T = 11" in out
    labels = [ln.split()[0] for ln in out.splitlines()[2:]]
    assert labels == ["out", "in", "prop1", "prop2-qubit", "prop2-time", "clock", "total"]


def test_oracle(files, capsys):
    code, out, _ = run(capsys, "oracle", files["swap"])
    assert code == 0 and "NO" in out
    code, out, _ = run(capsys, "oracle", files["h"])
    assert code == 3 and "PROMISE_VIOLATED" in out


def test_verify_exit_codes(files, capsys):
    code, out, _ = run(capsys, "verify", files["x"], "--locality", "log", "--eps", 0.01)
    assert code == 0 and "lambda(H) <= a = 0.01: PASS" in out
    code, out, _ = run(capsys, "verify", files["swap"], "--locality", "log")
    assert code == 0 and "NO" in out
    lam = float(re.search(r"^lambda\(H\)\s+(\S+)", out, re.M).group(1))
    assert lam >= 0.74
    assert run(capsys, "verify", files["h"])[0] == 3
    assert run(capsys, "verify", files["move"], "--locality", "two")[0] == 2


def test_verify_explicit_penalties_echoed(files, capsys):
    code, out, _ = run(capsys, "verify", files["swap"], "--J-in", 50, "--J-prop", 5000, "--J-clock", 5000)
    assert "50.0 (explicit)" in out


def test_check_projection(capsys):
    code, out, _ = run(capsys, "check-projection", "--trials", 200, "--seed", 7, "--dim", 16)
    assert code == 0
    assert out.splitlines()[-1] == "200/200 pass"
    assert len(out.splitlines()) == 202
    assert run(capsys, "check-projection", "--dim", 12)[0] == 2


def test_outputs_are_byte_identical(files, capsys):
    first = run(capsys, "check-projection", "--trials", 5, "--seed", 3)[1]
    assert run(capsys, "check-projection", "--trials", 5, "--seed", 3)[1] == first
    a = run(capsys, "verify", files["swap"])[1]
    assert run(capsys, "verify", files["swap"])[1] == a


def test_numbers_have_full_precision(capsys):
    out = run(capsys, "check-projection", "--trials", 3, "--seed", 1)[1]
    value = out.splitlines()[1].split()[1]
    # shortest round-trip repr: every printed value reproduces the double exactly
    assert repr(float(value)) == value
    digits = value.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
    assert len(digits) >= 12
