import json
import subprocess
import sys
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import pytest

from helpers import example1, example2
from pattern_waits import dump_instance, load_instance, parse_instance
from pattern_waits.cli import main
from pattern_waits.errors import ValidationError

INSTANCES = Path(__file__).resolve().parent.parent / "instances"
EX1 = str(INSTANCES / "example1.json")
EX2 = str(INSTANCES / "example2.json")
COIN = str(INSTANCES / "fair_coin.json")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, doc, name="inst.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def coin_doc(patterns=None):
    doc = {"states": ["0", "1"], "initial": ["1/2", "1/2"],
           "transition": [["1/2", "1/2"], ["1/2", "1/2"]]}
    if patterns is not None:
        doc["patterns"] = patterns
    return doc


def test_analyze_example1(capsys):
    code, out, _ = run(capsys, "analyze", EX1)
    assert code == 0
    assert "f_C = 4/5" in out
    assert "f_A = 1/10" in out
    assert "F_3 = 8/5" in out
    assert "E(tau) = 127/15" in out


def test_analyze_example2(capsys):
    code, out, _ = run(capsys, "analyze", EX2)
    assert code == 0
    assert "E(tau) = 45/13" in out


def test_analyze_extra_z(capsys):
    code, out, _ = run(capsys, "analyze", EX1, "--z", "2", "--z", "3/2")
    assert code == 0
    assert "z = 2: f(z) = 21/314" in out
    code, out, _ = run(capsys, "analyze", EX1, "--json", "--z", "2")
    doc = json.loads(out)
    assert doc["gf"][0]["f_total"]["exact"] == "21/314"


def test_analyze_rejects_subpattern(capsys, tmp_path):
    path = write(tmp_path, coin_doc({"X": "11", "Y": "110"}))
    code, _, err = run(capsys, "analyze", path)
    assert code == 1
    assert "SubpatternViolation" in err


def test_analyze_rejects_infinite_tau(capsys, tmp_path):
    doc = {"states": ["0", "1"], "initial": ["1", "0"], "transition": [["1", "0"], ["0", "1"]],
           "patterns": {"P": "1"}}
    code, _, err = run(capsys, "analyze", write(tmp_path, doc))
    assert code == 1
    assert "TauMayBeInfinite" in err


def test_bad_file_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"states": ["0",\n "1"', encoding="utf-8")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 1 and "line" in err
    doc = coin_doc({"P": "1"})
    doc["transition"][1][0] = "3/2"
    code, _, err = run(capsys, "analyze", write(tmp_path, doc))
    assert code == 1 and "transition[1][0]" in err
    code, _, err = run(capsys, "analyze", str(tmp_path / "missing.json"))
    assert code == 1


def test_distribution(capsys):
    code, out, _ = run(capsys, "distribution", EX1, "--n-max", "2", "--json")
    assert code == 0
    doc = json.loads(out)
    assert [r["S"]["C"]["exact"] for r in doc["rows"]] == ["0", "1/6"]
    code, out, _ = run(capsys, "distribution", EX1, "--n-max", "1", "--json")
    assert all(v["exact"] == "0" for v in json.loads(out)["rows"][0]["S"].values())
    code, out, _ = run(capsys, "distribution", COIN, "--n-max", "2")
    assert code == 0
    assert "P(tau <= 2) = 1/4" in out


def test_distribution_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["distribution", EX1, "--n-max", "0"])
    assert exc.value.code == 2


def test_simulate_byte_identical(capsys):
    args = ("simulate", EX1, "--trials", "100000", "--seed", "42")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    _, threaded, _ = run(capsys, *args, "--workers", "4")
    assert first == second == threaded
    code, out, _ = run(capsys, *args, "--json")
    assert code == 0
    doc = json.loads(out)
    assert abs(float(doc["mean_tau"]["z_score"])) <= 4
    assert doc["mean_tau"]["exact"]["exact"] == "127/15"


def test_simulate_single_trial(capsys, tmp_path):
    doc = coin_doc({"P": "1"})
    doc["initial"] = ["0", "1"]
    code, out, _ = run(capsys, "simulate", write(tmp_path, doc), "--trials", "1")
    assert code == 0
    assert "tau = 1" in out


def test_simulate_step_cap(capsys, tmp_path, monkeypatch):
    doc = {"states": ["0", "1"], "initial": ["1", "0"], "transition": [["1", "0"], ["0", "1"]],
           "patterns": {"P": "1"}}
    monkeypatch.setenv("PATTERN_WAITS_STEP_CAP", "50")
    code, _, err = run(capsys, "simulate", write(tmp_path, doc), "--trials", "10")
    assert code == 1
    assert "StepCapExceeded" in err and "trial 0" in err


def test_penney(capsys):
    code, out, _ = run(capsys, "penney", COIN, "--opponent", "111")
    assert code == 0
    assert "best reply: 011 wins with 7/8" in out
    assert len([ln for ln in out.splitlines() if ln[:3].isdigit()]) == 7
    code, out, _ = run(capsys, "penney", COIN, "--opponent", "1", "--json")
    assert [c["reply"] for c in json.loads(out)["candidates"]] == ["0"]


def test_penney_opponent_by_name(capsys):
    code, out, _ = run(capsys, "penney", COIN, "--opponent", "HH")
    assert code == 0
    assert "opponent: HH = 11" in out


def test_penney_missing_opponent(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["penney", COIN])
    assert exc.value.code == 2


def test_scan(capsys):
    code, out, _ = run(capsys, "scan", COIN, "--window", "4", "--threshold", "2", "--horizon", "3")
    assert code == 0
    assert "C = {11, 101, 1001}" in out
    assert "= 1/2" in out
    code, _, err = run(capsys, "scan", COIN, "--window", "2", "--threshold", "3", "--horizon", "3")
    assert code == 1
    assert "BadSpec" in err


def _walk_numbers(node):
    if isinstance(node, dict):
        if set(node) == {"exact", "decimal"}:
            yield node
        for v in node.values():
            yield from _walk_numbers(v)
    elif isinstance(node, list):
        for v in node:
            yield from _walk_numbers(v)


@pytest.mark.parametrize("argv", [
    ["analyze", EX1, "--z", "2", "--z", "5"],
    ["analyze", EX2],
    ["distribution", EX1, "--n-max", "6"],
    ["simulate", EX1, "--trials", "5000"],
    ["penney", COIN, "--opponent", "010"],
    ["scan", COIN, "--window", "5", "--threshold", "3", "--horizon", "9"],
])
def test_json_exact_and_decimal_agree(capsys, argv):
    code, out, _ = run(capsys, *argv, "--json")
    assert code == 0
    found = list(_walk_numbers(json.loads(out)))
    assert found
    for num in found:
        exact = Fraction(num["exact"])
        dec = Decimal(num["decimal"])
        if exact == 0:
            assert dec == 0
        else:
            assert abs(Fraction(dec) - exact) <= abs(exact) * Fraction(1, 10**12)


def test_float_mode(capsys):
    code, out, _ = run(capsys, "analyze", EX1, "--float", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["mode"] == "float"
    assert float(doc["mean_tau"]["decimal"]) == pytest.approx(127 / 15, rel=1e-12)


def test_round_trip():
    for chain, coll in (example1(), example2()):
        again_chain, again_coll = parse_instance(json.loads(json.dumps(dump_instance(chain, coll))))
        assert again_chain == chain
        assert again_coll == coll


def test_round_trip_files(tmp_path):
    chain, coll = load_instance(EX1)
    path = tmp_path / "copy.json"
    path.write_text(json.dumps(dump_instance(chain, coll)), encoding="utf-8")
    assert load_instance(path) == (chain, coll)


def test_decimal_inputs_are_exact():
    chain, _ = load_instance(COIN)
    assert chain.initial == (Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(ValidationError, match="patterns"):
        parse_instance(coin_doc({"P": "12"}))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pattern_waits", "analyze", EX2],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "E(tau) = 45/13" in proc.stdout
