import json
import subprocess
import sys

import pytest

from gqcodes.cli import EXIT_CAP, EXIT_CLAIM, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _construct(capsys, tmp_path, *argv):
    path = tmp_path / "code.json"
    code, _, _ = run(capsys, "construct", *argv, "-o", str(path))
    assert code == EXIT_OK
    return path


@pytest.mark.parametrize("argv", [
    ("regular-spread", "--q", "3"),
    ("spread-minus-line", "--q", "2"),
    ("hyperbolic-line", "--q", "5"),
    ("subgroup-spread", "--q", "5"),
    ("pair", "--q", "3", "--side", "lines"),
    ("w33-five",),
])
def test_construct_analyze_round_trip(capsys, tmp_path, argv):
    path = _construct(capsys, tmp_path, *argv)
    data = json.loads(path.read_text())
    code, out, _ = run(capsys, "analyze", str(path))
    report = json.loads(out)
    assert code == EXIT_OK and report["matches_claimed"]
    # byte-identical claimed and recomputed records
    assert json.dumps(report["metrics"], sort_keys=True) == json.dumps(data["claimed"], sort_keys=True)


def test_certify_replay(capsys, tmp_path):
    path = _construct(capsys, tmp_path, "regular-spread", "--q", "3")
    code, out, _ = run(capsys, "certify", str(path))
    result = json.loads(out)
    assert code == EXIT_OK and result["success"] and result["replayed"]


def test_tampered_certificate(capsys, tmp_path):
    path = _construct(capsys, tmp_path, "regular-spread", "--q", "3")
    data = json.loads(path.read_text())
    data["certificate"]["orbit_counts"] = [1, 2]
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "certify", str(path))
    assert code == EXIT_CLAIM and json.loads(out)["replayed"] is False


def test_certificate_with_foreign_generator(capsys, tmp_path):
    path = _construct(capsys, tmp_path, "regular-spread", "--q", "3")
    data = json.loads(path.read_text())
    data["certificate"]["generators"].append({"matrix": [[1, 0, 1, 0], [0, 1, 0, 0], [0, 0, 1, 0],
                                                         [0, 0, 0, 1]], "frob": 0})
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "certify", str(path))
    assert code == EXIT_CLAIM and json.loads(out)["success"] is False


def test_certificate_with_non_automorphism(capsys, tmp_path):
    path = _construct(capsys, tmp_path, "regular-spread", "--q", "2")
    data = json.loads(path.read_text())
    perm = list(range(30))
    perm[0], perm[1] = 1, 0
    data["certificate"]["generators"] = [{"perm": perm}]
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "certify", str(path))
    assert code == EXIT_CLAIM and "adjacency" in json.loads(out)["error"]


def test_analyze_nt_and_decide(capsys, tmp_path):
    path = _construct(capsys, tmp_path, "w33-five")
    code, out, _ = run(capsys, "analyze", "--nt", str(path))
    report = json.loads(out)
    assert code == EXIT_OK and report["nt"] and report["stabiliser_order"] == 120
    assert all(row["ok"] for row in report["counting"])
    code, out, _ = run(capsys, "decide", str(path))
    assert code == EXIT_OK and json.loads(out)["stabiliser_order"] == 120


def test_mismatched_claim(capsys, tmp_path):
    path = _construct(capsys, tmp_path, "regular-spread", "--q", "2")
    data = json.loads(path.read_text())
    data["claimed"]["rho"] = 3
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "analyze", str(path))
    assert code == EXIT_CLAIM and not json.loads(out)["matches_claimed"]


@pytest.mark.parametrize("payload,where", [
    ({"q": 3, "members": [{"kind": "point", "coords": [0, 0, 0, 0]}]}, "members[0]"),
    ({"q": 3, "members": [{"kind": "plane"}]}, "members[0]"),
    ({"q": 3, "members": [{"kind": "line", "matrix": [[1, 0, 0, 0], [0, 1, 0, 0]]}]}, "members[0]"),
    ({"q": 6, "members": []}, "q"),
    ({"members": []}, "q"),
    ({"q": 3, "format": 9, "members": []}, "format"),
    ([1, 2], "top level"),
])
def test_malformed_input(capsys, tmp_path, payload, where):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    code, _, err = run(capsys, "analyze", str(path))
    assert code == EXIT_USAGE
    assert where in err


def test_invalid_json_and_missing_file(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "analyze", str(path))
    assert code == EXIT_USAGE and "line 1" in err
    code, _, err = run(capsys, "analyze", str(tmp_path / "absent.json"))
    assert code == EXIT_USAGE


def test_search_stream(capsys):
    code, out, _ = run(capsys, "search", "--q", "2", "--side", "lines", "--size", "5", "--nt")
    lines = [json.loads(x) for x in out.strip().splitlines()]
    assert code == EXIT_OK
    assert lines[-1]["summary"]["classes"] == 1
    assert lines[0]["analysis"]["classification"] == "spread"


def test_search_presets(capsys):
    code, out, _ = run(capsys, "search", "--q", "2", "--preset", "max-delta3")
    assert code == EXIT_OK and json.loads(out.strip().splitlines()[-1])["summary"]["maximum"] == 6
    code, out, _ = run(capsys, "search", "--q", "2", "--preset", "nt-maximal")
    assert code == EXIT_OK


def test_search_usage_errors(capsys):
    assert run(capsys, "search", "--q", "2")[0] == EXIT_USAGE
    assert run(capsys, "search", "--q", "2", "--side", "mixed", "--size", "2")[0] == EXIT_USAGE


def test_cap_exit(capsys, tmp_path):
    assert run(capsys, "search", "--q", "7", "--size", "2")[0] == EXIT_CAP
    path = _construct(capsys, tmp_path, "hyperbolic-line", "--q", "7")
    code, _, err = run(capsys, "decide", str(path))
    assert code == EXIT_CAP and "cap" in err


def test_construct_usage(capsys):
    assert run(capsys, "construct", "regular-spread")[0] == EXIT_USAGE
    assert run(capsys, "construct", "subgroup-spread", "--q", "4")[0] == EXIT_USAGE
    with pytest.raises(SystemExit):
        main(["construct", "nonsense"])


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "ovoid-divisibility", "gq-model")
    report = json.loads(out)
    assert code == EXIT_OK and report["passed"] == report["total"] == 2
    assert run(capsys, "verify", "nope")[0] == EXIT_USAGE


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gqcodes.cli", "verify", "ovoid-divisibility"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"] == 1


@pytest.mark.slow
def test_verify_all_claims(capsys):
    code, out, _ = run(capsys, "verify")
    report = json.loads(out)
    failed = [r["claim"] for r in report["claims"] if not r["ok"]]
    assert code == EXIT_OK and not failed
