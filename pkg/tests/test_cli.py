from __future__ import annotations

import json
import subprocess
import sys

import pytest

from rsaut.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_m5(capsys):
    code, out, _ = run(capsys, "build", "--m", "5", "--parity", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["u1"] == [30, 29, 28, 27, 26]
    assert doc["schema"] == "rsaut.build/1"


def test_build_m4_double_parity(capsys):
    code, out, _ = run(capsys, "build", "--m", "4", "--parity", "2")
    assert code == 0 and json.loads(out)["u"] == [2, 1, 0, 14]


def test_build_bad_m(capsys):
    code, out, err = run(capsys, "build", "--m", "2")
    assert code == 2 and "3..10" in err and out == ""


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["build"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


@pytest.mark.parametrize("m,line", [(4, "order=120, classes=8"), (5, "order=124, classes=4")])
def test_search(capsys, tmp_path, m, line):
    out_file = tmp_path / "g.json"
    code, out, _ = run(capsys, "search", "--m", str(m), "--out", str(out_file))
    assert code == 0 and out.splitlines()[0] == line
    assert json.loads(out_file.read_text())["order"] == int(line.split("=")[1].split(",")[0])


def test_verify(capsys, tmp_path):
    table = [
        {"sigma": "id", "a": [0, 0, 0, 0, 0], "l": 0},
        {"sigma": "(1,2)(4,5)", "a": [0, 15, 23, 29, 17], "l": 0},
        {"sigma": "(1,4)(2,5)", "a": [0, 29, 9, 18, 20], "l": 0},
        {"sigma": "(1,5)(2,4)", "a": [0, 17, 3, 20, 6], "l": 0},
    ]
    good = tmp_path / "good.json"
    good.write_text(json.dumps(table))
    code, out, _ = run(capsys, "verify", "--m", "5", "--permutations", str(good))
    assert code == 0 and out.count("ACCEPT") == 4
    table[1]["a"][1] += 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(table))
    code, out, _ = run(capsys, "verify", "--m", "5", "--permutations", str(bad))
    assert code == 1 and "1: REJECT" in out and out.count("ACCEPT") == 3


def test_verify_unreadable(capsys, tmp_path):
    code, _, err = run(capsys, "verify", "--m", "5", "--permutations", str(tmp_path / "nope"))
    assert code == 2 and "cannot read" in err


def _config(tmp_path, **kw):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(kw))
    return str(path)


def test_simulate_noiseless(capsys, tmp_path):
    cfg = _config(tmp_path, m=4, ebno_db=["inf"], max_frames=200, chunk_size=64)
    code, out, err = run(capsys, "simulate", "--config", cfg)
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "ebno_db,decoder,frames,bit_errors,frame_errors,ber,fer,ci95"
    assert {r.split(",")[1] for r in rows[1:]} == {"uncoded", "hdd", "spa", "pspa"}
    assert all(r.split(",")[3] == "0" for r in rows[1:])


def test_simulate_writes_manifest_and_is_reproducible(capsys, tmp_path):
    cfg = _config(tmp_path, m=5, ebno_db=[4.0], decoders=["spa", "pspa"], min_frame_errors=20,
                  max_frames=1024, chunk_size=256)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "simulate", "--config", cfg, "--seed", "9", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "--config", cfg, "--seed", "9", "--threads", "2",
               "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert "4,pspa," in a.read_text()
    man = json.loads((tmp_path / "a.manifest.json").read_text())
    assert man["outputs"] == [str(a)] and man["seeds"]["master_seed"] == 9
    assert man["config"]["decoders"] == ["spa", "pspa"] and man["git_describe"]


@pytest.mark.parametrize("doc,key", [
    ({"m": 4, "ebno_db": [3], "max_iter": 3}, "max_iter"),
    ({"m": 4, "ebno_db": [3], "decoders": ["spa", "ml"]}, "decoders/1"),
    ({"m": 12, "ebno_db": [3]}, "m"),
    ({"ebno_db": [3]}, "'m'"),
    ({"m": 4, "parity": 2, "ebno_db": [3]}, "decoders"),
])
def test_simulate_bad_config(capsys, tmp_path, doc, key):
    code, out, err = run(capsys, "simulate", "--config", _config(tmp_path, **doc))
    assert code == 2 and key in err and out == ""


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rsaut", "build", "--m", "3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["u1"] == [2, 1, 0]
