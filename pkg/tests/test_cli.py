import json
import subprocess
import sys

import pytest

from langant import antpat
from langant.cli import main
from langant.engine import Configuration, Picture, RuleWord


def kv(text):
    out = {}
    for line in text.splitlines():
        k, _, v = line.partition("=")
        out.setdefault(k, v)
    return out


def test_simulate_zero_steps_is_identity(tmp_path, capsys):
    src = tmp_path / "in.antpat"
    antpat.write(src, RuleWord("LLR"), Configuration(Picture({(1, 1): 2, (-3, 0): 1}), (1, 0), 0))
    dst = tmp_path / "out.antpat"
    assert main(["simulate", "--input", str(src), "--steps", "0", "--out", str(dst)]) == 0
    assert dst.read_bytes() == src.read_bytes()
    assert kv(capsys.readouterr().out)["nonzero"] == "2"


def test_simulate_render(tmp_path, capsys):
    pgm, svg, png = tmp_path / "a.pgm", tmp_path / "a.svg", tmp_path / "a.png"
    assert main(["simulate", "LR", "--white", "--steps", "11000", "--render", str(pgm)]) == 0
    assert pgm.read_bytes().startswith(b"P5\n")
    assert main(["simulate", "LR", "--steps", "200", "--render", str(svg),
                 "--figure", str(png)]) == 0
    assert svg.read_text().startswith("<svg") and png.exists()
    out = kv(capsys.readouterr().out)
    assert out["rule"] == "LR" and out["steps"] == "11000"


def test_detect(capsys, tmp_path):
    cat = tmp_path / "h.json"
    assert main(["detect", "LR", "--out", str(cat)]) == 0
    out = kv(capsys.readouterr().out)
    assert out["outcome"] == "highway" and out["period"] == "104"
    assert main(["verify", str(cat)]) == 0


def test_construct_and_verify(tmp_path, capsys):
    cat = tmp_path / "c.json"
    assert main(["construct", "--family", "l2kr", "--k", "3", "--variant", "fundamental",
                 "--out", str(cat)]) == 0
    rec = json.loads(cat.read_text())["highways"][0]
    assert rec["period"] == 50 and rec["provenance"]["seed"] == "constructed"
    assert main(["verify", str(cat)]) == 0
    cat2 = tmp_path / "l.json"
    assert main(["construct", "--family", "llrlrl", "--n", "5", "--out", str(cat2)]) == 0
    assert main(["verify", str(cat2)]) == 0
    assert kv(capsys.readouterr().out)["period"] == "50"
    assert json.loads(cat2.read_text())["highways"][0]["period"] == 340


def test_construct_to_stdout_is_a_catalog(capsys):
    assert main(["construct", "--family", "l2kr", "--k", "3", "--variant", "harmonic"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["period"] for r in doc["highways"]] == [100, 100]


def test_verify_rejection(tmp_path, capsys):
    cat = tmp_path / "c.json"
    main(["construct", "--family", "l2kr", "--k", "2", "--out", str(cat)])
    doc = json.loads(cat.read_text())
    doc["highways"][0]["period"] = 17
    cat.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["verify", str(cat)]) == 1
    err = capsys.readouterr().err
    assert "reject clause=" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["simulate", "LR"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 2
    assert main(["construct", "--family", "l2kr"]) == 2
    assert main(["simulate", "LXR", "--steps", "3"]) == 2


def test_census_outputs(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LANGANT_WORKERS", "1")
    js, csv, png = tmp_path / "r.json", tmp_path / "r.csv", tmp_path / "r.png"
    assert main(["census", "LLR", "--runs", "250", "--json", str(js), "--csv", str(csv),
                 "--figure", str(png)]) == 0
    out = kv(capsys.readouterr().out)
    assert out["dominant_period"] == "18" and out["highway_fraction"] == "1.000000"
    assert json.loads(js.read_text())["total_runs"] == 250
    assert csv.read_text().startswith("period,count,frequency\n18,250,")
    assert png.stat().st_size > 0


def test_mine_and_render(tmp_path, capsys):
    cat = tmp_path / "m.json"
    assert main(["mine", "LLR", "--budget", "20", "--catalog", str(cat)]) == 0
    assert kv(capsys.readouterr().out)["distinct"] == "1"
    assert main(["mine", "LLR", "--budget", "20", "--first-run", "20",
                 "--catalog", str(cat)]) == 0
    assert kv(capsys.readouterr().out)["added"] == "0"
    pgm = tmp_path / "h.pgm"
    assert main(["render", str(cat), "--render", str(pgm)]) == 0
    assert pgm.read_bytes().startswith(b"P5")


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "langant.cli", "construct", "--family",
                        "llrlrl", "--n", "0"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["highways"][0]["period"] == 220
