import json

import numpy as np
import pytest

from advsim import pipeline as P
from advsim.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from advsim.imageio import write_png

from test_pipeline import TINY


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.yaml"
    p.write_text(TINY)
    return p


def test_generate_max_frames_one(tiny, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["generate", "--config", str(tiny), "--max_frames", "1", "--out", str(out)]) == EXIT_OK
    m = P.RunManifest.load(out)
    assert m.frame_count == 1
    for s in m.sensors:
        assert (out / s["dir"] / "frame_000000.png").is_file()
        assert not (out / s["dir"] / "frame_000001.png").exists()
    assert "1 frames" in capsys.readouterr().out


def test_generate_seed_and_weather(tiny, tmp_path):
    w = tmp_path / "fog.yaml"
    w.write_text("weather:\n  fog_density: 90\n  fog_distance: 1\n")
    args = ["generate", "--config", str(tiny), "--max-frames", "1", "--seed", "9", "--weather", str(w)]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    m = P.RunManifest.load(tmp_path / "a")
    assert m.data["seed"] == 9 and m.data["weather"]["fog_density"] == 90
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_RUNTIME
    assert main(args + ["--out", str(tmp_path / "a"), "--overwrite"]) == EXIT_OK


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("carla: [unclosed\n")
    assert main(["generate", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert main(["generate", "--config", str(tmp_path / "none.yaml")]) == EXIT_CONFIG
    assert main(["validate-config", "--config", str(bad)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["patch", "--run", "x", "--method", "sticker", "--patch", "p.png", "--out", "o"])
    assert exc.value.code == EXIT_CONFIG


def test_validate_config(tiny, tmp_path, capsys):
    assert main(["validate-config", "--config", str(tiny)]) == EXIT_OK
    assert "ok: 1 actors, 3 sensors, 4 frames" in capsys.readouterr().out
    bad = tmp_path / "bad.yaml"
    bad.write_text(TINY.replace("fps: 10", "fps: 0"))
    assert main(["validate-config", "--config", str(bad)]) == EXIT_CONFIG
    assert "fps" in capsys.readouterr().err


def test_annotate_patch_eval(tiny, tmp_path, capsys):
    run, tex = tmp_path / "run", tmp_path / "tex.png"
    write_png(tex, np.random.default_rng(0).integers(0, 256, (8, 8, 3), dtype=np.uint8))
    assert main(["generate", "--config", str(tiny), "--out", str(run)]) == EXIT_OK
    assert main(["annotate", str(run), "--format", "kwcoco"]) == EXIT_OK
    assert (run / "annotations/kwcoco.json").is_file() and not (run / "annotations/mots").exists()
    assert main(["annotate", str(tmp_path / "empty")]) == EXIT_RUNTIME
    assert main(["patch", "--run", str(run), "--method", "digital", "--patch", str(tex),
                 "--out", str(tmp_path / "dig")]) == EXIT_OK
    assert main(["patch", "--run", str(run), "--method", "digital", "--patch", str(tmp_path / "nope.png"),
                 "--out", str(tmp_path / "x")]) == EXIT_RUNTIME
    capsys.readouterr()
    assert main(["eval", str(tmp_path / "dig"), "--experiment", "ablation", "--param", "tolerance=4"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["tolerance"] == 4
    rep_file = tmp_path / "masks.json"
    assert main(["eval", str(tmp_path / "dig"), "--experiment", "masks", "--out", str(rep_file)]) == EXIT_OK
    assert json.loads(rep_file.read_text())["experiment"] == "masks"
    assert main(["eval", str(tmp_path / "dig"), "--experiment", "masks", "--param", "bogus=1"]) == EXIT_CONFIG


def test_eval_missing_ground_truth_exit_3(tmp_path):
    cfg = tmp_path / "nopatch.yaml"
    cfg.write_text(TINY.split("patches:")[0])
    assert main(["generate", "--config", str(cfg), "--max_frames", "3", "--out", str(tmp_path / "r")]) == EXIT_OK
    assert main(["eval", str(tmp_path / "r"), "--experiment", "ablation"]) == EXIT_RUNTIME
