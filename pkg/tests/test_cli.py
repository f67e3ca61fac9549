"""End-to-end CLI tests: exit codes, output files, and the feeder generator."""

import os
import shutil

from conftest import fixture_path

from tesgrid.cli import main
from tesgrid.feedergen import gen_feeder, gen_weather
from tesgrid.glm import parse_scenario
from tesgrid.validate import validate


def test_run_success(tmp_path, capsys):
    scenario = tmp_path / "feeder_small.glm"
    shutil.copy(fixture_path("feeder_small.glm"), scenario)
    out = tmp_path / "out"
    code = main(["run", str(scenario), "--out", str(out)])
    assert code == 0
    names = sorted(os.listdir(out))
    assert names == ["audit.csv", "src.csv", "summary.txt", "tm3.csv", "ul1.csv"]
    listed = capsys.readouterr().out.splitlines()
    assert len(listed) == 5
    with open(out / "summary.txt") as fh:
        summary = fh.read()
    assert "complete 1" in summary


def test_run_validation_failure(tmp_path, capsys):
    bad = tmp_path / "bad.glm"
    bad.write_text("object node { name n; }\n")  # no clock, no SWING
    assert main(["run", str(bad), "--out", str(tmp_path / "out")]) == 2
    assert "NO_CLOCK" in capsys.readouterr().err


def test_run_parse_failure(tmp_path, capsys):
    bad = tmp_path / "bad.glm"
    bad.write_text("object widget { }\n")
    try:
        code = main(["run", str(bad), "--out", str(tmp_path / "out")])
    except SystemExit as exc:
        code = exc.code
    assert code == 2
    assert "unknown class" in capsys.readouterr().err


def test_run_missing_player_file_is_runtime_error(tmp_path, capsys):
    scenario = tmp_path / "s.glm"
    with open(fixture_path("feeder_small.glm")) as fh:
        text = fh.read()
    scenario.write_text(
        text + "player { name p; target z1; property base_power; file missing.csv; }\n"
    )
    assert main(["run", str(scenario), "--out", str(tmp_path / "out")]) == 3


def test_validate_ok(capsys):
    assert main(["validate", fixture_path("feeder_small.glm")]) == 0
    assert "runnable" in capsys.readouterr().out


def test_validate_failure(tmp_path, capsys):
    bad = tmp_path / "bad.glm"
    bad.write_text("object node { name n; }\n")
    assert main(["validate", str(bad)]) == 2
    assert "not runnable" in capsys.readouterr().out


def test_gen_feeder_writes_valid_scenario(tmp_path, capsys):
    out = tmp_path / "feeder"
    assert main(["gen-feeder", "--houses", "10", "--seed", "1", "--out", str(out)]) == 0
    with open(out / "feeder.glm") as fh:
        model = parse_scenario(fh.read())
    assert validate(model).runnable
    assert len(model.of_class("house")) == 10
    assert len(model.of_class("generator_seller")) == 50
    assert os.path.exists(out / "weather.csv")


def test_gen_feeder_deterministic():
    assert gen_feeder(30, 0) == gen_feeder(30, 0)
    assert gen_feeder(30, 0) != gen_feeder(30, 1)
    assert gen_weather() == gen_weather()


def test_generated_feeder_end_to_end(tmp_path):
    out = tmp_path / "feeder"
    main(["gen-feeder", "--houses", "5", "--seed", "2", "--out", str(out)])
    run_out = tmp_path / "run"
    assert main(["run", str(out / "feeder.glm"), "--out", str(run_out)]) == 0
    assert os.path.exists(run_out / "market.csv")
    assert os.path.exists(run_out / "feeder.csv")
