import json

from rwimaging.cli import main


def test_preset_list(capsys):
    assert main(["preset", "list"]) == 0
    out = capsys.readouterr().out
    assert "fig1\t" in out and "fig10\t" in out


def test_stats_command(tmp_path, capsys):
    assert main(["stats", "--preset", "fig1", "--out", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["rows"] == 40
    assert (tmp_path / "stats.csv").exists()


def test_image_command(tmp_path, capsys):
    cfg = tmp_path / "s.toml"
    cfg.write_text('name = "tiny"\ngeometry.depth = 4.0\nsource.x = 2.0\narray.count = 7\n'
                   'array.range = 20.0\nimage.z_half = 2.0\nfrequency.samples = 33\n')
    assert main(["image", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["weights"] == ["uniform"]
    assert (tmp_path / "o" / "summary.json.meta.json").exists()


def test_compare_command(tmp_path, capsys):
    assert main(["compare", "--preset", "fig1", "fig2", "--out", str(tmp_path)]) == 0
    assert "fig2" in json.loads(capsys.readouterr().out)


def test_configuration_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("montecarlo.realizations = 0\n")
    assert main(["image", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "montecarlo.realizations" in capsys.readouterr().err
    assert main(["stats", "--preset", "nope"]) == 2
    assert main(["stats", "--preset", "fig1", "--config", str(cfg)]) == 2
    assert main(["image", "--preset", "fig5", "--seed", "-1"]) == 2


def test_numerical_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "flat.toml"
    cfg.write_text('perturbation.kind = "boundary"\nperturbation.epsilon = 0.0\n')
    assert main(["stats", "--config", str(cfg), "--out", str(tmp_path)]) == 3
    assert "numerical error" in capsys.readouterr().err
