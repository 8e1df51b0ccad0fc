import dataclasses
import json

import numpy as np
import pytest

from brtomo.cli import main
from brtomo.experiment import (
    MODES,
    SUMMARY_HEADER,
    ExperimentConfig,
    ExperimentError,
    run_comparison,
    run_trial,
)
from brtomo.rays import RayKind, read_rays

TINY = ExperimentConfig(nx=16, ny=16, total_rays=400, n_transmitters=36, n_receivers=36,
                        n_hits=36, max_projections=40_000, trials=2, seed=11)


def test_config_defaults_match_desk_scale():
    c = ExperimentConfig()
    assert c.grid.pixel == 1 / 64 and c.grid.n_pixels == 4096
    assert c.total_rays == 12000 and c.trials == 10 and c.broken_fraction == 0.5
    assert c.phantom.center == (0.5, 0.5)
    assert c.step == pytest.approx(1 / 640)
    assert c.ray_counts() == (6000, 6000)
    assert c.replace(mode="art").ray_counts() == (0, 12000)


@pytest.mark.parametrize("bad", [dict(mode="sart"), dict(total_rays=0), dict(trials=0),
                                 dict(broken_fraction=1.5)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        ExperimentConfig(**bad)


def test_config_files(tmp_path):
    js = tmp_path / "c.json"
    js.write_text(json.dumps({"nx": 32, "outer_center": [0.5, 0.5], "mode": "art"}))
    c = ExperimentConfig.load(js)
    assert c.nx == 32 and c.mode == "art" and c.outer_center == (0.5, 0.5)
    kv = tmp_path / "c.cfg"
    kv.write_text("# desk run\nmode = brt_specular\ntotal_rays = 900\nK = 2e-3\n")
    c = ExperimentConfig.load(kv)
    assert (c.mode, c.total_rays, c.K) == ("brt_specular", 900, 2e-3)
    kv.write_text("bogus = 1\n")
    with pytest.raises(ValueError):
        ExperimentConfig.load(kv)


@pytest.mark.parametrize("mode", MODES)
def test_trial_deterministic(mode):
    cfg = TINY.replace(mode=mode)
    a, b = run_trial(cfg, 5), run_trial(cfg, 5)
    strip = lambda r: {k: v for k, v in dataclasses.asdict(r).items() if k != "wall_ms"}
    assert strip(a) == strip(b)
    assert a.error >= 0


def test_trial_ray_mix():
    report, art = run_trial(TINY.replace(mode="brt_lambertian"), 3, keep=True)
    kinds = [r.kind for r in art.rays]
    assert len(kinds) == TINY.total_rays
    assert kinds.count(RayKind.BROKEN) == 200
    # shuffled: broken rays are not all at the front
    assert RayKind.UNBROKEN in kinds[:200]


def test_generation_failure_is_explicit():
    cfg = TINY.replace(mode="art", n_transmitters=6, n_receivers=6, total_rays=500)
    with pytest.raises(ExperimentError, match="mode art, trial 0"):
        run_trial(cfg, 0)


def test_comparison_outputs(tmp_path):
    summary = run_comparison(TINY.replace(trials=1), MODES, out_dir=tmp_path)
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert lines[0] == SUMMARY_HEADER
    assert len(lines) == 1 + 3 * 2
    assert [l.split(",")[1] for l in lines[1:]] == ["1", "average"] * 3
    table = summary.table().splitlines()
    assert table[1].startswith("1, ")
    assert table[-1].startswith("Average, ")
    for mode in MODES:
        rays = read_rays(tmp_path / f"rays_{mode}_1.txt")
        assert len(rays) == TINY.total_rays
        assert (tmp_path / f"recon_{mode}_1.grid").exists()
        times = np.loadtxt(tmp_path / f"times_{mode}_1.txt")
        assert times.shape == (TINY.total_rays,)


def test_average_row_is_mean():
    summary = run_comparison(TINY.replace(trials=3), ["art", "brt_specular"])
    for mode in ("art", "brt_specular"):
        errs = [r.error for r in summary.for_mode(mode)]
        assert summary.mean_error(mode) == pytest.approx(sum(errs) / 3, abs=1e-12)
        assert [r.seed for r in summary.for_mode(mode)] == [11, 12, 13]
    avg = [l for l in summary.to_csv().splitlines() if l.startswith("art,average")][0]
    assert float(avg.split(",")[2]) == summary.mean_error("art")


def test_cli_compare(tmp_path, capsys):
    cfg = tmp_path / "tiny.json"
    cfg.write_text(json.dumps(dataclasses.asdict(TINY.replace(trials=1))))
    out = tmp_path / "out"
    rc = main(["compare", "--modes", "art,brt_lambertian", "--config", str(cfg),
               "--seed", "4", "--out-dir", str(out)])
    assert rc == 0
    assert "Average" in capsys.readouterr().out
    rows = (out / "summary.csv").read_text().splitlines()
    assert [r.split(",")[0] for r in rows[1:]] == ["art", "art", "brt_lambertian", "brt_lambertian"]


def test_cli_run_single_mode(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text("mode = brt_specular\nnx = 16\nny = 16\ntotal_rays = 300\nn_transmitters = 36\n"
                   "n_receivers = 36\nn_hits = 36\nmax_projections = 20000\ntrials = 1\n")
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "rays_brt_specular_1.txt").exists()


def test_cli_failure_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("mode = art\nn_transmitters = 6\nn_receivers = 6\ntotal_rays = 500\ntrials = 1\n")
    rc = main(["run", "--config", str(cfg), "--out-dir", str(tmp_path)])
    assert rc != 0
    assert "tomo: error:" in capsys.readouterr().err
