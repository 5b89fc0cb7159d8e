"""Figure-regeneration tests: each script runs on the committed sample CSVs,
exits 0, emits SVG+PNG+fits.json, and the fitted slopes reproduce the
experiment values bit-for-bit (shared fit code path)."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from fractalmix_plots import covertail, loglog, tvprofile

SAMPLES = Path(__file__).resolve().parents[1] / "sample_data"
SEED = 20250810
T_N_LEVEL4 = float(2 ** 4) ** (math.log(5) / math.log(2))


def fits_of(out_png: Path) -> dict:
    side = out_png.with_suffix("").with_name(out_png.stem + "_fits.json")
    return json.loads(side.read_text())


def outputs_exist(out_png: Path) -> bool:
    return (out_png.exists()
            and out_png.with_suffix(".svg").exists()
            and out_png.with_suffix("").with_name(out_png.stem + "_fits.json").exists())


class TestCovertail:
    def test_sample_data(self, tmp_path):
        out = tmp_path / "tail.png"
        rc = covertail.main([str(SAMPLES / "covertime.csv"), "-o", str(out),
                             "--t-n", repr(T_N_LEVEL4)])
        assert rc == 0 and outputs_exist(out)
        fits = fits_of(out)
        assert fits["c_0"] > 0 and 0 <= fits["r2"] <= 1

    def test_synthetic_exponential_slope(self, tmp_path):
        rng = np.random.default_rng(1)
        t_n = 50.0
        times = np.sort(rng.exponential(t_n, size=20000)).astype(int)
        csv = tmp_path / "covertime.csv"
        lines = ["# fractalmix test | {}", "sample_id,tau_cov,lazy_flag"]
        lines += [f"{i},{t},0" for i, t in enumerate(times)]
        csv.write_text("\n".join(lines) + "\n")
        out = tmp_path / "synth.png"
        assert covertail.main([str(csv), "-o", str(out), "--t-n", repr(t_n)]) == 0
        fits = fits_of(out)
        assert abs(fits["slope"] - (-1.0)) < 0.1
        assert fits["r2"] > 0.99

    def test_empty_csv_exits_2(self, tmp_path):
        csv = tmp_path / "covertime.csv"
        csv.write_text("")
        with pytest.raises(SystemExit) as exc:
            covertail.main([str(csv), "-o", str(tmp_path / "x.png"),
                            "--t-n", "1.0"])
        assert exc.value.code == 2

    def test_schema_mismatch_exits_2(self, tmp_path):
        csv = tmp_path / "covertime.csv"
        csv.write_text("a,b\n1,2\n")
        with pytest.raises(SystemExit) as exc:
            covertail.main([str(csv), "-o", str(tmp_path / "x.png"),
                            "--t-n", "1.0"])
        assert exc.value.code == 2


class TestLogLog:
    def test_volume_matches_experiment_fit(self, tmp_path):
        # same data + same code path as the level-7 volume-growth estimate
        out = tmp_path / "vol.png"
        assert loglog.main([str(SAMPLES / "volume.csv"), "-o", str(out)]) == 0
        slope = fits_of(out)["slope"]
        from fractalmix.generators import GasketSpec, build_gasket
        from fractalmix.graph import volume_growth_fit
        fresh = volume_growth_fit(build_gasket(GasketSpec(level=7)),
                                  samples=40, seed=SEED)
        assert abs(slope - fresh.d_f) <= 1e-9

    def test_resistance_matches_experiment_fit(self, tmp_path):
        out = tmp_path / "reff.png"
        assert loglog.main([str(SAMPLES / "resistance.csv"), "-o", str(out)]) == 0
        slope = fits_of(out)["slope"]
        from fractalmix.generators import GasketSpec, build_gasket
        from fractalmix.resistance import (laplacian_system,
                                           resistance_exponent_fit)
        (fresh, _), _ = resistance_exponent_fit(
            laplacian_system(build_gasket(GasketSpec(level=6))),
            samples=400, seed=SEED)
        assert abs(slope - fresh) <= 1e-9

    def test_deterministic_rerun(self, tmp_path):
        out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
        loglog.main([str(SAMPLES / "resistance.csv"), "-o", str(out1)])
        loglog.main([str(SAMPLES / "resistance.csv"), "-o", str(out2)])
        assert fits_of(out1)["slope"] == fits_of(out2)["slope"]

    def test_unknown_schema_exits_2(self, tmp_path):
        csv = tmp_path / "mystery.csv"
        csv.write_text("a,b\n1,2\n")
        with pytest.raises(SystemExit) as exc:
            loglog.main([str(csv), "-o", str(tmp_path / "x.png")])
        assert exc.value.code == 2


class TestTvProfile:
    def test_exact_profile(self, tmp_path):
        out = tmp_path / "tv.png"
        rc = tvprofile.main([str(SAMPLES / "tvprofile.csv"), "-o", str(out),
                             "--t-n", "4.0", "--half-cover", "4.0",
                             "--cover-mean", "8.0"])
        assert rc == 0 and outputs_exist(out)

    def test_complete_graph_panel(self, tmp_path):
        out = tmp_path / "panel.png"
        # x-axis normalized by the exact lazy mean cover times
        def lazy_cover(n):
            return 2 * (n - 1) * float(np.sum(1.0 / np.arange(1, n)))
        rc = tvprofile.main([
            str(SAMPLES / "tvprofile_complete_n64.csv"),
            str(SAMPLES / "tvprofile_complete_n128.csv"),
            "-o", str(out),
            "--scale", repr(lazy_cover(64)), repr(lazy_cover(128)),
        ])
        assert rc == 0 and outputs_exist(out)

    def test_schema_mismatch_exits_2(self, tmp_path):
        csv = tmp_path / "tvprofile.csv"
        csv.write_text("x\n1\n")
        with pytest.raises(SystemExit) as exc:
            tvprofile.main([str(csv), "-o", str(tmp_path / "x.png")])
        assert exc.value.code == 2
