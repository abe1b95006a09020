import numpy as np
import pytest

from fgest import bench, pngio
from fgest.cli import main
from fgest.closedform import CfParams
from fgest.imagecore import compose, compose_naive, solid_color
from fgest.metrics import evaluate, MetricReport, sad
from fgest.multilevel import ml_foreground_background
from fgest.synthetic import random_composite


@pytest.fixture
def scene(tmp_path):
    c = random_composite(48, 40, seed=11)
    paths = {name: tmp_path / f"{name}.png" for name in ("image", "alpha", "fg", "bg")}
    pngio.write_png(paths["image"], c.image)
    pngio.write_png(paths["alpha"], c.alpha)
    pngio.write_png(paths["fg"], c.fg)
    pngio.write_png(paths["bg"], c.bg)
    return tmp_path, paths


def run(argv):
    return main([str(a) for a in argv])


class TestEstimate:
    def test_multilevel_smoke(self, scene, capsys):
        tmp, p = scene
        out = tmp / "out_fg.png"
        out_bg = tmp / "out_bg.png"
        assert run(["estimate", "--image", p["image"], "--alpha", p["alpha"],
                    "--out-fg", out, "--out-bg", out_bg, "--method", "multilevel"]) == 0
        fg = pngio.read_image(out)
        assert fg.shape == (40, 48, 3)
        assert pngio.read_image(out_bg).shape == (40, 48, 3)
        assert "wall_time_s=" in capsys.readouterr().out

    def test_matches_library(self, scene):
        tmp, p = scene
        out = tmp / "o.png"
        run(["estimate", "--image", p["image"], "--alpha", p["alpha"], "--out-fg", out])
        image, alpha = pngio.read_image(p["image"]), pngio.read_alpha(p["alpha"])
        fg, _ = ml_foreground_background(image, alpha)
        np.testing.assert_array_equal(pngio.read_png(out), pngio.quantize(fg, 16) / 65535)

    def test_closedform_reports_residual(self, tmp_path, capsys):
        c = random_composite(64, 64, seed=1)
        pngio.write_png(tmp_path / "i.png", c.image)
        pngio.write_png(tmp_path / "a.png", c.alpha)
        assert run(["estimate", "--image", tmp_path / "i.png", "--alpha", tmp_path / "a.png",
                    "--out-fg", tmp_path / "f.png", "--method", "closedform",
                    "--residual-tol", "1e-6"]) == 0
        out = capsys.readouterr().out
        line = next(l for l in out.splitlines() if l.startswith("final_residual="))
        residuals = [float(v) for v in line.split("=")[1].split(",")]
        assert len(residuals) == 3 and max(residuals) < 1e-6

    def test_mismatched_sizes(self, tmp_path, capsys):
        pngio.write_png(tmp_path / "i.png", np.zeros((10, 12, 3)))
        pngio.write_png(tmp_path / "a.png", np.zeros((11, 12)))
        code = run(["estimate", "--image", tmp_path / "i.png", "--alpha", tmp_path / "a.png",
                    "--out-fg", tmp_path / "f.png"])
        err = capsys.readouterr().err
        assert code == 1
        assert "12x10" in err and "12x11" in err

    def test_missing_file_is_io_error(self, tmp_path):
        assert run(["estimate", "--image", tmp_path / "nope.png", "--alpha", tmp_path / "a.png",
                    "--out-fg", tmp_path / "f.png"]) == 2

    def test_usage_errors(self, scene):
        tmp, p = scene
        with pytest.raises(SystemExit) as info:
            run(["estimate", "--image", p["image"]])
        assert info.value.code == 1
        with pytest.raises(SystemExit) as info:
            run(["estimate", "--image", p["image"], "--alpha", p["alpha"], "--out-fg", tmp / "x.png",
                 "--eps-r", "-1"])
        assert info.value.code == 1

    def test_solver_failure_exit_code(self, scene, monkeypatch):
        tmp, p = scene
        import fgest.cli as cli

        def failing(*args, **kwargs):
            raise np.linalg.LinAlgError("boom")

        monkeypatch.setattr(cli, "ml_foreground_background", failing)
        assert run(["estimate", "--image", p["image"], "--alpha", p["alpha"],
                    "--out-fg", tmp / "x.png"]) == 3

    def test_alpha_from_rgba(self, tmp_path):
        import png
        c = random_composite(16, 12, seed=2)
        rgba = np.concatenate([c.image, c.alpha[..., None]], axis=2)
        q = pngio.quantize(rgba, 8).reshape(12, 64)
        png.from_array(q.tolist(), "RGBA").save(str(tmp_path / "rgba.png"))
        assert run(["estimate", "--image", tmp_path / "rgba.png", "--alpha", tmp_path / "rgba.png",
                    "--alpha-source", "alpha-channel", "--out-fg", tmp_path / "f.png",
                    "--bitdepth", "8"]) == 0


class TestCompose:
    def test_white_background_opaque(self, scene, tmp_path):
        _, p = scene
        pngio.write_png(tmp_path / "ones.png", np.ones((40, 48)))
        out = tmp_path / "c.png"
        assert run(["compose", "--fg", p["fg"], "--alpha", tmp_path / "ones.png",
                    "--bg-color", "1,1,1", "--out", out]) == 0
        np.testing.assert_array_equal(pngio.read_png(out), pngio.read_png(p["fg"]))

    def test_naive_flag(self, scene):
        tmp, p = scene
        out = tmp / "naive.png"
        assert run(["compose", "--image", p["image"], "--alpha", p["alpha"], "--bg", p["bg"],
                    "--out", out, "--naive"]) == 0
        image, alpha, bg = (pngio.read_image(p["image"]), pngio.read_alpha(p["alpha"]),
                            pngio.read_image(p["bg"]))
        expected = pngio.quantize(compose_naive(image, bg, alpha), 16) / 65535
        np.testing.assert_array_equal(pngio.read_png(out), expected)

    def test_estimated_beats_naive(self, tmp_path):
        c = random_composite(64, 64, seed=6)
        for name, arr in (("i", c.image), ("a", c.alpha)):
            pngio.write_png(tmp_path / f"{name}.png", arr)
        run(["estimate", "--image", tmp_path / "i.png", "--alpha", tmp_path / "a.png",
             "--out-fg", tmp_path / "f.png"])
        run(["compose", "--fg", tmp_path / "f.png", "--alpha", tmp_path / "a.png",
             "--bg-color", "1,1,1", "--out", tmp_path / "good.png"])
        run(["compose", "--image", tmp_path / "i.png", "--alpha", tmp_path / "a.png",
             "--bg-color", "1,1,1", "--out", tmp_path / "naive.png", "--naive"])
        alpha = pngio.read_alpha(tmp_path / "a.png")
        truth = compose(c.fg, solid_color(64, 64, (1, 1, 1)), alpha)
        good = sad(pngio.read_image(tmp_path / "good.png"), truth, alpha)
        naive = sad(pngio.read_image(tmp_path / "naive.png"), truth, alpha)
        assert good < naive

    def test_bad_color(self, scene):
        _, p = scene
        with pytest.raises(SystemExit) as info:
            run(["compose", "--fg", p["fg"], "--alpha", p["alpha"], "--bg-color", "1,2", "--out", "x.png"])
        assert info.value.code == 1


class TestMetrics:
    def test_identical_inputs(self, scene, capsys):
        _, p = scene
        assert run(["metrics", "--est", p["fg"], "--gt", p["fg"], "--alpha", p["alpha"]]) == 0
        row = capsys.readouterr().out.strip().splitlines()[-1]
        report = MetricReport.from_csv_row(row)
        assert report.sad == report.mse == report.grad == 0

    def test_matches_library(self, scene, capsys):
        tmp, p = scene
        csv_path = tmp / "m.csv"
        assert run(["metrics", "--est", p["image"], "--gt", p["fg"], "--alpha", p["alpha"],
                    "--csv", csv_path]) == 0
        expected = evaluate(pngio.read_image(p["image"]), pngio.read_image(p["fg"]),
                            pngio.read_alpha(p["alpha"]))
        header, row = csv_path.read_text().strip().splitlines()
        assert header == "sad,mse,grad,translucent_pixel_count"
        assert MetricReport.from_csv_row(row) == expected
        assert capsys.readouterr().out.strip().splitlines()[-1] == expected.csv_row()

    def test_missing_file(self, scene):
        tmp, p = scene
        assert run(["metrics", "--est", tmp / "missing.png", "--gt", p["fg"], "--alpha", p["alpha"]]) != 0


class TestPrepDataset:
    def test_writes_outputs(self, tmp_path, capsys, rng):
        img_lin = 0.02 + 0.8 * rng.random((8, 9, 3))
        fg_lin = 0.02 + 0.8 * rng.random((8, 9, 3))
        from fgest.colorspace import linear_to_srgb
        for name, arr in (("fl", fg_lin), ("il", img_lin), ("is", linear_to_srgb(img_lin))):
            pngio.write_png(tmp_path / f"{name}.png", arr)
        assert run(["prep-dataset", "--fg-linear", tmp_path / "fl.png", "--img-linear", tmp_path / "il.png",
                    "--img-srgb", tmp_path / "is.png", "--out-fg", tmp_path / "of.png",
                    "--out-img", tmp_path / "oi.png"]) == 0
        out = capsys.readouterr().out
        assert "white point matrix" in out and "residual=" in out
        assert pngio.read_png(tmp_path / "of.png").shape == (8, 9, 3)


class TestBench:
    def test_csv_rows(self, scene, capsys):
        tmp, p = scene
        csv_path = tmp / "bench.csv"
        assert run(["bench", "--image", p["image"], "--alpha", p["alpha"],
                    "--methods", "multilevel,closedform", "--sizes", "0.001,0.004",
                    "--reps", "2", "--csv", csv_path, "--cf-max-megapixels", "0.002"]) == 0
        records = bench.read_csv(csv_path)
        assert [(r.method, r.status) for r in records] == [
            ("multilevel", "ok"), ("closedform", "ok"),
            ("multilevel", "ok"), ("closedform", "skipped"),
        ]
        for r in records:
            if r.status == "ok":
                assert r.wall_time_s > 0 and r.repetitions == 2
            else:
                assert r.wall_time_s is None and "memory guard" in r.note

    def test_unknown_method(self, scene):
        _, p = scene
        assert run(["bench", "--image", p["image"], "--alpha", p["alpha"], "--methods", "knn"]) == 1

    def test_deterministic_outputs(self, scene):
        tmp, p = scene
        for k in range(2):
            run(["estimate", "--image", p["image"], "--alpha", p["alpha"],
                 "--out-fg", tmp / f"d{k}.png", "--method", "closedform"])
        assert (tmp / "d0.png").read_bytes() == (tmp / "d1.png").read_bytes()
