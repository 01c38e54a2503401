import numpy as np
import pytest
from click.testing import CliRunner

from xraysegkit.cli import main
from xraysegkit.imageio import load_image, save_image
from xraysegkit.labels import parse_label_file
from xraysegkit.rasterize import rasterize_polygon

from conftest import disk_image

CLASSES = ["carpal", "fracture", "metacarpal", "phalanx", "radius", "ulna"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def xray(tmp_path):
    rng = np.random.default_rng(11)
    img = rng.integers(0, 256, size=(48, 64), dtype=np.uint8).astype(np.uint8)
    path = tmp_path / "in.png"
    save_image(img, path)
    return path


def _make_dataset(tmp_path, n_images=2, with_labels=True):
    images = tmp_path / "images"
    labels = tmp_path / "labels"
    images.mkdir(exist_ok=True)
    labels.mkdir(exist_ok=True)
    rng = np.random.default_rng(3)
    for i in range(n_images):
        save_image(
            rng.integers(0, 256, size=(32, 32), dtype=np.uint8).astype(np.uint8),
            images / f"im{i}.png",
        )
        if with_labels:
            (labels / f"im{i}.txt").write_text(
                f"{i % 6} 0.2 0.2 0.7 0.2 0.7 0.7 0.2 0.7\n"
            )
    descriptor = tmp_path / "dataset.txt"
    lines = [f"class {i} {n}" for i, n in enumerate(CLASSES)]
    lines += ["images_dir images", "labels_dir labels"]
    descriptor.write_text("\n".join(lines) + "\n")
    return descriptor


class TestSegment:
    def test_fixed_threshold_demo_flags(self, runner, xray, tmp_path):
        out = tmp_path / "out.png"
        result = runner.invoke(main, ["segment", "--method", "fixed", "--t", "177", str(xray), str(out)])
        assert result.exit_code == 0, result.output
        mask = load_image(out)
        src = load_image(xray)
        assert np.array_equal(mask > 0, src > 177)

    def test_region_grow_demo_flags(self, runner, tmp_path):
        img = disk_image(64, 32, 32, 20, 180, 40)
        src = tmp_path / "disk.png"
        save_image(img, src)
        out = tmp_path / "out.png"
        result = runner.invoke(
            main,
            ["segment", "--method", "region-grow", "--seed", "32,32", "--tau", "60", str(src), str(out)],
        )
        assert result.exit_code == 0, result.output
        mask = load_image(out) > 0
        assert mask[32, 32]
        assert not mask[0, 0]

    def test_unknown_method_usage_error(self, runner, xray, tmp_path):
        result = runner.invoke(main, ["segment", "--method", "sorcery", str(xray), str(tmp_path / "o.png")])
        assert result.exit_code == 2
        assert "Usage" in result.output or "Invalid value" in result.output

    def test_missing_input_io_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["segment", "--method", "fixed", str(tmp_path / "nope.png"), str(tmp_path / "o.png")]
        )
        assert result.exit_code == 2  # click validates path existence as usage

    def test_corrupt_input_exit_1(self, runner, tmp_path):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"definitely not a png")
        result = runner.invoke(main, ["segment", "--method", "fixed", str(bad), str(tmp_path / "o.png")])
        assert result.exit_code == 1

    def test_overlay_written(self, runner, xray, tmp_path):
        out = tmp_path / "mask.png"
        result = runner.invoke(
            main, ["segment", "--method", "fixed", "--overlay", str(xray), str(out)]
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "mask_overlay.png").exists()

    def test_directory_batch(self, runner, tmp_path):
        src = tmp_path / "batch"
        src.mkdir()
        rng = np.random.default_rng(2)
        for i in range(3):
            save_image(
                rng.integers(0, 256, size=(16, 16), dtype=np.uint8).astype(np.uint8),
                src / f"f{i}.png",
            )
        out = tmp_path / "masks"
        result = runner.invoke(
            main, ["segment", "--method", "otsu", "--jobs", "2", str(src), str(out)]
        )
        assert result.exit_code == 0, result.output
        assert sorted(p.name for p in out.iterdir()) == ["f0.png", "f1.png", "f2.png"]

    def test_help_lists_demo_defaults(self, runner):
        result = runner.invoke(main, ["segment", "--help"])
        assert result.exit_code == 0
        assert "177" in result.output
        assert "60" in result.output


class TestLabels:
    def test_validate_ok(self, runner, tmp_path):
        descriptor = _make_dataset(tmp_path)
        result = runner.invoke(main, ["labels", "validate", str(descriptor)])
        assert result.exit_code == 0
        assert "OK, 2 images, 2 instances" in result.output

    def test_validate_bad_coordinate(self, runner, tmp_path):
        descriptor = _make_dataset(tmp_path)
        (tmp_path / "labels" / "im0.txt").write_text("0 0.1 0.2 1.2 0.4 0.5 0.6\n")
        result = runner.invoke(main, ["labels", "validate", str(descriptor)])
        assert result.exit_code == 1
        assert "im0.txt" in result.output
        assert "line 1" in result.output

    def test_rasterize_writes_class_masks(self, runner, tmp_path):
        descriptor = _make_dataset(tmp_path)
        out = tmp_path / "masks"
        result = runner.invoke(main, ["labels", "rasterize", str(descriptor), "im0", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "im0_carpal.png").exists()

    def test_trace_round_trip(self, runner, tmp_path):
        poly = ((0.2, 0.2), (0.8, 0.2), (0.8, 0.7), (0.2, 0.7))
        mask = rasterize_polygon(poly, 64, 64)
        mask_path = tmp_path / "m.png"
        save_image(mask, mask_path)
        out_path = tmp_path / "label.txt"
        result = runner.invoke(
            main, ["labels", "trace", str(mask_path), "--class", "3", "--out", str(out_path)]
        )
        assert result.exit_code == 0, result.output
        annots = parse_label_file(out_path.read_text(), 6)
        assert annots[0].class_id == 3
        again = rasterize_polygon(annots[0], 64, 64)
        inter = (again & mask).sum()
        union = (again | mask).sum()
        assert inter / union >= 0.99


class TestEval:
    def test_perfect_predictions(self, runner, tmp_path):
        descriptor = _make_dataset(tmp_path)
        preds = tmp_path / "preds"
        preds.mkdir()
        for i in range(2):
            text = (tmp_path / "labels" / f"im{i}.txt").read_text()
            lines = []
            for line in text.splitlines():
                parts = line.split()
                lines.append(" ".join([parts[0], "1.000000", *parts[1:]]))
            (preds / f"im{i}.txt").write_text("\n".join(lines) + "\n")
        out = tmp_path / "report"
        result = runner.invoke(
            main,
            ["eval", "--dataset", str(descriptor), "--preds", str(preds), "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert (out / "report.csv").exists()
        all_line = [l for l in result.output.splitlines() if l.startswith("all")][0]
        values = all_line.split()
        assert float(values[3]) == 1.0  # Box P
        assert float(values[5]) == 1.0  # Box mAP50

    def test_empty_preds_dir_warns(self, runner, tmp_path):
        descriptor = _make_dataset(tmp_path)
        preds = tmp_path / "preds"
        preds.mkdir()
        out = tmp_path / "report"
        result = runner.invoke(
            main, ["eval", "--dataset", str(descriptor), "--preds", str(preds), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert result.output.count("warning:") == 2
        all_line = [l for l in result.output.splitlines() if l.startswith("all")][0]
        assert float(all_line.split()[4]) == 0.0  # recall 0

    def test_malformed_prediction_fatal(self, runner, tmp_path):
        descriptor = _make_dataset(tmp_path)
        preds = tmp_path / "preds"
        preds.mkdir()
        (preds / "im0.txt").write_text("0 2.0 0 0 1 0 1 1\n")
        result = runner.invoke(
            main,
            ["eval", "--dataset", str(descriptor), "--preds", str(preds), "--out", str(tmp_path / "r")],
        )
        assert result.exit_code == 1
        assert "im0.txt" in result.output
