import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windcomfort.errors import AllPixelsExcluded, ShapeMismatch
from windcomfort.metrics import (
    MetricReport,
    cross_evaluate,
    evaluate,
    mae,
    mre,
    residual_map,
    rmse,
)
from windcomfort.raster import FieldGrid


def random_pair(seed, n=16):
    rng = np.random.default_rng(seed)
    y = rng.random((n, n))
    y_hat = y + rng.normal(0, 0.1, (n, n))
    return y, y_hat


class TestPointwiseMetrics:
    def test_exact_prediction_zero(self):
        y = np.random.default_rng(0).random((8, 8))
        assert mae(y, y) == 0.0
        assert rmse(y, y) == 0.0
        assert mre(y, y, 0.05) == 0.0

    def test_hand_derived_values(self):
        assert mae([0.0, 1.0], [1.0, 1.0]) == pytest.approx(0.5, abs=1e-9)
        assert rmse([0.0, 1.0], [1.0, 1.0]) == pytest.approx(np.sqrt(0.5), abs=1e-9)
        assert mre([1.0, 2.0], [1.1, 1.8], 0.05) == pytest.approx(0.1, abs=1e-9)

    def test_constant_offset_mae(self):
        y = np.random.default_rng(1).random(32)
        assert mae(y, y + 0.3) == pytest.approx(0.3, rel=1e-9)

    def test_zero_pixel_excluded_not_infinite(self):
        value = mre([0.0, 2.0], [1.0, 1.0], eps=0.05)
        assert value == pytest.approx(0.5)

    def test_all_pixels_excluded_raises(self):
        with pytest.raises(AllPixelsExcluded):
            mre([0.0, 0.0], [1.0, 1.0], eps=0.05)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ShapeMismatch):
            mae(np.zeros(3), np.zeros(4))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 25 - 1))
    def test_rmse_dominates_mae(self, seed):
        y, y_hat = random_pair(seed)
        assert rmse(y, y_hat) >= mae(y, y_hat)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 25 - 1))
    def test_permutation_invariance_and_symmetry(self, seed):
        y, y_hat = random_pair(seed, n=6)
        rng = np.random.default_rng(seed + 1)
        perm = rng.permutation(y.size)
        assert mae(y, y_hat) == pytest.approx(
            mae(y.ravel()[perm], y_hat.ravel()[perm]), rel=1e-12)
        assert mae(y, y_hat) == pytest.approx(mae(y_hat, y), rel=1e-12)
        assert rmse(y, y_hat) == pytest.approx(rmse(y_hat, y), rel=1e-12)

    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    def test_scale_law(self, c):
        y, y_hat = random_pair(7)
        y += 0.2  # keep everything above the epsilon floor
        assert mae(c * y, c * y_hat) == pytest.approx(c * mae(y, y_hat), rel=1e-9)
        assert rmse(c * y, c * y_hat) == pytest.approx(c * rmse(y, y_hat), rel=1e-9)
        assert mre(c * y, c * y_hat, 0.01 * c) == pytest.approx(
            mre(y, y_hat, 0.01), rel=1e-9)


class TestResidualMap:
    def test_zero_for_identical(self):
        g = FieldGrid(np.random.default_rng(0).random((8, 8)).astype(np.float32),
                      ("velocity",), 8.0)
        out = residual_map(g, g)
        assert np.all(out.values == 0.0)

    def test_mean_equals_mae(self):
        rng = np.random.default_rng(1)
        a = FieldGrid(rng.random((8, 8)).astype(np.float32), ("velocity",), 8.0)
        b = FieldGrid(rng.random((8, 8)).astype(np.float32), ("velocity",), 8.0)
        out = residual_map(a, b)
        assert out.meta["mean_abs"] == pytest.approx(mae(a.values, b.values), rel=1e-6)

    def test_png_export_dimensions(self, tmp_path):
        from PIL import Image

        from windcomfort.render import save_png

        rng = np.random.default_rng(2)
        a = FieldGrid(rng.random((12, 10)).astype(np.float32), ("velocity",), 8.0)
        b = FieldGrid(rng.random((12, 10)).astype(np.float32), ("velocity",), 8.0)
        out = residual_map(a, b)
        save_png(tmp_path / "r.png", out.channel("velocity"))
        with Image.open(tmp_path / "r.png") as img:
            assert img.size == (10, 12)


class TestEvaluate:
    def test_oracle_as_prediction_scores_zero(self, desk_dataset, unet_checkpoint):
        manifest, samples, _ = desk_dataset
        # Feeding the targets back as predictions is the degenerate best case.
        _, test_idx = manifest.split()
        y = np.stack([samples[i].flow.channel("velocity") for i in test_idx])
        assert mae(y, y) == 0.0 and rmse(y, y) == 0.0

    def test_deterministic_reports(self, desk_dataset, unet_checkpoint):
        manifest, samples, _ = desk_dataset
        ckpt, _ = unet_checkpoint
        r1 = evaluate(ckpt, manifest, samples)
        r2 = evaluate(ckpt, manifest, samples)
        assert r1.to_json_dict() == r2.to_json_dict()

    def test_trained_beats_untrained_on_train_split(self, desk_dataset,
                                                    unet_checkpoint):
        from windcomfort.nets import GeneratorSpec, build_generator
        from windcomfort.training import Checkpoint

        manifest, samples, _ = desk_dataset
        trained, _ = unet_checkpoint
        spec = trained.gen_spec
        fresh = Checkpoint("unet", 0, spec,
                           {"G": build_generator(spec, seed=321)}, trained.norm)
        r_trained = evaluate(trained, manifest, samples, split="train")
        r_fresh = evaluate(fresh, manifest, samples, split="train")
        assert r_trained.mae <= r_fresh.mae * 0.5

    def test_multi_seed_aggregation(self, desk_dataset, unet_checkpoint):
        manifest, samples, _ = desk_dataset
        ckpt, _ = unet_checkpoint
        report = evaluate([ckpt, ckpt], manifest, samples)
        assert report.seeds == 2
        assert report.std["mae"] == 0.0
        assert len(report.per_seed["mae"]) == 2

    def test_report_invariant_rmse_ge_mae(self, desk_dataset, unet_checkpoint):
        manifest, samples, _ = desk_dataset
        ckpt, _ = unet_checkpoint
        report = evaluate(ckpt, manifest, samples)
        assert report.rmse >= report.mae >= 0.0
        assert report.mre >= 0.0

    def test_cross_evaluate_labels_families(self, desk_dataset, unet_checkpoint):
        manifest, samples, _ = desk_dataset
        ckpt, _ = unet_checkpoint
        report = cross_evaluate(ckpt, manifest, samples)
        assert report.source_family == "two"
        assert report.target_family == "two"

    def test_report_writes_json(self, desk_dataset, unet_checkpoint, tmp_path):
        import json

        manifest, samples, _ = desk_dataset
        ckpt, _ = unet_checkpoint
        report = evaluate(ckpt, manifest, samples)
        report.write(tmp_path / "metrics.json")
        parsed = json.loads((tmp_path / "metrics.json").read_text())
        assert {"mae", "rmse", "mre"} <= set(parsed)
