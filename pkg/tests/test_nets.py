import numpy as np
import pytest
import torch

from oracles import largest_singular_value
from windcomfort.errors import ShapeError
from windcomfort.nets import (
    Cbam,
    DiscriminatorSpec,
    GeneratorSpec,
    SelfAttention,
    SpectralNorm,
    build_discriminator,
    build_generator,
    coord_maps,
    param_count,
    spectral_normalize,
)
from windcomfort.raster import coord_channels


class TestParamCounts:
    def test_unet_generator(self):
        g = build_generator(GeneratorSpec(family="unet", in_channels=1))
        assert abs(param_count(g) - 54.4e6) / 54.4e6 <= 0.02

    def test_patch_discriminator(self):
        d = build_discriminator(DiscriminatorSpec(in_channels=2))
        assert abs(param_count(d) - 2.7e6) / 2.7e6 <= 0.05

    def test_resnet_generator(self):
        g = build_generator(GeneratorSpec(family="resnet9", in_channels=1))
        assert abs(param_count(g) - 11.4e6) / 11.4e6 <= 0.05

    def test_empty_model_counts_zero(self):
        assert param_count(torch.nn.Sequential()) == 0


class TestShapes:
    @pytest.mark.parametrize("hw,depth", [(64, 6), (128, 7), (256, 8)])
    def test_generator_maps_to_single_channel(self, hw, depth):
        g = build_generator(GeneratorSpec(family="unet", in_channels=1,
                                          depth=depth), seed=1)
        g.eval()
        with torch.no_grad():
            out = g(torch.randn(1, 1, hw, hw))
        assert tuple(out.shape) == (1, 1, hw, hw)
        assert float(out.abs().max()) <= 1.0

    def test_discriminator_patch_grid_30(self):
        d = build_discriminator(DiscriminatorSpec(in_channels=2))
        with torch.no_grad():
            out = d(torch.randn(1, 2, 256, 256))
        assert tuple(out.shape) == (1, 1, 30, 30)

    def test_incompatible_size_raises(self):
        g = build_generator(GeneratorSpec(family="unet", in_channels=1, depth=8))
        with pytest.raises(ShapeError):
            g(torch.randn(1, 1, 100, 100))

    def test_coordconv_adds_channels_internally(self):
        g = build_generator(GeneratorSpec(family="unet", in_channels=1, depth=4,
                                          base_filters=8, coordconv_first=True),
                            seed=2)
        g.eval()
        with torch.no_grad():
            out = g(torch.randn(1, 1, 32, 32))
        assert tuple(out.shape) == (1, 1, 32, 32)

    def test_build_determinism(self):
        spec = GeneratorSpec(family="unet", in_channels=1, depth=4, base_filters=8)
        a = build_generator(spec, seed=5)
        b = build_generator(spec, seed=5)
        for pa, pb in zip(a.state_dict().values(), b.state_dict().values()):
            assert torch.equal(pa, pb)
        c = build_generator(spec, seed=6)
        assert any(not torch.equal(pa, pc) for pa, pc in
                   zip(a.state_dict().values(), c.state_dict().values()))


class TestSpectralNorm:
    def test_isotropic_weight_normalizes_to_identity(self):
        w = 2.0 * torch.eye(3, dtype=torch.float64)
        u = torch.tensor([1.0, 0.0, 0.0], dtype=torch.float64)
        for _ in range(30):
            w_bar, u, sigma = spectral_normalize(w, u)
        assert float(sigma) == pytest.approx(2.0, rel=1e-6)
        assert torch.allclose(w_bar, torch.eye(3, dtype=torch.float64))

    def test_sigma_matches_eigen_oracle(self):
        rng = np.random.default_rng(0)
        w_np = rng.standard_normal((4, 6))
        w = torch.tensor(w_np)
        u = torch.tensor(rng.standard_normal(4))
        u = u / u.norm()
        for _ in range(200):
            _, u, sigma = spectral_normalize(w, u)
        assert abs(float(sigma) - largest_singular_value(w_np)) \
            <= 1e-3 * largest_singular_value(w_np)

    def test_normalized_weight_has_unit_norm(self):
        rng = np.random.default_rng(1)
        w = torch.tensor(rng.standard_normal((16, 9)))
        u = torch.tensor(rng.standard_normal(16))
        u = u / u.norm()
        for _ in range(300):
            w_bar, u, _ = spectral_normalize(w, u)
        assert largest_singular_value(w_bar.numpy()) == pytest.approx(1.0, abs=1e-3)

    def test_sigma_estimates_non_decreasing(self):
        rng = np.random.default_rng(2)
        w = torch.tensor(rng.standard_normal((12, 12)))
        u = torch.tensor(rng.standard_normal(12))
        u = u / u.norm()
        sigmas = []
        for _ in range(100):
            _, u, sigma = spectral_normalize(w, u)
            sigmas.append(float(sigma))
        assert all(b >= a - 1e-12 for a, b in zip(sigmas, sigmas[1:]))

    def test_module_updates_u_only_in_training(self):
        conv = torch.nn.Conv2d(3, 8, 3, padding=1)
        sn = SpectralNorm(conv)
        x = torch.randn(1, 3, 8, 8)
        sn.train()
        u0 = sn.u.clone()
        sn(x)
        assert not torch.equal(sn.u, u0)
        sn.eval()
        u1 = sn.u.clone()
        sn(x)
        assert torch.equal(sn.u, u1)

    def test_every_disc_conv_wrapped_when_enabled(self):
        d = build_discriminator(DiscriminatorSpec(in_channels=2, spectral_norm=True))
        assert sum(isinstance(m, SpectralNorm) for m in d.modules()) == 5
        plain = build_discriminator(DiscriminatorSpec(in_channels=2))
        assert sum(isinstance(m, SpectralNorm) for m in plain.modules()) == 0


class TestSelfAttention:
    def test_identity_at_init(self):
        attn = SelfAttention(16)
        x = torch.randn(2, 16, 12, 12)
        assert torch.equal(attn(x), x)

    def test_shape_preserved_after_training_steps(self):
        attn = SelfAttention(16)
        with torch.no_grad():
            attn.gamma.fill_(0.7)
        x = torch.randn(2, 16, 9, 11)
        assert attn(x).shape == x.shape

    def test_attention_rows_sum_to_one(self):
        attn = SelfAttention(8)
        w = attn.attention_weights(torch.randn(1, 8, 6, 6))
        assert torch.allclose(w.sum(-1), torch.ones_like(w.sum(-1)), atol=1e-6)

    def test_channels_not_divisible_by_8_rejected(self):
        with pytest.raises(ShapeError):
            SelfAttention(12)


class TestCbam:
    def test_unit_gates_recover_input(self, monkeypatch):
        cbam = Cbam(16)
        x = torch.randn(2, 16, 10, 10)
        monkeypatch.setattr(cbam, "channel_gate",
                            lambda t: torch.ones(t.shape[0], t.shape[1], 1, 1))
        monkeypatch.setattr(cbam, "spatial_gate",
                            lambda t: torch.ones(t.shape[0], 1, *t.shape[2:]))
        assert torch.equal(cbam(x), x)

    def test_gate_shapes(self):
        cbam = Cbam(32)
        x = torch.randn(3, 32, 7, 9)
        assert tuple(cbam.channel_gate(x).shape) == (3, 32, 1, 1)
        assert tuple(cbam.spatial_gate(x).shape) == (3, 1, 7, 9)

    def test_gates_bounded_in_unit_interval(self):
        cbam = Cbam(8)
        x = torch.randn(4, 8, 6, 6) * 10
        with torch.no_grad():
            for gate in (cbam.channel_gate(x), cbam.spatial_gate(x)):
                assert float(gate.min()) > 0.0
                assert float(gate.max()) < 1.0

    def test_output_shape_equals_input(self):
        cbam = Cbam(8)
        x = torch.randn(1, 8, 14, 14)
        assert cbam(x).shape == x.shape


class TestCoordMaps:
    def test_matches_raster_coord_channels(self):
        torch_maps = coord_maps(7, 5).numpy()
        grid = coord_channels(7, 5)
        assert np.allclose(torch_maps[0], grid.channel("coord_i"))
        assert np.allclose(torch_maps[1], grid.channel("coord_j"))
