import math

import pytest
import torch

from windcomfort.errors import ShapeMismatch
from windcomfort.losses import (
    LossReport,
    adv_loss,
    cycle_loss,
    l1_loss,
    lsgan_loss,
    pix2pix_objective,
)


def logits_for_prob(p, shape=(1, 1, 4, 4)):
    return torch.full(shape, math.log(p / (1.0 - p)), dtype=torch.float64)


class TestAdvLoss:
    def test_half_probability_gives_half_ln2(self):
        # BCE at p=0.5 is ln 2 on both halves; averaging then halving gives
        # ln(2)/2 ~ 0.3466.
        d = logits_for_prob(0.5)
        loss_d, _ = adv_loss(d, d)
        assert float(loss_d) == pytest.approx(0.5 * math.log(2.0), rel=1e-9)

    def test_perfect_discriminator_loss_vanishes(self):
        loss_d, _ = adv_loss(logits_for_prob(1 - 1e-12), logits_for_prob(1e-12))
        assert float(loss_d) == pytest.approx(0.0, abs=1e-9)

    def test_generator_loss_zero_when_fooled(self):
        _, loss_g = adv_loss(logits_for_prob(0.5), logits_for_prob(1 - 1e-12))
        assert float(loss_g) == pytest.approx(0.0, abs=1e-9)

    def test_halving_rule_recomputable(self):
        torch.manual_seed(0)
        real = torch.randn(1, 1, 5, 5)
        fake = torch.randn(1, 1, 5, 5)
        loss_d, _ = adv_loss(real, fake)
        bce = torch.nn.functional.binary_cross_entropy_with_logits
        raw_avg = (bce(real, torch.ones_like(real))
                   + bce(fake, torch.zeros_like(fake))) / 2.0
        assert float(loss_d) == pytest.approx(0.5 * float(raw_avg), rel=1e-7)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ShapeMismatch):
            adv_loss(torch.zeros(1, 1, 4, 4), torch.zeros(1, 1, 5, 5))


class TestL1:
    def test_identical_inputs_zero(self):
        x = torch.randn(2, 1, 4, 4)
        assert float(l1_loss(x, x)) == 0.0

    def test_constant_offset(self):
        x = torch.zeros(1, 1, 3, 3)
        assert float(l1_loss(x + 0.7, x)) == pytest.approx(0.7, rel=1e-6)

    def test_hand_value(self):
        pred = torch.tensor([0.0, 1.0])
        target = torch.tensor([1.0, 1.0])
        assert float(l1_loss(pred, target)) == pytest.approx(0.5)

    def test_nonnegative_and_zero_iff_equal(self):
        a = torch.randn(3, 3)
        b = a.clone()
        b[0, 0] += 1e-3
        assert float(l1_loss(a, b)) > 0.0


class TestPix2PixObjective:
    def test_arithmetic(self):
        total = pix2pix_objective(torch.tensor(0.0), torch.tensor(0.01), 100.0)
        assert float(total) == pytest.approx(1.0)

    def test_lambda_zero_degenerates_to_adv(self):
        total = pix2pix_objective(torch.tensor(0.3), torch.tensor(5.0), 0.0)
        assert float(total) == pytest.approx(0.3)

    def test_default_lambda_is_100(self):
        total = pix2pix_objective(torch.tensor(0.0), torch.tensor(1.0))
        assert float(total) == pytest.approx(100.0)

    def test_affine_in_l1_with_slope_lambda(self):
        lam = 37.5
        at0 = float(pix2pix_objective(torch.tensor(0.2), torch.tensor(0.0), lam))
        at1 = float(pix2pix_objective(torch.tensor(0.2), torch.tensor(1.0), lam))
        assert at1 - at0 == pytest.approx(lam)


class TestLsgan:
    def test_exact_label_zero_loss(self):
        assert float(lsgan_loss(torch.ones(4, 4), 1.0)) == 0.0
        assert float(lsgan_loss(torch.zeros(4, 4), 0.0)) == 0.0

    def test_half_output_quarter_loss(self):
        assert float(lsgan_loss(torch.full((3, 3), 0.5), 1.0)) == pytest.approx(0.25)


class TestCycle:
    def test_exact_cycle_zero(self):
        x = torch.randn(1, 1, 4, 4)
        y = torch.randn(1, 1, 4, 4)
        assert float(cycle_loss(x, x.clone(), y, y.clone())) == 0.0

    def test_constant_offset_contributions(self):
        x = torch.zeros(1, 1, 4, 4)
        y = torch.zeros(1, 1, 4, 4)
        assert float(cycle_loss(x, x + 0.25, y, y)) == pytest.approx(0.25)
        assert float(cycle_loss(x, x + 0.25, y, y + 0.5)) == pytest.approx(0.75)


class TestLossReport:
    def test_json_line_round_trips(self):
        import json

        report = LossReport(epoch=1, step=2, loss_G_adv=0.5, loss_G_L1=0.1,
                            loss_G_total=10.5, loss_D=0.3, lr=2e-4)
        parsed = json.loads(report.to_json_line())
        assert parsed["epoch"] == 1
        assert parsed["loss_G_total"] == 10.5
        assert "loss_cycle" not in parsed
