"""Training loops for the supervised U-Net, Pix2Pix, and CycleGAN."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from windcomfort.errors import EmptyBatch, NonFiniteLoss
from windcomfort.losses import (
    LossReport,
    adv_loss,
    cycle_loss,
    l1_loss,
    lsgan_loss,
    pix2pix_objective,
)
from windcomfort.nets.build import (
    DiscriminatorSpec,
    GeneratorSpec,
    build_discriminator,
    build_generator,
)
from windcomfort.nets.generators import ResnetGenerator
from windcomfort.nets.patchgan import PatchDiscriminator
from windcomfort.raster.dataset import DatasetManifest, SamplePair
from windcomfort.training.checkpoint import Checkpoint, save_checkpoint
from windcomfort.training.config import TrainConfig, lr_at_epoch
from windcomfort.training.data import flow_tensor, geometry_tensor
from windcomfort.training.pool import ImagePool

log = logging.getLogger(__name__)


def disc_accuracy(patch_probs_batch, truth_labels) -> float:
    """Fraction of images whose mean patch probability lands on the truth.

    Mean strictly above 0.5 counts as a "real" call; exactly 0.5 is "fake".
    """
    probs = list(patch_probs_batch)
    truths = list(truth_labels)
    if not probs or len(probs) != len(truths):
        raise EmptyBatch("need one truth label per non-empty probability grid")
    correct = 0
    for grid, truth in zip(probs, truths):
        predicted_real = float(np.mean(np.asarray(grid))) > 0.5
        correct += int(predicted_real == bool(truth))
    return correct / len(probs)


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: list[dict] = field(default_factory=list)
    g_updates: int = 0
    log_path: str | None = None


def _norm_constants(manifest: DatasetManifest) -> dict:
    return {
        "v_max": manifest.v_max,
        "h_max": manifest.h_max,
        "v_ref": manifest.v_ref,
        "extent_m": manifest.extent_m,
        "n_bins": manifest.n_bins,
        "family": manifest.family,
        "channel_schema": list(manifest.channel_schema),
    }


def _check_finite(value: torch.Tensor, step: int, name: str) -> float:
    v = float(value.detach())
    if not np.isfinite(v):
        raise NonFiniteLoss(step, name)
    return v


class _Logger:
    def __init__(self, path: str | None):
        self.path = Path(path) if path else None
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("")

    def write(self, report: LossReport) -> None:
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(report.to_json_line() + "\n")


class _Loop:
    """Shared scaffolding: seeding, tensor caching, scheduling, validation."""

    def __init__(self, manifest: DatasetManifest, samples: list[SamplePair],
                 gen_spec: GeneratorSpec, cfg: TrainConfig):
        torch.use_deterministic_algorithms(True)
        self.manifest = manifest
        self.cfg = cfg
        self.gen_spec = gen_spec
        seeds = cfg.derived_seeds()
        torch.manual_seed(seeds["dropout"])
        self.shuffle_rng = np.random.default_rng(seeds["shuffle"])
        self.pool_rng = np.random.default_rng(seeds["pool"])
        self.init_seed = seeds["init"]
        train_idx, test_idx = manifest.split()
        self.train_idx = train_idx
        self.test_idx = test_idx
        self.xs = {i: geometry_tensor(samples[i].geometry, manifest.h_max,
                                      gen_spec.sdf_channel)
                   for i in range(len(samples))}
        self.ys = {i: flow_tensor(samples[i].flow, manifest.v_max)
                   for i in range(len(samples))}
        self.logger = _Logger(cfg.log_path or (
            str(Path(cfg.checkpoint_dir) / "train_log.jsonl")
            if cfg.checkpoint_dir else None))
        self.step = 0
        self.g_updates = 0
        self.history: list[dict] = []

    def batches(self):
        order = self.shuffle_rng.permutation(len(self.train_idx))
        bs = self.cfg.batch_size
        for i in range(0, len(order), bs):
            chunk = [self.train_idx[j] for j in order[i:i + bs]]
            x = torch.cat([self.xs[j] for j in chunk])
            y = torch.cat([self.ys[j] for j in chunk])
            yield x, y

    def set_lr(self, epoch: int, *optimizers) -> float:
        lr = lr_at_epoch(epoch, self.cfg)
        for opt in optimizers:
            for group in opt.param_groups:
                group["lr"] = lr
        return lr

    def validation_mae(self, gen: torch.nn.Module) -> float | None:
        """Held-out MAE in normalized [0, 1] velocity units."""
        if not self.test_idx:
            return None
        gen.eval()
        total = 0.0
        count = 0
        with torch.no_grad():
            for i in self.test_idx:
                pred = gen(self.xs[i])
                total += float((pred - self.ys[i]).abs().sum()) * 0.5
                count += pred.numel()
        gen.train()
        return total / count

    def maybe_save(self, ckpt: Checkpoint, epoch: int) -> None:
        if self.cfg.checkpoint_dir and (epoch + 1) % self.cfg.eval_every == 0:
            save_checkpoint(ckpt, Path(self.cfg.checkpoint_dir) / f"epoch{epoch:03d}.wgck")


def train_unet(manifest: DatasetManifest, samples: list[SamplePair],
               gen_spec: GeneratorSpec, cfg: TrainConfig,
               out_path: str | None = None) -> TrainResult:
    """Supervised training of the generator alone with the L1 objective."""
    loop = _Loop(manifest, samples, gen_spec, cfg)
    gen = build_generator(gen_spec, loop.init_seed)
    gen.train()
    opt = torch.optim.Adam(gen.parameters(), lr=cfg.lr, betas=(cfg.beta1, cfg.beta2))
    ckpt = Checkpoint("unet", 0, gen_spec, {"G": gen}, _norm_constants(manifest),
                      meta={"seed": cfg.seed, "dataset": manifest.name})
    for epoch in range(cfg.epochs):
        lr = loop.set_lr(epoch, opt)
        epoch_l1 = []
        for x, y in loop.batches():
            pred = gen(x)
            loss = l1_loss(pred, y)
            opt.zero_grad()
            loss.backward()
            opt.step()
            loop.g_updates += 1
            l1_val = _check_finite(loss, loop.step, "loss_L1")
            epoch_l1.append(l1_val)
            loop.logger.write(LossReport(
                epoch=epoch, step=loop.step, loss_G_adv=0.0, loss_G_L1=l1_val,
                loss_G_total=l1_val, loss_D=0.0, lr=lr, lambda_l1=0.0))
            loop.step += 1
        entry = {"epoch": epoch, "lr": lr, "train_l1": float(np.mean(epoch_l1))}
        if (epoch + 1) % cfg.eval_every == 0:
            entry["val_mae"] = loop.validation_mae(gen)
        loop.history.append(entry)
        ckpt.epoch = epoch
        loop.maybe_save(ckpt, epoch)
    gen.eval()
    if out_path:
        save_checkpoint(ckpt, out_path)
    return TrainResult(ckpt, loop.history, loop.g_updates,
                       str(loop.logger.path) if loop.logger.path else None)


def train_pix2pix(manifest: DatasetManifest, samples: list[SamplePair],
                  gen_spec: GeneratorSpec, disc_spec: DiscriminatorSpec,
                  cfg: TrainConfig, out_path: str | None = None) -> TrainResult:
    """Adversarial conditional training: D and G both step every iteration."""
    loop = _Loop(manifest, samples, gen_spec, cfg)
    gen = build_generator(gen_spec, loop.init_seed)
    disc = build_discriminator(disc_spec, loop.init_seed + 1)
    gen.train()
    disc.train()
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.lr, betas=(cfg.beta1, cfg.beta2))
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.lr, betas=(cfg.beta1, cfg.beta2))
    ckpt = Checkpoint("pix2pix", 0, gen_spec, {"G": gen, "D": disc},
                      _norm_constants(manifest), disc_spec=disc_spec,
                      meta={"seed": cfg.seed, "dataset": manifest.name})
    for epoch in range(cfg.epochs):
        lr = loop.set_lr(epoch, opt_g, opt_d)
        epoch_l1, epoch_d = [], []
        probs, truths = [], []
        for x, y in loop.batches():
            fake = gen(x)

            d_real = disc(torch.cat([x, y], dim=1))
            d_fake = disc(torch.cat([x, fake.detach()], dim=1))
            loss_d, _ = adv_loss(d_real, d_fake)
            opt_d.zero_grad()
            loss_d.backward()
            opt_d.step()

            d_fake_for_g = disc(torch.cat([x, fake], dim=1))
            _, loss_g_adv = adv_loss(d_real.detach(), d_fake_for_g)
            loss_l1 = l1_loss(fake, y)
            loss_g = pix2pix_objective(loss_g_adv, loss_l1, cfg.lambda_l1)
            opt_g.zero_grad()
            loss_g.backward()
            opt_g.step()
            loop.g_updates += 1

            with torch.no_grad():
                for img in torch.sigmoid(d_real):
                    probs.append(img.numpy())
                    truths.append(True)
                for img in torch.sigmoid(d_fake):
                    probs.append(img.numpy())
                    truths.append(False)
            step_acc = disc_accuracy(probs[-2 * x.shape[0]:], truths[-2 * x.shape[0]:])
            d_val = _check_finite(loss_d, loop.step, "loss_D")
            g_adv_val = _check_finite(loss_g_adv, loop.step, "loss_G_adv")
            l1_val = _check_finite(loss_l1, loop.step, "loss_G_L1")
            epoch_l1.append(l1_val)
            epoch_d.append(d_val)
            loop.logger.write(LossReport(
                epoch=epoch, step=loop.step, loss_G_adv=g_adv_val,
                loss_G_L1=l1_val, loss_G_total=float(loss_g.detach()), loss_D=d_val,
                lr=lr, lambda_l1=cfg.lambda_l1, disc_accuracy=step_acc))
            loop.step += 1
        entry = {
            "epoch": epoch, "lr": lr,
            "train_l1": float(np.mean(epoch_l1)),
            "train_d": float(np.mean(epoch_d)),
            "disc_accuracy": disc_accuracy(probs, truths),
        }
        if isinstance(disc, PatchDiscriminator) and disc_spec.spectral_norm:
            entry["sn_sigma"] = disc.sn_sigmas()
        if (epoch + 1) % cfg.eval_every == 0:
            entry["val_mae"] = loop.validation_mae(gen)
        loop.history.append(entry)
        ckpt.epoch = epoch
        loop.maybe_save(ckpt, epoch)
    gen.eval()
    disc.eval()
    if out_path:
        save_checkpoint(ckpt, out_path)
    return TrainResult(ckpt, loop.history, loop.g_updates,
                       str(loop.logger.path) if loop.logger.path else None)


def train_cyclegan(manifest: DatasetManifest, samples: list[SamplePair],
                   gen_spec: GeneratorSpec, disc_spec: DiscriminatorSpec,
                   cfg: TrainConfig, out_path: str | None = None) -> TrainResult:
    """Two translators with least-squares adversaries and cycle consistency.

    G maps geometry to flow, F back again; D_Y judges flows, D_X geometries.
    Each of G, F, D_X, D_Y is updated exactly once per iteration; both fake
    pools replay past generator outputs to their discriminator.
    """
    if gen_spec.family != "resnet9":
        gen_spec = GeneratorSpec(**{**gen_spec.to_json_dict(), "family": "resnet9"})
    loop = _Loop(manifest, samples, gen_spec, cfg)
    gen = build_generator(gen_spec, loop.init_seed)
    with torch.random.fork_rng():
        torch.manual_seed(loop.init_seed + 2)
        back = ResnetGenerator(
            in_channels=gen_spec.out_channels,
            out_channels=gen_spec.model_in_channels,
            base=gen_spec.base_filters, dropout_p=gen_spec.dropout_p,
            coordconv_first=gen_spec.coordconv_first)
        from windcomfort.nets.build import init_weights
        init_weights(back)
    disc_y = build_discriminator(disc_spec, loop.init_seed + 3)
    dx_spec = DiscriminatorSpec(
        in_channels=gen_spec.model_in_channels,
        spectral_norm=disc_spec.spectral_norm, attention=disc_spec.attention,
        attention_placement=disc_spec.attention_placement,
        coordconv_first=disc_spec.coordconv_first)
    disc_x = build_discriminator(dx_spec, loop.init_seed + 4)
    for m in (gen, back, disc_x, disc_y):
        m.train()
    opt_g = torch.optim.Adam(list(gen.parameters()) + list(back.parameters()),
                             lr=cfg.lr, betas=(cfg.beta1, cfg.beta2))
    opt_dx = torch.optim.Adam(disc_x.parameters(), lr=cfg.lr,
                              betas=(cfg.beta1, cfg.beta2))
    opt_dy = torch.optim.Adam(disc_y.parameters(), lr=cfg.lr,
                              betas=(cfg.beta1, cfg.beta2))
    pool_x = ImagePool(cfg.pool_size, loop.pool_rng)
    pool_y = ImagePool(cfg.pool_size, loop.pool_rng)
    ckpt = Checkpoint("cyclegan", 0, gen_spec,
                      {"G": gen, "F": back, "DX": disc_x, "DY": disc_y},
                      _norm_constants(manifest), disc_spec=disc_spec,
                      meta={"seed": cfg.seed, "dataset": manifest.name})
    n_train = len(loop.train_idx)
    for epoch in range(cfg.epochs):
        lr = loop.set_lr(epoch, opt_g, opt_dx, opt_dy)
        epoch_cycle, epoch_d = [], []
        # Unpaired flavor: the two domains are shuffled independently.
        order_x = loop.shuffle_rng.permutation(n_train)
        order_y = loop.shuffle_rng.permutation(n_train)
        for bi in range(0, n_train, cfg.batch_size):
            x = torch.cat([loop.xs[loop.train_idx[j]] for j in order_x[bi:bi + cfg.batch_size]])
            y = torch.cat([loop.ys[loop.train_idx[j]] for j in order_y[bi:bi + cfg.batch_size]])

            fake_y = gen(x)
            fake_x = back(y)
            loss_g_adv = lsgan_loss(disc_y(fake_y), 1.0) + lsgan_loss(disc_x(fake_x), 1.0)
            loss_cyc = cycle_loss(x, back(fake_y), y, gen(fake_x))
            loss_g = loss_g_adv + cfg.lambda_cycle * loss_cyc
            opt_g.zero_grad()
            loss_g.backward()
            opt_g.step()
            loop.g_updates += 1

            fake_y_replay = pool_y.query(fake_y.detach())
            loss_dy = 0.5 * ((lsgan_loss(disc_y(y), 1.0)
                              + lsgan_loss(disc_y(fake_y_replay), 0.0)) / 2.0)
            opt_dy.zero_grad()
            loss_dy.backward()
            opt_dy.step()

            fake_x_replay = pool_x.query(fake_x.detach())
            loss_dx = 0.5 * ((lsgan_loss(disc_x(x), 1.0)
                              + lsgan_loss(disc_x(fake_x_replay), 0.0)) / 2.0)
            opt_dx.zero_grad()
            loss_dx.backward()
            opt_dx.step()

            cyc_val = _check_finite(loss_cyc, loop.step, "loss_cycle")
            d_val = (_check_finite(loss_dx, loop.step, "loss_DX")
                     + _check_finite(loss_dy, loop.step, "loss_DY")) / 2.0
            epoch_cycle.append(cyc_val)
            epoch_d.append(d_val)
            loop.logger.write(LossReport(
                epoch=epoch, step=loop.step, loss_G_adv=float(loss_g_adv.detach()),
                loss_G_L1=0.0, loss_G_total=float(loss_g.detach()), loss_D=d_val, lr=lr,
                lambda_l1=0.0, loss_cycle=cyc_val, lambda_cycle=cfg.lambda_cycle))
            loop.step += 1
        entry = {"epoch": epoch, "lr": lr,
                 "train_cycle": float(np.mean(epoch_cycle)),
                 "train_d": float(np.mean(epoch_d)),
                 "pool_sizes": [len(pool_x), len(pool_y)]}
        if (epoch + 1) % cfg.eval_every == 0:
            entry["val_mae"] = loop.validation_mae(gen)
        loop.history.append(entry)
        ckpt.epoch = epoch
        loop.maybe_save(ckpt, epoch)
    for m in (gen, back, disc_x, disc_y):
        m.eval()
    if out_path:
        save_checkpoint(ckpt, out_path)
    return TrainResult(ckpt, loop.history, loop.g_updates,
                       str(loop.logger.path) if loop.logger.path else None)
