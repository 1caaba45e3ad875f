"""Checkpoint container: magic, JSON header, named float32 parameter blobs."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from windcomfort.errors import CorruptCheckpoint, SpecMismatch
from windcomfort.nets.build import (
    DiscriminatorSpec,
    GeneratorSpec,
    build_discriminator,
    build_generator,
)
from windcomfort.nets.generators import ResnetGenerator
from windcomfort.raster.grid import FieldGrid
from windcomfort.training.data import geometry_tensor, unpack_flow

WGCK_MAGIC = b"WGCK"

KINDS = ("unet", "pix2pix", "cyclegan")


@dataclass
class Checkpoint:
    kind: str
    epoch: int
    gen_spec: GeneratorSpec
    models: dict[str, nn.Module]
    norm: dict
    disc_spec: DiscriminatorSpec | None = None
    meta: dict = field(default_factory=dict)

    @property
    def generator(self) -> nn.Module:
        return self.models["G"]

    def spec_hash(self) -> str:
        import hashlib
        payload = json.dumps(
            {"kind": self.kind, "gen": self.gen_spec.to_json_dict(),
             "disc": self.disc_spec.to_json_dict() if self.disc_spec else None},
            sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _split_state(models: dict[str, nn.Module]):
    """Blob entries for ordinary tensors; header floats for SN buffers."""
    blobs: list[tuple[str, np.ndarray]] = []
    sn_u: dict[str, list[float]] = {}
    for mname, model in models.items():
        for pname, tensor in model.state_dict().items():
            full = f"{mname}.{pname}"
            arr = tensor.detach().cpu().numpy().astype("<f4")
            if pname.endswith(".u") or pname.endswith(".sigma_hat"):
                sn_u[full] = np.atleast_1d(arr).astype(float).tolist()
            else:
                blobs.append((full, arr))
    return blobs, sn_u


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> Path:
    blobs, sn_u = _split_state(ckpt.models)
    header = {
        "kind": ckpt.kind,
        "epoch": ckpt.epoch,
        "gen_spec": ckpt.gen_spec.to_json_dict(),
        "disc_spec": ckpt.disc_spec.to_json_dict() if ckpt.disc_spec else None,
        "norm": ckpt.norm,
        "sn_u": sn_u,
        "meta": ckpt.meta,
        "models": sorted(ckpt.models),
    }
    hbytes = json.dumps(header).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(WGCK_MAGIC)
        fh.write(struct.pack("<I", len(hbytes)))
        fh.write(hbytes)
        fh.write(struct.pack("<I", len(blobs)))
        for name, arr in blobs:
            nbytes = name.encode("utf-8")
            fh.write(struct.pack("<I", len(nbytes)))
            fh.write(nbytes)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{max(arr.ndim, 1)}I", *(arr.shape or (1,))))
            fh.write(np.ascontiguousarray(arr).tobytes())
    return path


def _build_models(header: dict) -> tuple[GeneratorSpec, DiscriminatorSpec | None,
                                         dict[str, nn.Module]]:
    gen_spec = GeneratorSpec.from_json_dict(header["gen_spec"])
    disc_spec = (DiscriminatorSpec.from_json_dict(header["disc_spec"])
                 if header.get("disc_spec") else None)
    kind = header["kind"]
    models: dict[str, nn.Module] = {"G": build_generator(gen_spec)}
    if kind == "pix2pix":
        models["D"] = build_discriminator(disc_spec)
    elif kind == "cyclegan":
        # The reverse mapping reconstructs the (possibly multi-channel)
        # conditioning input, so it bypasses the 1-channel GeneratorSpec rule.
        models["F"] = ResnetGenerator(
            in_channels=gen_spec.out_channels,
            out_channels=gen_spec.model_in_channels,
            base=gen_spec.base_filters, dropout_p=gen_spec.dropout_p,
            coordconv_first=gen_spec.coordconv_first)
        models["DY"] = build_discriminator(disc_spec)
        dx_spec = DiscriminatorSpec(
            in_channels=gen_spec.model_in_channels,
            spectral_norm=disc_spec.spectral_norm, attention=disc_spec.attention,
            attention_placement=disc_spec.attention_placement,
            coordconv_first=disc_spec.coordconv_first)
        models["DX"] = build_discriminator(dx_spec)
    return gen_spec, disc_spec, models


def load_checkpoint(path: str | Path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != WGCK_MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic")
    (hlen,) = struct.unpack_from("<I", raw, 4)
    try:
        header = json.loads(raw[8:8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint(f"{path}: header does not parse: {exc}") from exc
    if header.get("kind") not in KINDS:
        raise CorruptCheckpoint(f"{path}: unknown kind {header.get('kind')!r}")
    off = 8 + hlen
    try:
        (n_blobs,) = struct.unpack_from("<I", raw, off)
        off += 4
        blobs: dict[str, np.ndarray] = {}
        for _ in range(n_blobs):
            (nlen,) = struct.unpack_from("<I", raw, off)
            off += 4
            name = raw[off:off + nlen].decode("utf-8")
            off += nlen
            (ndim,) = struct.unpack_from("<B", raw, off)
            off += 1
            shape = struct.unpack_from(f"<{max(ndim, 1)}I", raw, off)[:ndim] or ()
            off += 4 * max(ndim, 1)
            count = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(raw, dtype="<f4", count=count, offset=off)
            off += 4 * count
            blobs[name] = arr.reshape(shape)
    except (struct.error, ValueError) as exc:
        raise CorruptCheckpoint(f"{path}: truncated blobs: {exc}") from exc

    gen_spec, disc_spec, models = _build_models(header)
    for mname, model in models.items():
        state = model.state_dict()
        new_state = {}
        for pname, tensor in state.items():
            full = f"{mname}.{pname}"
            if full in header.get("sn_u", {}):
                vals = np.asarray(header["sn_u"][full], dtype=np.float32)
                new_state[pname] = torch.from_numpy(
                    vals.reshape(tensor.shape if tensor.ndim else ()))
                continue
            if full not in blobs:
                raise SpecMismatch(f"{path}: missing tensor {full}")
            arr = blobs[full]
            if tuple(arr.shape) != tuple(tensor.shape):
                raise SpecMismatch(
                    f"{path}: {full} has shape {arr.shape}, spec wants {tuple(tensor.shape)}")
            new_state[pname] = torch.from_numpy(arr.copy())
        model.load_state_dict(new_state)
        model.eval()
    return Checkpoint(kind=header["kind"], epoch=int(header["epoch"]),
                      gen_spec=gen_spec, models=models, norm=header["norm"],
                      disc_spec=disc_spec, meta=header.get("meta", {}))


class Predictor:
    """Eval-mode inference wrapper: geometry raster in, m/s flow raster out."""

    def __init__(self, ckpt: Checkpoint):
        self.ckpt = ckpt
        self.gen = ckpt.generator
        self.gen.eval()

    @property
    def norm(self) -> dict:
        return self.ckpt.norm

    def predict(self, geometry: FieldGrid) -> FieldGrid:
        x = geometry_tensor(geometry, self.norm.get("h_max"),
                            self.ckpt.gen_spec.sdf_channel)
        with torch.no_grad():
            y = self.gen(x)
        return unpack_flow(y[0], self.norm["v_max"], geometry.extent_m)
