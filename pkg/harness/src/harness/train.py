"""Training and evaluation loop over forge-built datasets.

Deterministic given the seed: single-process data loading, seeded shuffles,
and a fixed initialization order.  Metrics go to stdout and, when an output
directory is given, to ``metrics.jsonl`` (one JSON object per epoch plus a
final summary line).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch.utils.data import DataLoader

from .data import load_manifest, open_dataset
from .models import MODEL_KINDS, EncoderConfig, build_model

SGD_MODELS = ("cnn_mlp", "siamese", "cnn_glore")


@dataclass
class TrainConfig:
    optimizer: str = ""        # "sgd" | "adam"; empty -> per-model default
    lr: float = 0.0            # 0 -> per-model default
    momentum: float = 0.9
    batch_size: int = 64
    lr_decay: float = 0.9      # multiplicative, per epoch
    epochs: int = 10
    seed: int = 0
    weight_decay: float = 0.0
    jitter: int = 0            # max random translation (pixels) during training
    rot_aug: bool = False      # random 90-degree image rotations during training

    def resolved(self, model_kind: str) -> "TrainConfig":
        opt = self.optimizer or ("sgd" if model_kind in SGD_MODELS else "adam")
        lr = self.lr or (0.1 if opt == "sgd" else 5e-4)
        out = TrainConfig(**asdict(self))
        out.optimizer, out.lr = opt, lr
        return out

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        fields = json.loads(Path(path).read_text())
        unknown = set(fields) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**fields)


def _loader(ds, batch_size: int, shuffle: bool, seed: int) -> DataLoader:
    gen = torch.Generator()
    gen.manual_seed(seed)
    return DataLoader(ds, batch_size=batch_size, shuffle=shuffle,
                      num_workers=0, generator=gen)


def _split_batch(batch):
    *inputs, answers = batch
    return inputs, answers


def _jitter(x: torch.Tensor, shift: int) -> torch.Tensor:
    """Random independent translation of each image; pads with background."""
    lead = x.shape[:-3]
    flat = x.reshape(-1, *x.shape[-3:])
    padded = torch.nn.functional.pad(flat, (shift,) * 4, value=1.0)
    h, w = flat.shape[-2:]
    out = torch.empty_like(flat)
    offs = torch.randint(0, 2 * shift + 1, (flat.shape[0], 2))
    for i, (dy, dx) in enumerate(offs.tolist()):
        out[i] = padded[i, :, dy:dy + h, dx:dx + w]
    return out.reshape(*lead, *x.shape[-3:])


def _rot90(x: torch.Tensor) -> torch.Tensor:
    """Random independent quarter-turn of each image.

    Quarter turns preserve shape identity (a rolled camera view of the same
    object); reflections would not, so they are never applied.
    """
    lead = x.shape[:-3]
    flat = x.reshape(-1, *x.shape[-3:]).clone()
    ks = torch.randint(0, 4, (flat.shape[0],))
    for i, k in enumerate(ks.tolist()):
        if k:
            flat[i] = torch.rot90(flat[i], k, dims=(-2, -1))
    return flat.reshape(*lead, *x.shape[-3:])


@torch.no_grad()
def evaluate(model, loader: DataLoader) -> float:
    model.eval()
    hits = total = 0
    for batch in loader:
        inputs, answers = _split_batch(batch)
        scores = model(*inputs)
        pred = scores.argmin(1) if model.eval_rule == "argmin" else scores.argmax(1)
        hits += int((pred == answers).sum())
        total += len(answers)
    return hits / max(total, 1)


def train(model_kind: str, data_dir, config: TrainConfig | None = None,
          out_dir=None, encoder: EncoderConfig = EncoderConfig(),
          quiet: bool = False) -> dict:
    """Train ``model_kind`` on a forge dataset; returns the metrics dict."""
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"model must be one of {MODEL_KINDS}")
    cfg = (config or TrainConfig()).resolved(model_kind)
    task = load_manifest(data_dir)["config"]["task"]

    torch.manual_seed(cfg.seed)
    model = build_model(model_kind, task, encoder)
    params = model.parameters()
    if cfg.optimizer == "sgd":
        opt = torch.optim.SGD(params, lr=cfg.lr, momentum=cfg.momentum,
                              weight_decay=cfg.weight_decay)
    elif cfg.optimizer == "adam":
        opt = torch.optim.Adam(params, lr=cfg.lr,
                               weight_decay=cfg.weight_decay)
    else:
        raise ValueError("optimizer must be 'sgd' or 'adam'")
    sched = torch.optim.lr_scheduler.ExponentialLR(opt, gamma=cfg.lr_decay)

    train_loader = _loader(open_dataset(data_dir, "train"), cfg.batch_size,
                           shuffle=True, seed=cfg.seed)
    val_loader = _loader(open_dataset(data_dir, "val"), cfg.batch_size,
                         shuffle=False, seed=cfg.seed)

    out = Path(out_dir) if out_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    lines = []

    def emit(obj):
        lines.append(json.dumps(obj, sort_keys=True))
        if not quiet:
            print(lines[-1])

    history = []
    for epoch in range(cfg.epochs):
        model.train()
        total_loss = 0.0
        batches = 0
        for batch in train_loader:
            inputs, answers = _split_batch(batch)
            if cfg.rot_aug:
                inputs = [_rot90(t) if t.dim() >= 4 else t for t in inputs]
            if cfg.jitter:
                inputs = [_jitter(t, cfg.jitter) if t.dim() >= 4 else t
                          for t in inputs]
            opt.zero_grad()
            loss = model.loss(model(*inputs), answers)
            loss.backward()
            opt.step()
            total_loss += float(loss.detach())
            batches += 1
        sched.step()
        val_acc = evaluate(model, val_loader) if len(val_loader.dataset) else None
        history.append({"epoch": epoch, "train_loss": total_loss / max(batches, 1),
                        "val_acc": val_acc})
        emit(history[-1])

    metrics = {"model": model_kind, "task": task, "config": asdict(cfg),
               "history": history,
               "val_acc": history[-1]["val_acc"] if history else None}
    for split, key in (("test_in", "test_in_acc"), ("test_out", "test_out_acc")):
        ds = open_dataset(data_dir, split)
        metrics[key] = (evaluate(model, _loader(ds, cfg.batch_size, False, cfg.seed))
                        if len(ds) else None)
    emit({k: metrics[k] for k in ("model", "task", "val_acc",
                                  "test_in_acc", "test_out_acc")})
    if out:
        (out / "metrics.jsonl").write_text("\n".join(lines) + "\n")
        torch.save({"model_kind": model_kind, "task": task,
                    "state_dict": model.state_dict()}, out / "model.pt")
    model.trained = True
    metrics["model_obj"] = model
    return metrics


def load_checkpoint(path, encoder: EncoderConfig = EncoderConfig()):
    blob = torch.load(path, weights_only=True)
    model = build_model(blob["model_kind"], blob["task"], encoder)
    model.load_state_dict(blob["state_dict"])
    model.trained = True
    return model
