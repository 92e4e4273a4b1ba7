import json

import pytest
import torch

from harness.cli import main as harness_main
from harness.data import (
    CompositionDataset,
    DatasetError,
    RotationDataset,
    load_manifest,
    open_dataset,
)
from harness.models import EncoderConfig, build_model
from harness.train import TrainConfig, evaluate, load_checkpoint, train

TINY = EncoderConfig(feature_maps=(4, 8), strides=(4, 2), embed_dim=16, pool=2)


def test_load_manifest_errors(tmp_path):
    with pytest.raises(DatasetError):
        load_manifest(tmp_path)
    (tmp_path / "manifest.json").write_text(json.dumps({"problems": []}))
    with pytest.raises(DatasetError):
        load_manifest(tmp_path)


def test_rotation_dataset_shapes(rotation_dir):
    ds = RotationDataset(rotation_dir, "train")
    assert len(ds) == 32
    q, cands, answer = ds[0]
    assert q.shape == (1, 64, 64)
    assert cands.shape == (4, 1, 64, 64)
    assert 0 <= answer < 4
    assert q.min() >= 0 and q.max() <= 1
    with pytest.raises(DatasetError):
        CompositionDataset(rotation_dir, "train")


def test_composition_dataset_shapes(composition_dir):
    ds = CompositionDataset(composition_dir, "train")
    q, pieces, counts, answer = ds[0]
    assert pieces.shape == (4, 5, 1, 64, 64)
    assert (counts >= 2).all() and (counts <= 5).all()
    # padded slots stay blank
    ci = int(counts.argmin())
    assert pieces[ci, int(counts[ci]):].abs().sum() == 0
    assert 0 <= answer < 4


def test_split_filtering(rotation_dir):
    assert len(open_dataset(rotation_dir, "val")) == 16
    assert len(open_dataset(rotation_dir, "test_out")) == 8


def test_untrained_model_near_chance(rotation_dir):
    torch.manual_seed(11)
    model = build_model("cnn_mlp", "rotation", TINY)
    from harness.train import _loader

    acc = evaluate(model, _loader(RotationDataset(rotation_dir, "train"), 16, False, 0))
    assert abs(acc - 0.25) <= 0.2   # 32 problems, wide noise band


def test_config_resolution():
    cfg = TrainConfig().resolved("cnn_mlp")
    assert cfg.optimizer == "sgd" and cfg.lr == 0.1
    cfg = TrainConfig().resolved("cnn_max")
    assert cfg.optimizer == "adam" and cfg.lr == 5e-4
    explicit = TrainConfig(optimizer="adam", lr=0.01).resolved("cnn_mlp")
    assert explicit.optimizer == "adam" and explicit.lr == 0.01


def test_config_file_rejects_unknown_fields(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"epochs": 2, "warp_factor": 9}))
    with pytest.raises(ValueError):
        TrainConfig.from_file(path)


def test_training_runs_and_is_reproducible(rotation_dir):
    cfg = TrainConfig(epochs=2, batch_size=8, seed=5)
    a = train("cnn_mlp", rotation_dir, cfg, encoder=TINY, quiet=True)
    b = train("cnn_mlp", rotation_dir, cfg, encoder=TINY, quiet=True)
    assert a["history"] == b["history"]
    assert len(a["history"]) == 2
    assert a["test_out_acc"] is not None
    assert a["test_in_acc"] is not None


def test_training_composition_models(composition_dir):
    cfg = TrainConfig(epochs=1, batch_size=8, seed=5)
    for kind in ("cnn_max", "cnn_glore"):
        metrics = train(kind, composition_dir, cfg, encoder=TINY, quiet=True)
        assert metrics["task"] == "composition"
        assert metrics["val_acc"] is not None


def test_siamese_argmin_evaluation():
    class Frozen(torch.nn.Module):
        eval_rule = "argmin"

        def forward(self, q, cands):
            return torch.tensor([[0.9, 0.2, 0.8, 0.7]]).expand(q.shape[0], 4)

    scores = Frozen()(torch.zeros(3, 1, 8, 8), None)
    assert (scores.argmin(1) == 1).all()


def test_siamese_trains(rotation_dir):
    metrics = train("siamese", rotation_dir,
                    TrainConfig(epochs=1, batch_size=8, seed=1),
                    encoder=TINY, quiet=True)
    assert metrics["model"] == "siamese"


def test_cli_train_and_outputs(rotation_dir, tmp_path, capsys):
    out = tmp_path / "run"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epochs": 1, "batch_size": 8, "seed": 2}))
    rc = harness_main(["train", "--model", "cnn_mlp", "--data", str(rotation_dir),
                       "--config", str(cfg), "--out", str(out)])
    capsys.readouterr()
    assert rc == 0
    lines = [json.loads(l) for l in (out / "metrics.jsonl").read_text().splitlines()]
    assert lines[0]["epoch"] == 0
    assert "val_acc" in lines[-1]
    model = load_checkpoint(out / "model.pt")
    assert model.eval_rule == "argmax"
    assert getattr(model, "trained", False)


def test_cli_error_paths(tmp_path, capsys):
    rc = harness_main(["train", "--model", "cnn_mlp", "--data", str(tmp_path)])
    captured = capsys.readouterr()
    assert rc == 1
    assert "error" in captured.err
