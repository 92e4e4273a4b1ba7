import pytest
import torch

from harness.cli import main as harness_main
from harness.data import RotationDataset
from harness.gradcam import gradcam, save_overlays
from harness.models import EncoderConfig, build_model
from harness.train import TrainConfig, train

SMALL = EncoderConfig(feature_maps=(4, 8, 8), strides=(4, 2, 2),
                      embed_dim=16, pool=2)


def _mark_trained(model):
    model.trained = True
    return model


def _rotation_item(size=112):
    torch.manual_seed(0)
    q = torch.rand(1, size, size)
    cands = torch.rand(4, 1, size, size)
    return q, cands, 0


def test_heatmap_range_and_size():
    model = _mark_trained(build_model("cnn_mlp", "rotation", SMALL))
    cams = gradcam(model, _rotation_item(), layer=3)
    assert set(cams) == {"q", "c0", "c1", "c2", "c3"}
    for cam in cams.values():
        # strides (4, 2, 2) on 112px input: layer 3 sits at 7x7
        assert cam.shape == (7, 7)
        assert cam.min() >= 0 and cam.max() <= 1


def test_default_layer_is_third():
    model = _mark_trained(build_model("cnn_mlp", "rotation", SMALL))
    item = _rotation_item()
    default = gradcam(model, item)
    third = gradcam(model, item, layer=3)
    assert all(torch.equal(default[k], third[k]) for k in default)


def test_layer_out_of_range():
    model = _mark_trained(build_model("cnn_mlp", "rotation", SMALL))
    with pytest.raises(ValueError):
        gradcam(model, _rotation_item(), layer=4)
    with pytest.raises(ValueError):
        gradcam(model, _rotation_item(), layer=0)


def test_untrained_model_warns():
    model = build_model("cnn_mlp", "rotation", SMALL)
    with pytest.warns(UserWarning, match="untrained"):
        gradcam(model, _rotation_item())


def test_composition_keys(composition_dir):
    model = _mark_trained(build_model("cnn_max", "composition", SMALL))
    from harness.data import CompositionDataset

    item = CompositionDataset(composition_dir, "train")[0]
    cams = gradcam(model, item, layer=2)
    counts = item[2]
    expected = {"q"} | {f"c{ci}_p{pi}" for ci, n in enumerate(counts.tolist())
                        for pi in range(int(n))}
    assert set(cams) == expected


def test_overlays_written(tmp_path):
    model = _mark_trained(build_model("cnn_mlp", "rotation", SMALL))
    item = _rotation_item(64)
    cams = gradcam(model, item, layer=2)
    paths = save_overlays(cams, item, tmp_path)
    assert len(paths) == 5
    for p in paths:
        assert p.exists() and p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_cli_gradcam(rotation_dir, tmp_path, capsys):
    ckpt_dir = tmp_path / "run"
    train("cnn_mlp", rotation_dir, TrainConfig(epochs=1, batch_size=8, seed=0),
          out_dir=ckpt_dir, quiet=True)
    out = tmp_path / "cams"
    rc = harness_main(["gradcam", "--checkpoint", str(ckpt_dir / "model.pt"),
                       "--data", str(rotation_dir), "--split", "val",
                       "--index", "0", "--out", str(out)])
    capsys.readouterr()
    assert rc == 0
    assert sorted(p.name for p in out.glob("*_cam.png")) == [
        "c0_cam.png", "c1_cam.png", "c2_cam.png", "c3_cam.png", "q_cam.png"]


def _uniform_interior_check():
    # a constant input should give a flat map away from padding effects
    model = _mark_trained(build_model("cnn_mlp", "rotation", SMALL))
    q = torch.ones(1, 224, 224)
    cands = torch.ones(4, 1, 224, 224)
    cams = gradcam(model, (q, cands, 0), layer=3)
    core = cams["q"][3:-3, 3:-3]    # 14x14 map; drop padding-affected border
    return float((core.max() - core.min()).detach())


def test_constant_input_flat_interior():
    spread = _uniform_interior_check()
    assert spread < 0.05
