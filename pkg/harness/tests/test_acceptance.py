"""Acceptance suite: one [PASS]/[FAIL] line per criterion.

These tests build real datasets and train real models on one CPU core, so
the module takes on the order of two hours end to end.
"""

import statistics
import subprocess
import sys

import pytest
import torch

from harness.models import EncoderConfig, GloreParams, glore_aggregate
from harness.train import TrainConfig, train

# settings established by toy-scale tuning runs (stride-4 or unnormalized
# scorers memorize without generalizing; SGD at 0.1 kills the small
# scorer's ReLU layer)
ENC = EncoderConfig(score_hidden=64, score_dropout=0.25)


def recipe(seed: int, epochs: int) -> TrainConfig:
    return TrainConfig(optimizer="adam", lr=5e-4, epochs=epochs, seed=seed,
                       weight_decay=1e-4, jitter=4, lr_decay=0.97)


def report(name: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def build(out, task, train_levels, sizes, test_levels="", seed=0, img=64):
    cmd = [sys.executable, "-m", "polyforge.cli", "build", "--task", task,
           "--train-levels", train_levels, "--sizes", sizes,
           "--seed", str(seed), "--img-size", str(img), "--out", str(out)]
    if test_levels:
        cmd += ["--test-levels", test_levels]
    subprocess.run(cmd, check=True, capture_output=True)
    return out


@pytest.fixture(scope="module")
def toy_rotation_dir(tmp_path_factory):
    return build(tmp_path_factory.mktemp("toyrot"), "rotation", "1,2,3",
                 "2000,200,0,0", seed=77, img=112)


@pytest.fixture(scope="module")
def trend_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("trend")
    return {
        "rot1": build(root / "rot1", "rotation", "1", "800,100,0,200",
                      test_levels="3", seed=101),
        "rot2": build(root / "rot2", "rotation", "2", "800,100,0,200",
                      test_levels="3", seed=101),
        "comp": build(root / "comp", "composition", "2", "2000,200,0,300",
                      test_levels="4", seed=55),
    }


def test_glore_unit_behavior():
    torch.manual_seed(0)
    params = GloreParams(k=8, m=5, d=32).build()
    with torch.no_grad():
        params["adj"].zero_()
    v = torch.randn(3, 5, 32)
    zero_ok = torch.equal(glore_aggregate(v, params), torch.zeros(3, 32))

    torch.manual_seed(1)
    params = GloreParams(k=4, m=4, d=8).build().double()
    v = torch.randn(2, 4, 8, dtype=torch.double)
    weight = torch.randn(8, dtype=torch.double)

    def loss_fn():
        return (glore_aggregate(v, params) @ weight).sum()

    loss_fn().backward()
    eps, worst = 1e-6, 0.0
    for p in params.values():
        flat, grad = p.detach().view(-1), p.grad.view(-1)
        for idx in range(0, flat.numel(), max(1, flat.numel() // 6)):
            orig = float(flat[idx])
            with torch.no_grad():
                flat[idx] = orig + eps
                hi = float(loss_fn())
                flat[idx] = orig - eps
                lo = float(loss_fn())
                flat[idx] = orig
            fd = (hi - lo) / (2 * eps)
            scale = max(abs(fd), abs(float(grad[idx])), 1e-8)
            worst = max(worst, abs(fd - float(grad[idx])) / scale)
    report("glore-unit", zero_ok and worst < 1e-4,
           f"zero adjacency gives exact zero: {zero_ok}; "
           f"worst finite-difference gradient error {worst:.2e} (< 1e-4)")


def test_above_chance_learning(toy_rotation_dir):
    m = train("cnn_mlp", toy_rotation_dir, recipe(seed=0, epochs=20),
              encoder=ENC, quiet=True)
    val = m["val_acc"]
    report("above-chance-learning", val >= 0.40,
           f"cnn_mlp rotation all-levels, 2000 train / 112px / 20 epochs: "
           f"val accuracy {val:.3f} (>= 0.40, chance 0.25)")


def test_extrapolation_ordering(trend_dirs):
    out = {k: [] for k in ("rot1", "rot2", "comp_mlp", "comp_max")}
    for seed in (0, 1, 2):
        for key, kind, data, epochs in [
            ("rot1", "cnn_mlp", trend_dirs["rot1"], 20),
            ("rot2", "cnn_mlp", trend_dirs["rot2"], 20),
            ("comp_mlp", "cnn_mlp", trend_dirs["comp"], 25),
            ("comp_max", "cnn_max", trend_dirs["comp"], 25),
        ]:
            m = train(kind, data, recipe(seed, epochs), encoder=ENC,
                      quiet=True)
            out[key].append(m["test_out_acc"])
    med = {k: statistics.median(v) for k, v in out.items()}
    rot_ok = med["rot2"] > med["rot1"]
    comp_ok = med["comp_max"] > med["comp_mlp"]
    report("extrapolation-ordering", rot_ok and comp_ok,
           f"median out-dist over 3 seeds: rotation |2->3| {med['rot2']:.3f} "
           f"> |1->3| {med['rot1']:.3f}: {rot_ok}; composition |2->4| "
           f"cnn_max {med['comp_max']:.3f} > cnn_mlp {med['comp_mlp']:.3f}: "
           f"{comp_ok} (per-seed: {out})")
