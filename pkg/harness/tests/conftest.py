"""Shared fixtures: small forge-built datasets (built via the forge CLI)."""

import subprocess
import sys

import pytest


def forge_build(out, task, train_levels, sizes, test_levels="", seed=0, img_size=64):
    cmd = [
        sys.executable, "-m", "polyforge.cli", "build",
        "--task", task,
        "--train-levels", train_levels,
        "--sizes", sizes,
        "--seed", str(seed),
        "--img-size", str(img_size),
        "--out", str(out),
    ]
    if test_levels:
        cmd += ["--test-levels", test_levels]
    subprocess.run(cmd, check=True, capture_output=True)
    return out


@pytest.fixture(scope="session")
def rotation_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "rot"
    return forge_build(out, "rotation", "1,2", "32,16,8,8", test_levels="3", seed=3)


@pytest.fixture(scope="session")
def composition_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "comp"
    return forge_build(out, "composition", "2,3", "24,12,8,8", test_levels="4", seed=3)
