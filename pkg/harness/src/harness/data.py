"""Dataset access for forge-built directories (manifest.json + PNGs).

The harness treats the generator as a black box: everything it needs is in
the manifest and the image files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch.utils.data import Dataset

MANIFEST_NAME = "manifest.json"
MAX_PIECES = 5
N_CANDIDATES = 4


class DatasetError(ValueError):
    pass


def load_manifest(root) -> dict:
    path = Path(root) / MANIFEST_NAME
    if not path.is_file():
        raise DatasetError(f"no {MANIFEST_NAME} under {root}")
    manifest = json.loads(path.read_text())
    for key in ("config", "problems", "library_version"):
        if key not in manifest:
            raise DatasetError(f"manifest missing key {key!r}")
    return manifest


def _load_image(path: Path) -> torch.Tensor:
    arr = np.asarray(Image.open(path).convert("L"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr).unsqueeze(0)   # (1, H, W)


class RotationDataset(Dataset):
    """Items: (question (1,H,W), candidates (4,1,H,W), answer index)."""

    def __init__(self, root, split: str):
        self.root = Path(root)
        manifest = load_manifest(root)
        if manifest["config"]["task"] != "rotation":
            raise DatasetError("not a rotation dataset")
        self.records = [r for r in manifest["problems"] if r["split"] == split]

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i: int):
        rec = self.records[i]
        q = _load_image(self.root / rec["images"]["q"])
        cands = torch.stack(
            [_load_image(self.root / rec["images"][f"c{j}"]) for j in range(N_CANDIDATES)]
        )
        return q, cands, rec["answer_index"]


class CompositionDataset(Dataset):
    """Items: (question, pieces (4,5,1,H,W) zero padded, counts (4,), answer).

    Blank slots are all-zero images; ``counts`` gives the real piece count
    per candidate.
    """

    def __init__(self, root, split: str):
        self.root = Path(root)
        manifest = load_manifest(root)
        if manifest["config"]["task"] != "composition":
            raise DatasetError("not a composition dataset")
        self.records = [r for r in manifest["problems"] if r["split"] == split]

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i: int):
        rec = self.records[i]
        q = _load_image(self.root / rec["images"]["q"])
        h, w = q.shape[1:]
        pieces = torch.zeros(N_CANDIDATES, MAX_PIECES, 1, h, w)
        counts = torch.zeros(N_CANDIDATES, dtype=torch.long)
        for ci in range(N_CANDIDATES):
            pi = 0
            while f"c{ci}_p{pi}" in rec["images"]:
                pieces[ci, pi] = _load_image(self.root / rec["images"][f"c{ci}_p{pi}"])
                pi += 1
            counts[ci] = pi
        return q, pieces, counts, rec["answer_index"]


def open_dataset(root, split: str) -> Dataset:
    task = load_manifest(root)["config"]["task"]
    cls = RotationDataset if task == "rotation" else CompositionDataset
    return cls(root, split)
