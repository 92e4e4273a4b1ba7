"""Grad-CAM over the encoder's convolutional layers.

Heatmaps are taken at a chosen conv layer (default the third), one per
input image, with respect to the predicted candidate's score.  Raw maps
keep the layer's spatial size; overlays are upsampled onto the inputs.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image


def _collect(encoder, layer: int):
    """Forward hook capturing activations (with grad) of the given conv."""
    if not 1 <= layer <= len(encoder.convs):
        raise ValueError(f"layer must be in 1..{len(encoder.convs)}")
    captured = []

    def hook(_mod, _inp, out):
        out.retain_grad()
        captured.append(out)

    handle = encoder.convs[layer - 1].register_forward_hook(hook)
    return captured, handle


def _cam_from(activation: torch.Tensor, grad: torch.Tensor) -> torch.Tensor:
    """(C, h, w) activation and its gradient -> normalized (h, w) map."""
    weights = grad.mean(dim=(-2, -1), keepdim=True)
    cam = F.relu((weights * activation).sum(dim=-3)).detach()
    peak = cam.max()
    if peak > 0:
        cam = cam / peak
    return cam


def gradcam(model, item, layer: int = 3) -> dict[str, torch.Tensor]:
    """Heatmaps for every image of one dataset item.

    Returns {"q": map, "c0": map, ...} for rotation items and
    {"q": map, "c0_p0": map, ...} for composition items; maps are (h, w)
    tensors in [0, 1] at the conv layer's spatial resolution.
    """
    if not getattr(model, "trained", False):
        warnings.warn("running Grad-CAM on an untrained model")
    model.eval()
    encoders = ([model.encoder] if hasattr(model, "encoder")
                else [model.encoder_q, model.encoder_p])
    captured, handles = [], []
    for enc in encoders:
        cap, handle = _collect(enc, layer)
        captured.append(cap)
        handles.append(handle)
    try:
        *inputs, _answer = item
        batch = [x.unsqueeze(0) for x in inputs]
        scores = model(*batch)
        pred = int(scores.argmin(1) if model.eval_rule == "argmin" else scores.argmax(1))
        scores[0, pred].backward()
    finally:
        for handle in handles:
            handle.remove()

    out = {}
    if len(encoders) == 1:                       # rotation: q then 4 candidates
        q_act, c_act = captured[0]
        out["q"] = _cam_from(q_act[0], q_act.grad[0])
        for i in range(c_act.shape[0]):
            out[f"c{i}"] = _cam_from(c_act[i], c_act.grad[i])
    else:                                        # composition: q and piece grid
        q_act = captured[0][0]
        out["q"] = _cam_from(q_act[0], q_act.grad[0])
        pieces = captured[1][0]                  # one row per non-blank slot
        counts = inputs[2]
        j = 0
        for ci, n in enumerate(counts.tolist()):
            for pi in range(int(n)):
                out[f"c{ci}_p{pi}"] = _cam_from(pieces[j], pieces.grad[j])
                j += 1
    return out


def save_overlays(cams: dict[str, torch.Tensor], item, out_dir) -> list[Path]:
    """Upsample each map onto its source image and write PNG overlays."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    *inputs, _answer = item
    images = {"q": inputs[0][0]}
    if len(inputs) == 2:                         # rotation candidates
        for i in range(inputs[1].shape[0]):
            images[f"c{i}"] = inputs[1][i, 0]
    else:                                        # composition pieces
        counts = inputs[2]
        for ci, n in enumerate(counts.tolist()):
            for pi in range(int(n)):
                images[f"c{ci}_p{pi}"] = inputs[1][ci, pi, 0]
    written = []
    for name, cam in cams.items():
        img = images[name]
        up = F.interpolate(cam[None, None], size=img.shape, mode="bilinear",
                           align_corners=False)[0, 0]
        overlay = 0.5 * img + 0.5 * up
        arr = (overlay.detach().numpy() * 255).clip(0, 255).astype(np.uint8)
        path = out / f"{name}_cam.png"
        Image.fromarray(arr, mode="L").save(path)
        written.append(path)
    return written
