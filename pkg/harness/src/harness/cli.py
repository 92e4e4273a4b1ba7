"""The ``harness`` command line tool: train baselines, render Grad-CAM maps."""

from __future__ import annotations

import argparse
import sys

from .data import open_dataset
from .models import MODEL_KINDS
from .train import TrainConfig, load_checkpoint, train


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="harness", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    t = sub.add_parser("train", help="train a baseline on a forge dataset")
    t.add_argument("--model", choices=MODEL_KINDS, required=True)
    t.add_argument("--data", required=True, help="forge dataset directory")
    t.add_argument("--config", help="JSON file of TrainConfig overrides")
    t.add_argument("--out", help="directory for metrics.jsonl and model.pt")

    g = sub.add_parser("gradcam", help="write Grad-CAM overlays for one problem")
    g.add_argument("--checkpoint", required=True, help="model.pt from train --out")
    g.add_argument("--data", required=True)
    g.add_argument("--split", default="val")
    g.add_argument("--index", type=int, default=0)
    g.add_argument("--layer", type=int, default=3)
    g.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.cmd == "train":
            config = TrainConfig.from_file(args.config) if args.config else None
            train(args.model, args.data, config, out_dir=args.out)
        else:
            from .gradcam import gradcam, save_overlays

            model = load_checkpoint(args.checkpoint)
            item = open_dataset(args.data, args.split)[args.index]
            written = save_overlays(gradcam(model, item, args.layer), item, args.out)
            print(f"wrote {len(written)} overlays to {args.out}")
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
