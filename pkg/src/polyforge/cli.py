"""The ``forge`` command line tool.

Subcommands: build, verify, stats, render-one, pad.
Exit codes: 0 ok, 1 verification failure, 2 usage/config error, 3 I/O error.

The config path can be overridden with the FORGE_CONFIG environment
variable (a JSON file of ExperimentSpec fields merged under CLI flags).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import composition, rotation
from .dataset import (
    ExperimentSpec,
    build_dataset,
    load_manifest,
    problem_seed,
    stats as dataset_stats,
    verify_dataset,
)
from .errors import CorruptManifest, MissingImage, PolyforgeError
from .lattice import build_polyomino
from .render import (
    DEFAULT_STYLE,
    decode_png,
    pad_and_rescale,
    render_polygon,
    render_polyomino,
    write_png,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(":", ",").split(",") if v != "")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="forge", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("build", help="generate a dataset on disk")
    b.add_argument("--task", choices=("rotation", "composition"), required=True)
    b.add_argument("--train-levels", type=_int_list, required=True)
    b.add_argument("--ratios", type=_int_list, default=())
    b.add_argument("--test-levels", type=_int_list, default=())
    b.add_argument("--sizes", type=_int_list, default=(7000, 1000, 1000, 1000),
                   help="train,val,in-dist-test,out-dist-test")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--img-size", type=int, default=224)
    b.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="re-run the oracle over a dataset")
    v.add_argument("dir")

    s = sub.add_parser("stats", help="summarize a dataset")
    s.add_argument("dir")

    r = sub.add_parser("render-one", help="generate and render a single problem")
    r.add_argument("--task", choices=("rotation", "composition"), required=True)
    r.add_argument("--level", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--img-size", type=int, default=224)
    r.add_argument("--out", default="render-one")

    p = sub.add_parser("pad", help="pad+rescale every PNG into a sibling directory")
    p.add_argument("--margin", type=int, default=50)
    p.add_argument("dir")
    return ap


def _cmd_build(args) -> int:
    cfg = {}
    cfg_path = os.environ.get("FORGE_CONFIG")
    if cfg_path:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            print(f"bad config file {cfg_path}: {e}", file=sys.stderr)
            return EXIT_USAGE
    try:
        spec = ExperimentSpec(
            task=cfg.get("task", args.task),
            train_levels=cfg.get("train_levels", args.train_levels),
            ratios=tuple(cfg.get("ratios", args.ratios)),
            test_levels=tuple(cfg.get("test_levels", args.test_levels)),
            sizes=tuple(cfg.get("sizes", args.sizes)),
            seed=cfg.get("seed", args.seed),
            img_size=cfg.get("img_size", args.img_size),
        )
    except ValueError as e:
        print(f"invalid experiment spec: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        manifest = build_dataset(spec, args.out)
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    print(f"built {len(manifest['problems'])} problems in {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify_dataset(args.dir)
    print(f"problems:  {report['problems']}")
    print(f"passes:    {report['passes']}")
    for key in ("failures", "constraint_violations", "digest_mismatches"):
        for line in report[key]:
            print(f"{key[:-1]}: {line}")
    print("OK" if report["ok"] else "FAILED")
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _cmd_stats(args) -> int:
    out = dataset_stats(args.dir)
    task = out["config"]["task"]
    print(f"task: {task}   seed: {out['config']['seed']}")
    for split, info in out["splits"].items():
        levels = "  ".join(f"L{lv}:{n}" for lv, n in info["by_level"].items())
        print(f"{split:9s} total={info['total']:6d}  {levels}")
    hist = out["answer_histogram"]
    total = max(sum(hist), 1)
    print("answers:  " + "  ".join(f"{i}:{n} ({n / total:.1%})" for i, n in enumerate(hist)))
    for key in ("original_area", "angles"):
        if key in out:
            d = out[key]
            print(f"{key}: min={d['min']:.1f} max={d['max']:.1f} mean={d['mean']:.1f}")
    return EXIT_OK


def _cmd_render_one(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(problem_seed(args.seed, "render-one", 0))
    if args.task == "rotation":
        prob = rotation.sample_problem_spec(args.level, rng, args.seed)
        items = [("q", *prob.question)] + [
            (f"c{i}", s, p) for i, (s, p) in enumerate(prob.candidates)
        ]
        for name, espec, pose in items:
            img = render_polyomino(build_polyomino(espec), pose, DEFAULT_STYLE, args.img_size)
            write_png(out / f"{name}.png", img)
    else:
        prob = composition.sample_problem_spec(args.level, rng, args.seed)
        write_png(out / "q.png", render_polygon(prob.original, args.img_size))
        for ci, cand in enumerate(prob.candidates):
            for pi, piece in enumerate(cand.pieces):
                write_png(out / f"c{ci}_p{pi}.png", render_polygon(piece, args.img_size))
    print(f"answer_index: {prob.answer_index}")
    print(f"images in {out}")
    return EXIT_OK


def _cmd_pad(args) -> int:
    src = Path(args.dir)
    if not src.is_dir():
        print(f"not a directory: {src}", file=sys.stderr)
        return EXIT_USAGE
    dst = src.parent / (src.name + f"_padded{args.margin}")
    count = 0
    for png in sorted(src.rglob("*.png")):
        img = decode_png(png.read_bytes())
        rel = png.relative_to(src)
        target = dst / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        write_png(target, pad_and_rescale(img, args.margin))
        count += 1
    manifest = src / "manifest.json"
    if manifest.is_file():
        (dst / "manifest.json").write_text(manifest.read_text())
    print(f"padded {count} images into {dst}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "build": _cmd_build,
        "verify": _cmd_verify,
        "stats": _cmd_stats,
        "render-one": _cmd_render_one,
        "pad": _cmd_pad,
    }
    try:
        return handlers[args.cmd](args)
    except (CorruptManifest, MissingImage) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except PolyforgeError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
