"""Dataset builds on disk: experiment specs, manifests, verification, stats.

A build is fully determined by (ExperimentSpec, master seed): per-problem
seeds are sha256(master:split:index), complexity levels are assigned by an
exact repeating ratio pattern, and the manifest plus every PNG are
byte-stable across runs.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import composition, rotation
from .composition import (
    COMPOSITION_LEVELS,
    Candidate,
    CompositionProblem,
    DistractorSpec,
)
from .errors import AmbiguousProblem, CorruptManifest, MissingImage
from .lattice import EdgeSpec, build_polyomino
from .planar import (
    ANCHOR_HI,
    ANCHOR_LO,
    CutLine,
    Placement,
    Polygon,
    piece_area_in_range,
    polygon_area,
)
from .render import (
    DEFAULT_STYLE,
    STYLE_VERSION,
    RenderStyle,
    render_polygon,
    render_polyomino,
    write_png,
)
from .rotation import ROTATION_LEVELS, PoseAngles, RotationProblem

LIBRARY_VERSION = "0.1.0"
SPLITS = ("train", "val", "test_in", "test_out")
DEFAULT_SIZES = (7000, 1000, 1000, 1000)
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class ExperimentSpec:
    """One |TR -> TE| dataset build."""

    task: str
    train_levels: tuple[int, ...]
    ratios: tuple[int, ...] = ()
    test_levels: tuple[int, ...] = ()
    sizes: tuple[int, int, int, int] = DEFAULT_SIZES
    seed: int = 0
    img_size: int = 224
    style: RenderStyle = field(default=DEFAULT_STYLE)

    def __post_init__(self):
        object.__setattr__(self, "train_levels", tuple(self.train_levels))
        object.__setattr__(self, "test_levels", tuple(self.test_levels))
        object.__setattr__(self, "sizes", tuple(self.sizes))
        ratios = tuple(self.ratios) if self.ratios else (1,) * len(self.train_levels)
        object.__setattr__(self, "ratios", ratios)
        if self.task not in ("rotation", "composition"):
            raise ValueError("task must be 'rotation' or 'composition'")
        valid = ROTATION_LEVELS if self.task == "rotation" else COMPOSITION_LEVELS
        for lv in (*self.train_levels, *self.test_levels):
            if lv not in valid:
                raise ValueError(f"level {lv} invalid for task {self.task} (valid: {valid})")
        if len(ratios) != len(self.train_levels):
            raise ValueError("one ratio weight per train level required")
        if any(r <= 0 for r in ratios):
            raise ValueError("ratio weights must be positive")
        if len(self.sizes) != 4 or any(s < 0 for s in self.sizes):
            raise ValueError("sizes must be 4 non-negative split sizes")
        if self.sizes[3] > 0 and not self.test_levels:
            raise ValueError("out-dist split requested but no test levels given")
        if set(self.test_levels) & set(self.train_levels):
            raise ValueError("extrapolation test levels must be disjoint from train levels")

    def to_config(self) -> dict:
        return {
            "task": self.task,
            "train_levels": list(self.train_levels),
            "ratios": list(self.ratios),
            "test_levels": list(self.test_levels),
            "sizes": list(self.sizes),
            "seed": self.seed,
            "img_size": self.img_size,
            "style": {
                "shades": list(self.style.shades),
                "outline": self.style.outline,
                "outline_level": self.style.outline_level,
                "margin": self.style.margin,
            },
        }


def config_hash(spec: ExperimentSpec) -> str:
    blob = json.dumps(spec.to_config(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def problem_seed(master: int, split: str, index: int) -> int:
    digest = hashlib.sha256(f"{master}:{split}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def level_pattern(levels, ratios) -> tuple[int, ...]:
    """Repeating level sequence realizing the ratio weights exactly."""
    out = []
    for lv, w in zip(levels, ratios):
        out.extend([lv] * w)
    return tuple(out)


# ---------------------------------------------------------------------------
# manifest (de)serialization helpers
# ---------------------------------------------------------------------------

def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _frac(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def _poly_json(p: Polygon) -> list:
    return [[_frac_str(x), _frac_str(y)] for x, y in p.vertices]


def _poly_from(data) -> Polygon:
    return Polygon([(_frac(x), _frac(y)) for x, y in data], check_simple=False)


def _pose_json(pose: PoseAngles) -> list:
    return [pose.alpha_v, pose.alpha_h, pose.base_v, pose.base_h]


def _pose_from(data) -> PoseAngles:
    return PoseAngles(data[0], data[1], int(data[2]), int(data[3]))


def rotation_record(pid: str, split: str, prob: RotationProblem) -> dict:
    return {
        "id": pid,
        "split": split,
        "task": "rotation",
        "level": prob.level,
        "seed": prob.seed,
        "answer_index": prob.answer_index,
        "lengths": list(prob.question[0].lengths),
        "question_directions": list(prob.question[0].directions),
        "candidate_directions": [list(s.directions) for s, _pose in prob.candidates],
        "poses": [_pose_json(prob.question[1])]
        + [_pose_json(pose) for _spec, pose in prob.candidates],
    }


def rotation_from_record(rec: dict) -> RotationProblem:
    lengths = tuple(rec["lengths"])
    q_spec = EdgeSpec(lengths, tuple(rec["question_directions"]))
    poses = [_pose_from(p) for p in rec["poses"]]
    cands = tuple(
        (EdgeSpec(lengths, tuple(d)), poses[i + 1])
        for i, d in enumerate(rec["candidate_directions"])
    )
    return RotationProblem(
        level=rec["level"],
        question=(q_spec, poses[0]),
        candidates=cands,
        answer_index=rec["answer_index"],
        seed=rec["seed"],
    )


def _placement_json(pl: Placement) -> dict:
    return {
        "rotation": pl.rotation_deg,
        "translation": [_frac_str(pl.translation[0]), _frac_str(pl.translation[1])],
    }


def _candidate_json(c: Candidate) -> dict:
    return {
        "pieces": [_poly_json(p) for p in c.pieces],
        "rotations": list(c.rotations),
        "placements": None
        if c.placements is None
        else [_placement_json(pl) for pl in c.placements],
        "distractor": None
        if c.distractor is None
        else {
            "kind": c.distractor.kind,
            "piece_index": c.distractor.piece_index,
            "scale_factor": None
            if c.distractor.scale_factor is None
            else _frac_str(c.distractor.scale_factor),
        },
    }


def _candidate_from(data) -> Candidate:
    d = data["distractor"]
    return Candidate(
        pieces=tuple(_poly_from(p) for p in data["pieces"]),
        rotations=tuple(data["rotations"]),
        placements=None
        if data["placements"] is None
        else tuple(
            Placement(pl["rotation"], (_frac(pl["translation"][0]), _frac(pl["translation"][1])))
            for pl in data["placements"]
        ),
        distractor=None
        if d is None
        else DistractorSpec(
            d["kind"],
            d["piece_index"],
            None if d["scale_factor"] is None else _frac(d["scale_factor"]),
        ),
    )


def composition_record(pid: str, split: str, prob: CompositionProblem) -> dict:
    return {
        "id": pid,
        "split": split,
        "task": "composition",
        "level": prob.level,
        "seed": prob.seed,
        "answer_index": prob.answer_index,
        "original": _poly_json(prob.original),
        "original_cuts": [
            {"slope_deg": c.slope_deg, "anchor": _frac_str(c.anchor), "negate": c.negate}
            for c in prob.original_cuts
        ],
        "candidates": [_candidate_json(c) for c in prob.candidates],
    }


def composition_from_record(rec: dict) -> CompositionProblem:
    return CompositionProblem(
        level=rec["level"],
        original=_poly_from(rec["original"]),
        original_cuts=tuple(
            CutLine(c["slope_deg"], _frac(c["anchor"]), c["negate"])
            for c in rec["original_cuts"]
        ),
        candidates=tuple(_candidate_from(c) for c in rec["candidates"]),
        answer_index=rec["answer_index"],
        seed=rec["seed"],
    )


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

def _render_rotation_images(prob: RotationProblem, spec: ExperimentSpec, img_dir: Path):
    paths = {}
    blocks_cache = {}

    def blocks_of(espec):
        if espec not in blocks_cache:
            blocks_cache[espec] = build_polyomino(espec)
        return blocks_cache[espec]

    items = [("q", *prob.question)] + [
        (f"c{i}", s, p) for i, (s, p) in enumerate(prob.candidates)
    ]
    for name, espec, pose in items:
        img = render_polyomino(blocks_of(espec), pose, spec.style, spec.img_size)
        write_png(img_dir / f"{name}.png", img)
        paths[name] = f"{name}.png"
    return paths


def _render_composition_images(prob: CompositionProblem, spec: ExperimentSpec, img_dir: Path):
    paths = {}
    img = render_polygon(prob.original, spec.img_size)
    write_png(img_dir / "q.png", img)
    paths["q"] = "q.png"
    for ci, cand in enumerate(prob.candidates):
        for pi, piece in enumerate(cand.pieces):
            name = f"c{ci}_p{pi}"
            write_png(img_dir / f"{name}.png", render_polygon(piece, spec.img_size))
            paths[name] = f"{name}.png"
    return paths


def build_dataset(spec: ExperimentSpec, out_dir) -> dict:
    """Generate, render, and write a dataset; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for split, size in zip(SPLITS, spec.sizes):
        if size == 0:
            continue
        if split == "test_out":
            pattern = level_pattern(spec.test_levels, (1,) * len(spec.test_levels))
        else:
            pattern = level_pattern(spec.train_levels, spec.ratios)
        for i in range(size):
            level = pattern[i % len(pattern)]
            seed = problem_seed(spec.seed, split, i)
            rng = random.Random(seed)
            pid = f"{split}-{i:06d}"
            img_dir = out / "images" / pid
            img_dir.mkdir(parents=True, exist_ok=True)
            if spec.task == "rotation":
                prob = rotation.sample_problem_spec(level, rng, seed)
                rel = _render_rotation_images(prob, spec, img_dir)
                rec = rotation_record(pid, split, prob)
            else:
                prob = composition.sample_problem_spec(level, rng, seed)
                rel = _render_composition_images(prob, spec, img_dir)
                rec = composition_record(pid, split, prob)
            images = {k: f"images/{pid}/{v}" for k, v in rel.items()}
            digests = {
                k: hashlib.sha256((out / p).read_bytes()).hexdigest()
                for k, p in images.items()
            }
            rec["images"] = images
            rec["digests"] = digests
            records.append(rec)
    manifest = {
        "config": spec.to_config(),
        "config_hash": config_hash(spec),
        "library_version": LIBRARY_VERSION,
        "style_version": STYLE_VERSION,
        "problems": records,
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, sort_keys=True, indent=1))
    return manifest


def load_manifest(dataset_dir) -> dict:
    path = Path(dataset_dir) / MANIFEST_NAME
    if not path.is_file():
        raise CorruptManifest(f"no {MANIFEST_NAME} in {dataset_dir}")
    try:
        manifest = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CorruptManifest(f"unreadable manifest: {e}") from e
    if "problems" not in manifest or "config" not in manifest:
        raise CorruptManifest("manifest missing required keys")
    return manifest


# ---------------------------------------------------------------------------
# verification and statistics
# ---------------------------------------------------------------------------

def _audit_rotation(rec: dict, prob: RotationProblem) -> list[str]:
    bad = []
    for espec in [prob.question[0]] + [s for s, _ in prob.candidates]:
        if any(not 3 <= n <= 9 for n in espec.lengths):
            bad.append("edge length outside [3,9]")
    poses = [prob.question[1]] + [p for _, p in prob.candidates]
    for pose in poses:
        for ang, base in ((pose.alpha_v, pose.base_v), (pose.alpha_h, pose.base_h)):
            if not base + 15 <= ang < base + 75:
                bad.append(f"angle {ang} outside [{base + 15}, {base + 75})")
    pairs = [(p.base_v, p.base_h) for p in poses]
    if len(set(pairs)) != 5:
        bad.append("interval pairs not pairwise distinct")
    return bad


def _audit_composition(rec: dict, prob: CompositionProblem) -> list[str]:
    bad = []
    if polygon_area(prob.original) <= 25000:
        bad.append("original area <= 25000")
    for cut in prob.original_cuts:
        if not ANCHOR_LO <= cut.anchor <= ANCHOR_HI:
            bad.append(f"cut anchor {float(cut.anchor)} outside [56,168]")
    correct = prob.candidates[prob.answer_index]
    for piece in correct.pieces:
        if not piece_area_in_range(piece, prob.level):
            bad.append("correct piece area out of range")
    for cand in prob.candidates:
        for r in cand.rotations:
            if r not in (0, 90, 180, 270):
                bad.append(f"piece rotation {r} not a quarter turn")
        for pl in cand.placements or ():
            if pl.rotation_deg not in (0, 90, 180, 270):
                bad.append("placement rotation not a quarter turn")
    return bad


def verify_dataset(dataset_dir) -> dict:
    """Re-run the oracle on every problem and audit all constraints.

    Raises MissingImage if a referenced file is absent; returns a report
    dict with pass/failure details."""
    root = Path(dataset_dir)
    manifest = load_manifest(root)
    failures = []
    violations = []
    digest_mismatches = []
    n = 0
    for rec in manifest["problems"]:
        n += 1
        pid = rec["id"]
        for key, relpath in rec.get("images", {}).items():
            path = root / relpath
            if not path.is_file():
                raise MissingImage(str(relpath))
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            if digest != rec["digests"][key]:
                digest_mismatches.append(f"{pid}:{key}")
        try:
            if rec["task"] == "rotation":
                prob = rotation_from_record(rec)
                solved = rotation.solve_rotation(prob)
                violations += [f"{pid}: {v}" for v in _audit_rotation(rec, prob)]
            else:
                prob = composition_from_record(rec)
                solved = composition.solve_composition(prob)
                violations += [f"{pid}: {v}" for v in _audit_composition(rec, prob)]
        except AmbiguousProblem as e:
            failures.append(f"{pid}: ambiguous ({e})")
            continue
        if solved != rec["answer_index"]:
            failures.append(f"{pid}: oracle={solved} label={rec['answer_index']}")
    report = {
        "problems": n,
        "passes": n - len(failures),
        "failures": failures,
        "constraint_violations": violations,
        "digest_mismatches": digest_mismatches,
        "ok": not failures and not violations and not digest_mismatches,
    }
    return report


def stats(dataset_dir) -> dict:
    """Per-level counts per split, answer histogram, area/angle summaries."""
    manifest = load_manifest(dataset_dir)
    per_split: dict[str, dict[int, int]] = {}
    answer_hist = [0, 0, 0, 0]
    areas = []
    angles = []
    for rec in manifest["problems"]:
        per_split.setdefault(rec["split"], {}).setdefault(rec["level"], 0)
        per_split[rec["split"]][rec["level"]] += 1
        answer_hist[rec["answer_index"]] += 1
        if rec["task"] == "composition":
            areas.append(float(polygon_area(_poly_from(rec["original"]))))
        else:
            for pose in rec["poses"]:
                angles.extend([pose[0], pose[1]])
    out = {
        "config": manifest["config"],
        "splits": {
            s: {"total": sum(levels.values()), "by_level": dict(sorted(levels.items()))}
            for s, levels in per_split.items()
        },
        "answer_histogram": answer_hist,
    }
    if areas:
        out["original_area"] = {
            "min": min(areas), "max": max(areas), "mean": sum(areas) / len(areas),
        }
    if angles:
        out["angles"] = {
            "min": min(angles), "max": max(angles), "mean": sum(angles) / len(angles),
        }
    return out
