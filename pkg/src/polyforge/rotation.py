"""Rotation-task problem generation with a built-in exact oracle.

A problem is a question polyomino plus four candidates rendered under
different viewing poses.  Three candidates share the question's block
geometry (rotated views); the correct answer shares edge lengths but uses
different joint directions and is certified non-equivalent by the lattice
oracle before a problem is emitted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import AmbiguousProblem, ResampleExhausted
from .lattice import (
    EdgeSpec,
    MAX_EDGE_LEN,
    MIN_EDGE_LEN,
    build_polyomino,
    canonical_form,
)

ROTATION_LEVELS = (1, 2, 3)      # level -> k = level + 2 edges
INTERVAL_BASES = (0, 90, 180, 270)
INTERVAL_MARGIN = 15             # degrees excluded around each multiple of 90
ANGLE_STEP = 0.1                 # sampling resolution in degrees
RESAMPLE_CAP = 1000


@dataclass(frozen=True)
class PoseAngles:
    """Vertical/horizontal viewing angles with their interval bases."""

    alpha_v: float
    alpha_h: float
    base_v: int
    base_h: int

    def __post_init__(self):
        for ang, base in ((self.alpha_v, self.base_v), (self.alpha_h, self.base_h)):
            if base not in INTERVAL_BASES:
                raise ValueError(f"interval base must be in {INTERVAL_BASES}")
            if not base + INTERVAL_MARGIN <= ang < base + 90 - INTERVAL_MARGIN:
                raise ValueError(f"angle {ang} outside [{base + 15}, {base + 75})")


def sample_angle(base: int, rng: random.Random) -> float:
    """Uniform multiple of 0.1 deg within [base+15, base+75)."""
    steps = int(round((90 - 2 * INTERVAL_MARGIN) / ANGLE_STEP))
    return round(base + INTERVAL_MARGIN + ANGLE_STEP * rng.randrange(steps), 1)


def assign_angle_intervals(rng: random.Random) -> list[tuple[int, int]]:
    """Five pairwise-distinct (vertical, horizontal) interval-base pairs
    drawn from the 4x4 grid."""
    grid = [(v, h) for v in INTERVAL_BASES for h in INTERVAL_BASES]
    return rng.sample(grid, 5)


def sample_pose(bases: tuple[int, int], rng: random.Random) -> PoseAngles:
    bv, bh = bases
    return PoseAngles(sample_angle(bv, rng), sample_angle(bh, rng), bv, bh)


@dataclass(frozen=True)
class RotationProblem:
    """Full generation spec for one problem (images rendered separately).

    ``candidates[i]`` is (EdgeSpec, PoseAngles); candidates[answer_index]
    is the correct answer (the odd one out)."""

    level: int
    question: tuple[EdgeSpec, PoseAngles]
    candidates: tuple[tuple[EdgeSpec, PoseAngles], ...]
    answer_index: int
    seed: int
    image_paths: tuple[str, ...] = field(default=())

    @property
    def k(self) -> int:
        return self.level + 2


def _sample_buildable(lengths, rng: random.Random) -> EdgeSpec:
    for _ in range(RESAMPLE_CAP):
        spec = EdgeSpec(lengths, tuple(rng.randrange(4) for _ in range(len(lengths) - 1)))
        try:
            build_polyomino(spec)
            return spec
        except Exception:
            continue
    raise ResampleExhausted("no overlap-free direction assignment found")


def sample_problem_spec(level: int, rng: random.Random, seed: int = 0) -> RotationProblem:
    """Draw a complete problem spec satisfying all invariants."""
    if level not in ROTATION_LEVELS:
        raise ValueError(f"rotation level must be in {ROTATION_LEVELS}")
    k = level + 2
    for _ in range(RESAMPLE_CAP):
        lengths = tuple(rng.randint(MIN_EDGE_LEN, MAX_EDGE_LEN) for _ in range(k))
        try:
            q_spec = _sample_buildable(lengths, rng)
        except ResampleExhausted:
            continue
        q_key = canonical_form(build_polyomino(q_spec))

        # correct answer: same lengths, different directions, non-equivalent solid
        c_spec = None
        for _ in range(RESAMPLE_CAP):
            cand = EdgeSpec(lengths, tuple(rng.randrange(4) for _ in range(k - 1)))
            if cand.directions == q_spec.directions:
                continue
            try:
                blocks = build_polyomino(cand)
            except Exception:
                continue
            if canonical_form(blocks) != q_key:
                c_spec = cand
                break
        if c_spec is None:
            continue

        pairs = assign_angle_intervals(rng)
        poses = [sample_pose(p, rng) for p in pairs]
        answer_index = rng.randrange(4)
        cands: list[tuple[EdgeSpec, PoseAngles]] = []
        pi = 1
        for i in range(4):
            if i == answer_index:
                cands.append((c_spec, poses[pi]))
            else:
                cands.append((q_spec, poses[pi]))
            pi += 1
        return RotationProblem(
            level=level,
            question=(q_spec, poses[0]),
            candidates=tuple(cands),
            answer_index=answer_index,
            seed=seed,
        )
    raise ResampleExhausted(f"could not build a level-{level} rotation problem")


def solve_rotation(problem: RotationProblem) -> int:
    """Index of the unique candidate not rotation-equivalent to the question."""
    q_key = canonical_form(build_polyomino(problem.question[0]))
    odd = [
        i
        for i, (spec, _pose) in enumerate(problem.candidates)
        if canonical_form(build_polyomino(spec)) != q_key
    ]
    if len(odd) != 1:
        raise AmbiguousProblem(f"{len(odd)} candidates differ from the question")
    return odd[0]
