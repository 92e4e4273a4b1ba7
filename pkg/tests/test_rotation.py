import random

import pytest

from polyforge.errors import AmbiguousProblem
from polyforge.lattice import build_polyomino, canonical_form, equivalent
from polyforge.rotation import (
    INTERVAL_BASES,
    PoseAngles,
    RotationProblem,
    assign_angle_intervals,
    sample_angle,
    sample_pose,
    sample_problem_spec,
    solve_rotation,
)


def test_pose_validation():
    PoseAngles(20.0, 110.0, 0, 90)
    with pytest.raises(ValueError):
        PoseAngles(10.0, 110.0, 0, 90)   # inside the exclusion zone
    with pytest.raises(ValueError):
        PoseAngles(75.0, 110.0, 0, 90)   # interval is half-open
    with pytest.raises(ValueError):
        PoseAngles(20.0, 110.0, 45, 90)  # bad base


def test_sample_angle_respects_interval():
    rng = random.Random(0)
    for base in INTERVAL_BASES:
        for _ in range(300):
            a = sample_angle(base, rng)
            assert base + 15 <= a < base + 75
            assert min(a % 90, 90 - a % 90) >= 15


def test_assign_angle_intervals_distinct_pairs():
    rng = random.Random(1)
    for _ in range(200):
        pairs = assign_angle_intervals(rng)
        assert len(pairs) == 5
        assert len(set(pairs)) == 5
        for bv, bh in pairs:
            assert bv in INTERVAL_BASES and bh in INTERVAL_BASES


@pytest.mark.parametrize("level,k", [(1, 3), (2, 4), (3, 5)])
def test_problem_structure_per_level(level, k):
    prob = sample_problem_spec(level, random.Random(level), level)
    q_spec, q_pose = prob.question
    assert len(q_spec.lengths) == k
    assert all(3 <= n <= 9 for n in q_spec.lengths)
    # shared lengths everywhere; shared directions for distractors only
    for i, (spec, _pose) in enumerate(prob.candidates):
        assert spec.lengths == q_spec.lengths
        if i == prob.answer_index:
            assert spec.directions != q_spec.directions
        else:
            assert spec.directions == q_spec.directions
    pairs = [(q_pose.base_v, q_pose.base_h)] + [
        (p.base_v, p.base_h) for _s, p in prob.candidates
    ]
    assert len(set(pairs)) == 5


def test_oracle_matches_label_on_samples():
    for seed in range(30):
        level = seed % 3 + 1
        prob = sample_problem_spec(level, random.Random(seed), seed)
        assert solve_rotation(prob) == prob.answer_index
        q_blocks = build_polyomino(prob.question[0])
        for i, (spec, _p) in enumerate(prob.candidates):
            same = equivalent(q_blocks, build_polyomino(spec))
            assert same == (i != prob.answer_index)


def test_solver_rejects_all_equivalent():
    prob = sample_problem_spec(1, random.Random(5), 5)
    q_spec, q_pose = prob.question
    cands = tuple((q_spec, pose) for _s, pose in prob.candidates)
    broken = RotationProblem(1, prob.question, cands, 0, 0)
    with pytest.raises(AmbiguousProblem):
        solve_rotation(broken)


def test_solver_rejects_two_odd_candidates():
    prob = sample_problem_spec(1, random.Random(8), 8)
    c_spec = prob.candidates[prob.answer_index][0]
    cands = list(prob.candidates)
    other = (prob.answer_index + 1) % 4
    cands[other] = (c_spec, cands[other][1])
    broken = RotationProblem(1, prob.question, tuple(cands), prob.answer_index, 0)
    with pytest.raises(AmbiguousProblem):
        solve_rotation(broken)


def test_determinism_same_seed_same_spec():
    a = sample_problem_spec(2, random.Random(99), 99)
    b = sample_problem_spec(2, random.Random(99), 99)
    assert a == b


def test_answer_positions_roughly_uniform():
    counts = [0, 0, 0, 0]
    for seed in range(400):
        prob = sample_problem_spec(1, random.Random(seed), seed)
        counts[prob.answer_index] += 1
    assert all(c > 60 for c in counts)
