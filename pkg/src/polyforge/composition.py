"""Shape-composition problem generation with an exact soundness oracle.

An original polygon is produced by two constrained cuts of the 224x224
square; it is then cut into m pieces which (randomly quarter-turned and
re-centered) form the correct answer.  Wrong candidates replace one piece
with a similar-size foreign piece (twice) or rescale one piece (once);
every wrong candidate carries a total-area mismatch of at least 1% so the
answer is machine-certifiable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    AmbiguousProblem,
    DegenerateCut,
    ResampleExhausted,
    SearchBudgetExceeded,
)
from .planar import (
    ANCHOR_HI,
    ANCHOR_LO,
    CANVAS,
    CUT_SLOPES,
    CutLine,
    Placement,
    Polygon,
    canvas_square,
    convex_intersection_area,
    cut_polygon,
    piece_area_in_range,
    piece_area_range,
    polygon_area,
    transform_polygon,
    verify_cover,
)

COMPOSITION_LEVELS = (2, 3, 4, 5)   # level == number of pieces m
MIN_ORIGINAL_AREA = 25000
RESAMPLE_CAP = 1000

# Replace: new piece area within +-20% of the old but outside +-1%.
REPLACE_BAND = (Fraction(8, 10), Fraction(12, 10))
REPLACE_FORBIDDEN = (Fraction(99, 100), Fraction(101, 100))
# Scale: linear factor in [0.7, 0.9] or [1.1, 1.3].
SCALE_BANDS = ((Fraction(7, 10), Fraction(9, 10)), (Fraction(11, 10), Fraction(13, 10)))
# Certified minimum relative gap between a wrong candidate's total area
# and the original's area.
MIN_AREA_GAP = Fraction(1, 100)


def _tenths(rng: random.Random, lo: Fraction, hi: Fraction) -> Fraction:
    """Uniform multiple of 1/10 in [lo, hi]."""
    lo10 = int(-(-lo * 10 // 1))
    hi10 = int(hi * 10 // 1)
    return Fraction(rng.randint(lo10, hi10), 10)


def sample_cut_line(rng: random.Random, anchor_lo: Fraction, anchor_hi: Fraction) -> CutLine:
    return CutLine(
        slope_deg=rng.choice(CUT_SLOPES),
        anchor=_tenths(rng, anchor_lo, anchor_hi),
        negate=rng.random() < 0.5,
    )


# Rejection sampling below screens candidate cuts with float arithmetic and
# replays the survivors exactly; _EDGE keeps the screen away from the exact
# area thresholds so float rounding cannot flip an accept/reject decision.
_EDGE = 0.5


def _clip_float(verts, slope: float, anchor: float, keep_positive: bool):
    sides = [y - (slope * x + anchor) for x, y in verts]
    out = []
    n = len(verts)
    for i in range(n):
        j = (i + 1) % n
        sa, sb = sides[i], sides[j]
        if (sa >= 0) == keep_positive:
            out.append(verts[i])
        if (sa >= 0) != (sb >= 0) and sa != sb:
            t = sa / (sa - sb)
            ax, ay = verts[i]
            bx, by = verts[j]
            out.append((ax + t * (bx - ax), ay + t * (by - ay)))
    return out


def _area_float(verts) -> float:
    total = 0.0
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        total += ax * by - bx * ay
    return abs(total) / 2


def _cut_float(verts, line: CutLine):
    """Approximate (above, below) float vertex lists, or None on a miss."""
    slope, anchor = float(line.slope), float(line.anchor)
    above = _clip_float(verts, slope, anchor, True)
    below = _clip_float(verts, slope, anchor, False)
    if len(above) < 3 or len(below) < 3:
        return None
    if _area_float(above) < _EDGE or _area_float(below) < _EDGE:
        return None
    return above, below


def generate_original(rng: random.Random) -> tuple[Polygon, list[CutLine]]:
    """Two constrained cuts of the square, keeping one side per cut;
    accepted only when the final area exceeds 25000."""
    sq = canvas_square()
    for _ in range(RESAMPLE_CAP):
        verts = [(0.0, 0.0), (224.0, 0.0), (224.0, 224.0), (0.0, 224.0)]
        lines = []
        keeps = []
        for _ in range(2):
            line = sample_cut_line(rng, ANCHOR_LO, ANCHOR_HI)
            halves = _cut_float(verts, line)
            if halves is None:
                break
            keep_above = rng.random() < 0.5
            verts = halves[0] if keep_above else halves[1]
            lines.append(line)
            keeps.append(keep_above)
        if len(lines) < 2 or _area_float(verts) <= MIN_ORIGINAL_AREA + _EDGE:
            continue
        try:
            poly = sq
            for line, keep_above in zip(lines, keeps):
                above, below = cut_polygon(poly, line)
                poly = above if keep_above else below
        except DegenerateCut:
            continue
        if polygon_area(poly) > MIN_ORIGINAL_AREA:
            return poly, lines
    raise ResampleExhausted("no admissible original after two cuts")


def _bbox_float(verts):
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    return min(xs), min(ys), max(xs), max(ys)


def _piece_cut_line(verts, rng: random.Random) -> CutLine:
    """A cut line through an interior point of the piece's bounding box."""
    xmin, ymin, xmax, ymax = _bbox_float(verts)
    slope_deg = rng.choice(CUT_SLOPES)
    negate = rng.random() < 0.5
    x0 = Fraction(rng.randint(int(xmin * 10 + 1), int(xmax * 10)), 10)
    y0 = Fraction(rng.randint(int(ymin * 10 + 1), int(ymax * 10)), 10)
    anchor = y0 - CutLine(slope_deg, 0, negate).slope * x0
    return CutLine(slope_deg, anchor, negate)


def cut_into_pieces(
    original: Polygon, m: int, rng: random.Random
) -> list[Polygon]:
    """Cut ``original`` into m pieces by m-1 sequential cuts, always cutting
    the currently largest piece; every piece must land in the level's area
    band.  Pieces are returned in original-frame coordinates."""
    if m not in COMPOSITION_LEVELS:
        raise ValueError(f"piece count must be in {COMPOSITION_LEVELS}")
    lo, hi = piece_area_range(m)
    fverts = [(float(x), float(y)) for x, y in original.vertices]
    for _ in range(RESAMPLE_CAP):
        pieces = [fverts]
        plan = []                    # (piece index, line) per accepted cut
        failed = False
        for _ in range(m - 1):
            target_i = max(range(len(pieces)), key=lambda i: _area_float(pieces[i]))
            target = pieces.pop(target_i)
            success = False
            for _ in range(50):
                line = _piece_cut_line(target, rng)
                halves = _cut_float(target, line)
                if halves is None:
                    continue
                a, b = halves
                if _area_float(a) >= lo + _EDGE and _area_float(b) >= lo + _EDGE:
                    pieces.extend([a, b])
                    plan.append((target_i, line))
                    success = True
                    break
            if not success:
                failed = True
                break
        if failed:
            continue
        if any(_area_float(p) > hi - _EDGE for p in pieces):
            continue
        # replay the accepted cut sequence exactly; the float screen kept a
        # safety edge, so a failure here is a borderline case worth skipping
        try:
            exact = [original]
            for target_i, line in plan:
                a, b = cut_polygon(exact.pop(target_i), line)
                exact.extend([a, b])
        except DegenerateCut:
            continue
        if all(piece_area_in_range(p, m) for p in exact):
            return exact
    raise ResampleExhausted(f"could not cut original into {m} in-range pieces")


def center_piece(piece: Polygon, rotation_deg: int, canvas: int = CANVAS):
    """Rotate ``piece`` by a quarter turn and translate it to the center of
    its own canvas.  Returns (canvas_piece, placement) where ``placement``
    maps the canvas piece back onto its original-frame position."""
    rot = Placement(rotation_deg, (0, 0))
    rotated = transform_polygon(piece, rot)
    xmin, ymin, xmax, ymax = rotated.bbox()
    # snap the centering shift to half-pixels so stored coordinates stay tidy
    tx = Fraction(round(float((canvas - (xmin + xmax)) / 2) * 2), 2)
    ty = Fraction(round(float((canvas - (ymin + ymax)) / 2) * 2), 2)
    canvas_piece = transform_polygon(rotated, Placement(0, (tx, ty)))
    inv_rot = (360 - rotation_deg) % 360
    # placement = inverse rotation applied after undoing the translation:
    # p_orig = R_inv * (p_canvas - t)  =  R_inv*p_canvas + R_inv*(-t)
    neg = (-tx, -ty)
    back = Placement(inv_rot, (0, 0)).apply(neg)
    placement = Placement(inv_rot, back)
    return canvas_piece, placement


@dataclass(frozen=True)
class DistractorSpec:
    kind: str                      # "replace" | "scale"
    piece_index: int
    scale_factor: Fraction | None = None


@dataclass(frozen=True)
class Candidate:
    """One answer option: m piece polygons in their own canvases."""

    pieces: tuple[Polygon, ...]
    rotations: tuple[int, ...]
    placements: tuple[Placement, ...] | None = None   # correct answer only
    distractor: DistractorSpec | None = None


@dataclass(frozen=True)
class CompositionProblem:
    level: int                     # == m, the number of pieces
    original: Polygon
    original_cuts: tuple[CutLine, ...]
    candidates: tuple[Candidate, ...]
    answer_index: int
    seed: int
    image_paths: tuple[str, ...] = field(default=())


class DonorPool:
    """Pieces harvested from independently generated originals (same
    pipeline), shared across a problem's replace distractors."""

    def __init__(self, m: int, rng: random.Random):
        self.m = m
        self.rng = rng
        self.pieces: list[Polygon] = []

    def _grow(self):
        donor, _ = generate_original(self.rng)
        fresh = cut_into_pieces(donor, self.m, self.rng)
        self.rng.shuffle(fresh)
        self.pieces.extend(fresh)

    GROW_CAP = 50

    def take(self, predicate) -> Polygon:
        for _ in range(self.GROW_CAP):
            for i, cand in enumerate(self.pieces):
                if predicate(cand):
                    return self.pieces.pop(i)
            try:
                self._grow()
            except ResampleExhausted:
                continue
        raise ResampleExhausted("no admissible replacement piece found")


def _harvest_replacement(area: Fraction, original_area: Fraction,
                         pool: DonorPool) -> Polygon:
    """A foreign piece of similar size that certifies a >=1% total-area gap."""
    lo, hi = REPLACE_BAND[0] * area, REPLACE_BAND[1] * area
    f_lo, f_hi = REPLACE_FORBIDDEN[0] * area, REPLACE_FORBIDDEN[1] * area

    def admissible(cand: Polygon) -> bool:
        a = polygon_area(cand)
        return (lo <= a <= hi and not f_lo <= a <= f_hi
                and abs(a - area) / original_area >= MIN_AREA_GAP)

    return pool.take(admissible)


def make_distractor(
    correct_pieces,
    rotations,
    original_area: Fraction,
    kind: str,
    rng: random.Random,
    m: int,
    pool: DonorPool | None = None,
) -> Candidate:
    """Swap or rescale exactly one piece of the correct answer; the result's
    total area differs from the original's by >=1% relative."""
    if kind not in ("replace", "scale"):
        raise ValueError("distractor kind must be 'replace' or 'scale'")
    for _ in range(RESAMPLE_CAP):
        idx = rng.randrange(len(correct_pieces))
        area = polygon_area(correct_pieces[idx])
        new_rotations = list(rotations)
        if kind == "scale":
            band = SCALE_BANDS[rng.randrange(2)]
            factor = Fraction(rng.randint(int(band[0] * 100), int(band[1] * 100)), 100)
            if abs(factor * factor - 1) * area / original_area < MIN_AREA_GAP:
                continue
            cx, cy = correct_pieces[idx].centroid()
            scaled = Polygon(
                [(cx + factor * (x - cx), cy + factor * (y - cy))
                 for x, y in correct_pieces[idx].vertices],
                check_simple=False,
            )
            xmin, ymin, xmax, ymax = scaled.bbox()
            if xmin < 0 or ymin < 0 or xmax > CANVAS or ymax > CANVAS:
                scaled, _ = center_piece(scaled, 0)
                xmin, ymin, xmax, ymax = scaled.bbox()
                if xmin < 0 or ymin < 0 or xmax > CANVAS or ymax > CANVAS:
                    continue
            new_piece, spec = scaled, DistractorSpec("scale", idx, factor)
        else:
            # the band caps the reachable gap at 20% of the piece's area, so
            # small pieces can never certify 1% of the original; skip them
            # (the largest piece, >= original/m, is always feasible)
            if REPLACE_BAND[1] * area - area < MIN_AREA_GAP * original_area:
                continue
            if pool is None:
                pool = DonorPool(m, rng)
            try:
                repl = _harvest_replacement(area, original_area, pool)
            except ResampleExhausted:
                continue
            rot = rng.choice((0, 90, 180, 270))
            new_piece, _ = center_piece(repl, rot)
            new_rotations[idx] = rot
            spec = DistractorSpec("replace", idx)
        pieces = list(correct_pieces)
        pieces[idx] = new_piece
        total = sum(polygon_area(p) for p in pieces)
        if abs(total - original_area) / original_area >= MIN_AREA_GAP:
            return Candidate(tuple(pieces), tuple(new_rotations), distractor=spec)
    raise ResampleExhausted(f"could not build a certified {kind} distractor")


def sample_problem_spec(level: int, rng: random.Random, seed: int = 0) -> CompositionProblem:
    """Draw a complete composition problem satisfying all invariants."""
    m = level
    for _ in range(RESAMPLE_CAP):
        try:
            original, cuts = generate_original(rng)
            frame_pieces = cut_into_pieces(original, m, rng)
        except ResampleExhausted:
            continue
        rotations = [rng.choice((0, 90, 180, 270)) for _ in range(m)]
        canvased = [center_piece(p, r) for p, r in zip(frame_pieces, rotations)]
        pieces = tuple(c[0] for c in canvased)
        placements = tuple(c[1] for c in canvased)
        correct = Candidate(pieces, tuple(rotations), placements=placements)
        if not verify_cover(original, list(pieces), list(placements)):
            continue
        area = polygon_area(original)
        pool = DonorPool(m, rng)
        try:
            wrong = [
                make_distractor(pieces, rotations, area, "replace", rng, m, pool),
                make_distractor(pieces, rotations, area, "replace", rng, m, pool),
                make_distractor(pieces, rotations, area, "scale", rng, m, pool),
            ]
        except ResampleExhausted:
            continue
        answer_index = rng.randrange(4)
        cands = []
        wi = 0
        for i in range(4):
            if i == answer_index:
                cands.append(correct)
            else:
                cands.append(wrong[wi])
                wi += 1
        return CompositionProblem(
            level=level,
            original=original,
            original_cuts=tuple(cuts),
            candidates=tuple(cands),
            answer_index=answer_index,
            seed=seed,
        )
    raise ResampleExhausted(f"could not build a level-{level} composition problem")


def solve_composition(problem: CompositionProblem) -> int:
    """Index of the unique candidate whose total piece area equals the
    original's exactly (and, when placements are recorded, replays to an
    exact cover)."""
    area = polygon_area(problem.original)
    feasible = []
    for i, cand in enumerate(problem.candidates):
        if sum(polygon_area(p) for p in cand.pieces) != area:
            continue
        if cand.placements is not None and not verify_cover(
            problem.original, list(cand.pieces), list(cand.placements)
        ):
            continue
        feasible.append(i)
    if len(feasible) != 1:
        raise AmbiguousProblem(f"{len(feasible)} candidates pass the area certificate")
    return feasible[0]


def brute_force_tiling(
    original: Polygon, pieces, budget: int = 2_000_000
) -> bool:
    """Independent small-instance tiling oracle (tests only, <=3 pieces).

    Exhaustively tries, for every piece, all 4 quarter-turn rotations and
    every translation aligning a piece vertex with an original vertex, and
    checks containment/disjointness/area exactly.  In any 2-piece tiling of
    a convex polygon each piece touches an original vertex, so the search
    is exhaustive for m=2; for 3 pieces it is sound but may miss tilings
    whose middle piece avoids every original vertex."""
    if len(pieces) > 3:
        raise ValueError("brute_force_tiling handles at most 3 pieces")
    area = polygon_area(original)
    if sum(polygon_area(p) for p in pieces) != area:
        return False

    # candidate placements per piece: rotation x (piece vertex -> original vertex)
    options = []
    for piece in pieces:
        opts = []
        for rot in (0, 90, 180, 270):
            turned = transform_polygon(piece, Placement(rot, (0, 0)))
            for pv in turned.vertices:
                for ov in original.vertices:
                    pl = Placement(rot, (ov[0] - pv[0], ov[1] - pv[1]))
                    moved = transform_polygon(piece, pl)
                    if convex_intersection_area(moved, original) == polygon_area(moved):
                        opts.append(moved)
        options.append(opts)

    counter = [0]

    def search(i: int, placed: list) -> bool:
        if i == len(pieces):
            return True
        for moved in options[i]:
            counter[0] += 1
            if counter[0] > budget:
                raise SearchBudgetExceeded(f"more than {budget} placements tried")
            if all(convex_intersection_area(moved, q) == 0 for q in placed):
                placed.append(moved)
                if search(i + 1, placed):
                    return True
                placed.pop()
        return False

    return search(0, [])
