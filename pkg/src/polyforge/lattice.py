"""Integer-lattice 3D polyominoes: construction and exact rotation equivalence.

A polyomino is built from straight edges of unit cubes joined at right
angles, with consecutive edges sharing one joining block.  Equivalence is
decided exactly by canonicalizing over the 24 proper rotations of the cube
(mirrors are never applied).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .errors import OverlapError

Coord = tuple[int, int, int]

MIN_EDGE_LEN = 3
MAX_EDGE_LEN = 9
EDGE_COUNTS = (3, 4, 5)      # edge counts used by the generator (k = level + 2)


def _proper_rotations() -> tuple[tuple[tuple[int, int, int], ...], ...]:
    """All 24 orientation-preserving signed-permutation matrices, det +1."""
    mats = []
    for perm in permutations(range(3)):
        for signs in product((1, -1), repeat=3):
            m = [[0, 0, 0] for _ in range(3)]
            for row, (col, s) in enumerate(zip(perm, signs)):
                m[row][col] = s
            det = sum(
                m[0][i] * (m[1][(i + 1) % 3] * m[2][(i + 2) % 3]
                           - m[1][(i + 2) % 3] * m[2][(i + 1) % 3])
                for i in range(3)
            )
            if det == 1:
                mats.append(tuple(tuple(r) for r in m))
    mats.sort()
    return tuple(mats)


ROTATIONS = _proper_rotations()
assert len(ROTATIONS) == 24


def _apply(mat, c: Coord) -> Coord:
    return (
        mat[0][0] * c[0] + mat[0][1] * c[1] + mat[0][2] * c[2],
        mat[1][0] * c[0] + mat[1][1] * c[1] + mat[1][2] * c[2],
        mat[2][0] * c[0] + mat[2][1] * c[1] + mat[2][2] * c[2],
    )


@dataclass(frozen=True)
class EdgeSpec:
    """Edge lengths plus the perpendicular direction chosen at each joint."""

    lengths: tuple[int, ...]
    directions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(self.lengths))
        object.__setattr__(self, "directions", tuple(self.directions))
        k = len(self.lengths)
        if not 2 <= k <= max(EDGE_COUNTS):
            raise ValueError(f"edge count must be in [2, {max(EDGE_COUNTS)}], got {k}")
        if len(self.directions) != k - 1:
            raise ValueError("need exactly k-1 direction codes")
        if any(not MIN_EDGE_LEN <= n <= MAX_EDGE_LEN for n in self.lengths):
            raise ValueError(f"edge lengths must lie in [{MIN_EDGE_LEN}, {MAX_EDGE_LEN}]")
        if any(d not in (0, 1, 2, 3) for d in self.directions):
            raise ValueError("direction codes must be in {0,1,2,3}")

    @property
    def block_count(self) -> int:
        return sum(self.lengths) - (len(self.lengths) - 1)


class BlockSet:
    """Immutable set of unit-cube coordinates on the integer lattice."""

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        blocks = frozenset(tuple(map(int, b)) for b in blocks)
        if not blocks:
            raise ValueError("BlockSet cannot be empty")
        if len(blocks) > 1 and not _face_connected(blocks):
            raise ValueError("blocks must be face-connected")
        self.blocks = blocks

    def __len__(self):
        return len(self.blocks)

    def __eq__(self, other):
        return isinstance(other, BlockSet) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"BlockSet({sorted(self.blocks)})"


def _face_connected(blocks) -> bool:
    start = next(iter(blocks))
    seen = {start}
    stack = [start]
    while stack:
        x, y, z = stack.pop()
        for nb in ((x + 1, y, z), (x - 1, y, z), (x, y + 1, z),
                   (x, y - 1, z), (x, y, z + 1), (x, y, z - 1)):
            if nb in blocks and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(blocks)


_AXES: tuple[Coord, ...] = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def perpendicular_steps(axis: Coord) -> tuple[Coord, ...]:
    """The 4 unit steps perpendicular to ``axis``, ordered +a, -a, +b, -b
    with (a, b) the two non-axis coordinates in xyz order."""
    free = [i for i in range(3) if axis[i] == 0]
    steps = []
    for i in free:
        for s in (1, -1):
            v = [0, 0, 0]
            v[i] = s
            steps.append(tuple(v))
    # reorder to +a, -a, +b, -b
    return (steps[0], steps[1], steps[2], steps[3])


def build_polyomino(spec: EdgeSpec) -> BlockSet:
    """Lay out the edge path; the last cube of each edge is the first cube of
    the next.  Raises OverlapError if the path self-intersects."""
    blocks: list[Coord] = []
    occupied: set[Coord] = set()
    pos: Coord = (0, 0, 0)
    axis: Coord = (1, 0, 0)

    def put(c: Coord):
        if c in occupied:
            raise OverlapError(f"cube collision at {c}")
        occupied.add(c)
        blocks.append(c)

    put(pos)
    for i, length in enumerate(spec.lengths):
        if i > 0:
            axis = perpendicular_steps(axis)[spec.directions[i - 1]]
        for _ in range(length - 1):
            pos = (pos[0] + axis[0], pos[1] + axis[1], pos[2] + axis[2])
            put(pos)
    return BlockSet(blocks)


def rotate_blocks(b: BlockSet, r: int) -> BlockSet:
    """Apply the r-th of the 24 proper cube rotations."""
    mat = ROTATIONS[r]
    return BlockSet(_apply(mat, c) for c in b.blocks)


def _normalize(coords) -> tuple[Coord, ...]:
    xs = min(c[0] for c in coords)
    ys = min(c[1] for c in coords)
    zs = min(c[2] for c in coords)
    return tuple(sorted((c[0] - xs, c[1] - ys, c[2] - zs) for c in coords))


def canonical_form(b: BlockSet) -> tuple[Coord, ...]:
    """Rotation-invariant key: lexicographic minimum over the 24 rotations of
    the sorted, min-corner-normalized coordinate list."""
    return min(_normalize([_apply(mat, c) for c in b.blocks]) for mat in ROTATIONS)


def equivalent(a: BlockSet, b: BlockSet) -> bool:
    """True iff ``a`` and ``b`` are related by a proper rotation (+ translation)."""
    if len(a) != len(b):
        return False
    return canonical_form(a) == canonical_form(b)
