"""polyforge: deterministic spatial-puzzle dataset generation with exact oracles.

Two problem families are supported: odd-one-out rotation problems over
3D polyominoes, and shape-composition problems over cut polygons.  Every
emitted problem carries a machine-checkable certificate of its answer.
"""

from .composition import (
    CompositionProblem,
    brute_force_tiling,
    cut_into_pieces,
    generate_original,
    make_distractor,
    solve_composition,
)
from .dataset import ExperimentSpec, build_dataset, stats, verify_dataset
from .errors import (
    AmbiguousProblem,
    CorruptManifest,
    DegenerateCut,
    MissingImage,
    OverlapError,
    PolyforgeError,
    ResampleExhausted,
    SearchBudgetExceeded,
)
from .lattice import (
    BlockSet,
    EdgeSpec,
    build_polyomino,
    canonical_form,
    equivalent,
    rotate_blocks,
)
from .planar import (
    CutLine,
    Placement,
    Polygon,
    cut_polygon,
    piece_area_in_range,
    polygon_area,
    transform_polygon,
    verify_cover,
)
from .render import (
    RenderStyle,
    decode_png,
    encode_png,
    pad_and_rescale,
    render_polygon,
    render_polyomino,
)
from .rotation import (
    PoseAngles,
    RotationProblem,
    assign_angle_intervals,
    solve_rotation,
)
from .rotation import sample_problem_spec as sample_rotation_problem
from .composition import sample_problem_spec as sample_composition_problem

__version__ = "0.1.0"
