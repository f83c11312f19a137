"""Fast Newton transforms for polynomial interpolation on downward closed sets."""

__version__ = "0.1.0"

from .multiindex import (  # noqa: E402
    ContainmentError,
    DownwardClosedSet,
    FiberProjections,
    FiberTubeProjections,
    NotDownwardClosedError,
    RankEmbedding,
    StructureError,
    TubeProjections,
    carry_count,
    fiber_tubes_from_tubes,
    fibers_from_tubes,
    from_indices,
    lex_compare,
    lp_set,
    rank_embedding,
    tube_projections,
)
from .nodes import AxisNodes, NonTensorialGrid, chebyshev_lobatto, grid, leja_chebyshev_lobatto, leja_order  # noqa: E402
from .transform import (  # noqa: E402
    TransformPlan,
    dense_diff_matrix,
    dense_vandermonde,
    diff_coeffs,
    fnt_forward,
    fnt_inverse,
    lower_block_product,
    plan,
)
from .evaluator import Interpolant, interpolate, max_rel_error  # noqa: E402
