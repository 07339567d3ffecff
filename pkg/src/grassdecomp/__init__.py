"""Grassmann decomposition of low-rank skew-symmetric tensors."""
from .decompose import (
    DecomposeOptions,
    Decomposition,
    decompose_rank1,
    grassmann_decompose,
    greedy_block_permutation,
    realified_evd,
    refine_invariant_subspace,
    sample_kernel_element,
    sketch_dimension,
    solve_coefficients,
    SketchPlan,
)
from .errors import GrassmannError
from .hosvd import CompressionResult, compress, detect_rank, multilinear_multiply
from .indexing import rank_tuple, sort_signed, unrank_index
from .kernel import KernelBasis, gram, jacobian_dense, kernel_basis
from .skew import (
    SkewTensor,
    flatten_mode1,
    flatten_modes12,
    frobenius_inner,
    to_dense,
    unflatten_last,
    wedge,
)
from .testbench import (
    ErrorReport,
    add_noise,
    backward_error,
    chordal_distance,
    forward_error,
    match_components,
    random_decomposition,
    run_sweep,
)

__version__ = "0.1.0"
