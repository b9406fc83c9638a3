"""Dense Tucker decompositions with randomized mode-wise sketching."""

from .tensor import (
    as_tensor,
    from_vec,
    to_vec,
    matricize,
    dematricize,
    mode_multiply,
    multi_mode_multiply,
    inner,
    norm,
    kronecker,
)
from .tucker import (
    TuckerDecomposition,
    CoherenceReport,
    reconstruct,
    mode_coherence,
    coherence,
    apply_mode_map,
    norm_via_gram,
    psi_matrix,
)
from .embeddings import (
    Embedding,
    MixOperators,
    JLCheck,
    make_embedding,
    apply_embedding,
    apply_embedding_mode,
    embedding_matrix,
    make_mix_operators,
    mix,
    unmix_factor,
    is_eps_jl,
    jl_failure_rate,
    sample_size,
)
from .decompose import (
    DecomposerConfig,
    RunReport,
    decompose,
    hosvd,
    hooi,
    hooi_re,
    hooi_re_star,
    reconstruction_error,
    relative_fit,
)
from .bounds import (
    BoundParams,
    BoundReport,
    embedding_dim_bound,
    residual_embedding_dim_bound,
    check_inner_product_bound,
    check_prop1,
    check_multimode_distortion,
    check_residual_distortion,
)
from .bench import BenchConfig, BenchRow, synth_tensor, run_bench
from .fileio import read_tensor, write_tensor, read_decomposition, write_decomposition

__version__ = "0.1.0"
