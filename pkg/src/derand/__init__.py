"""Finite, exact experiments on Reed-Muller short codes and PRGs for polynomial threshold tests."""

__version__ = "0.1.0"

from .codes import (  # noqa: E402
    RMCode,
    coset_degree,
    coset_leaders,
    encode_polynomial,
    enumerate_codewords,
    rm_generator_matrix,
    sample_min_weight_codeword,
    verify_duality,
)
from .errors import CapExceeded, InfeasibleError, ParameterError  # noqa: E402
from .fooling import (  # noqa: E402
    DiscreteDistribution,
    fooling_decomposition,
    invariance_gap,
    lipschitz_fooling_error,
    tail_bound_audit,
    wasserstein1,
)
from .graphs import WeightedGraph, balanced_separator_opt, conductance  # noqa: E402
from .polynomials import MultilinearPolynomial, bad_weight, prune_h_bad, random_polynomial  # noqa: E402
from .pseudorandom import (  # noqa: E402
    HashingGenerator,
    KWiseSource,
    PairwiseHashFamily,
    generator_parameters,
)
from .shortcode import (  # noqa: E402
    ShortCodeGraph,
    affine_shift,
    build_short_code_graph,
    eigenvalue,
    fold,
    spectrum_audit,
    orbits,
)
from .stability import (  # noqa: E402
    CodeFunction,
    boolean_noise_stability,
    gaussian_stability,
    influence,
    mis_audit,
    noise_stability,
)
from .clouds import (  # noqa: E402
    balance_value,
    cloud_gram_eigen_bound,
    cloud_inner_product,
    lifted_gram,
    matching_audit,
    near_orthogonality,
    sdp_objective,
)
from .gap import gap_report, gap_sweep  # noqa: E402

__all__ = [
    "__version__",
    "RMCode",
    "coset_degree",
    "coset_leaders",
    "encode_polynomial",
    "enumerate_codewords",
    "rm_generator_matrix",
    "sample_min_weight_codeword",
    "verify_duality",
    "CapExceeded",
    "InfeasibleError",
    "ParameterError",
    "DiscreteDistribution",
    "fooling_decomposition",
    "invariance_gap",
    "lipschitz_fooling_error",
    "tail_bound_audit",
    "wasserstein1",
    "WeightedGraph",
    "balanced_separator_opt",
    "conductance",
    "MultilinearPolynomial",
    "bad_weight",
    "prune_h_bad",
    "random_polynomial",
    "HashingGenerator",
    "KWiseSource",
    "PairwiseHashFamily",
    "generator_parameters",
    "ShortCodeGraph",
    "affine_shift",
    "build_short_code_graph",
    "eigenvalue",
    "fold",
    "spectrum_audit",
    "orbits",
    "CodeFunction",
    "boolean_noise_stability",
    "gaussian_stability",
    "influence",
    "mis_audit",
    "noise_stability",
    "balance_value",
    "cloud_gram_eigen_bound",
    "cloud_inner_product",
    "lifted_gram",
    "matching_audit",
    "near_orthogonality",
    "sdp_objective",
    "gap_report",
    "gap_sweep",
]
