"""Loop-law diagnostics and gross-error correction for GPS baseline networks."""

from .detect import (
    CorrectionResult,
    DiagnosticsReport,
    ErrorFunction,
    NumericErrorFunction,
    build_error_function,
    correct,
    detect,
    minimize_error,
    orient_suspects,
    rank_suspect_arcs,
    remove_suspects,
    sample_error_surface,
)
from .exppoly import AffineExponent, ExpPoly, ep_add, ep_eval, ep_gradient, ep_is_constant, ep_max_constant_exponent, ep_mul
from .matrix import (
    DeviationSeries,
    PolyMatrix,
    asymptotic_diag_slope,
    build_poly_matrix,
    numeric_eval,
    power_diagonals,
    symbolic_power,
    walk_oracle,
)
from .network import (
    Arc,
    GaugePotential,
    WeightedDigraph,
    gauge_fix,
    load_network,
    normalize_orientation,
    read_network,
    spanning_tree,
)
from .spectral import (
    MonicPolynomial,
    PowerSums,
    Spectrum,
    charpoly_from_gould_determinant,
    charpoly_from_power_sums,
    power_sums,
    spectrum,
    spectrum_deviation,
)

__version__ = "0.1.0"
