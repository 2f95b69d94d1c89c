"""Graph-signal representation toolkit.

Builds graph Fourier bases, local-set piecewise-constant wavelets and
piecewise-smooth dictionaries, and runs the two canonical tasks on them:
sparse approximation, and sampling followed by recovery. Localization,
uncertainty, detection and epidemic-estimation analyses ride on top.
"""

from .approximation import SparseCode, matching_pursuit, nonlinear_approx, normalized_mse, omp
from .detection import DetectionResult, detect, detection_threshold
from .dictionaries import (
    AtomInfo,
    BandlimitedModel,
    Dictionary,
    PiecewiseBandlimitedModel,
    PiecewiseConstantModel,
    PiecewisePolynomialModel,
    PolyPiece,
    PolynomialModel,
    downsampling_matrix,
    lspc_dictionary,
    lspc_wavelet_basis,
    lsps_dictionary,
    polynomial_dictionary,
    random_piecewise_constant,
    synthesize,
    voronoi_pieces,
)
from .epidemics import SISParams, SISTrajectory, estimate_local_set, estimate_random, simulate_sis, success_rate
from .graph import (
    Graph,
    StructureMatrixKind,
    build_matrix,
    connected_components,
    count_inconsistent_edges,
    difference_operator,
    geodesic_distance_matrix,
    geodesic_distances,
    graph_diameter,
    induced_graph,
    is_connected,
    load_graph,
    save_graph,
    subgraph_distance_matrix,
)
from .partition import (
    FullDepth,
    LeafCount,
    LocalSet,
    LocalSetTree,
    PartitionMethod,
    bipartition,
    build_tree,
    set_variation,
    tree_from_json,
    tree_to_json,
)
from .sampling import (
    LeafSampling,
    SamplingObjective,
    SamplingPlan,
    center_assign_recover,
    design_sampling,
    harmonic_recover,
    leaf_sampling,
    mislabel_fraction,
    pls_recover,
    recovery_error_bound,
    snap_to_values,
    trend_filter_recover,
)
from .spectral import (
    FourierBasis,
    LocalizationReport,
    UncertaintyReport,
    bandlimited_project,
    fourier_basis,
    fourier_basis_of,
    localization_report,
    sample_bandlimited,
    uncertainty_check,
    variation,
)

__version__ = "0.1.0"
