"""Friedkin-Johnsen opinion equilibria under multi-adversary strategic misreporting.

The package covers the full pipeline: graph spectra and response matrices,
expressed-opinion equilibria and their costs, the Nash equilibrium of the
misreporting meta-game, worst-case misreporting-cost bounds, and the
platform's counter-algorithms (hypothesis-test detection and robust-regression
recovery of the deviator set with exact recoverability certificates).
"""

from .detection import (
    DetectionOutcome,
    TTestResult,
    Verdict,
    chi_square_sign_test,
    detect_manipulation,
    reconstruct_intrinsic,
    t_test_one_sample,
)
from .engine import (
    MetricsReport,
    OpinionProfile,
    OpinionRole,
    ResponseMatrix,
    SusceptibilityProfile,
    agent_cost,
    best_response_dynamics,
    fj_equilibrium,
    metrics,
    pom,
    pom_upper_bound_hetero,
    pom_upper_bound_shared,
    q_matrix_oracle,
    response_matrix,
    total_cost,
)
from .errors import (
    DegenerateBaseline,
    DegenerateCoefficient,
    DimensionMismatch,
    EmptySample,
    FJOpinionsError,
    GradientMismatch,
    GraphFormatError,
    InputError,
    InsufficientSeparation,
    NoConvergence,
    NoNashEquilibrium,
    NonSymmetricInput,
    NumericalError,
    OracleAssertionFailure,
    RankDeficientActiveSet,
    SharedAlphaRequired,
    SingularSusceptibility,
    SingularSystem,
    SizeConditionViolated,
    TooLarge,
)
from .experiments import (
    EmbeddingOpinions,
    EmptySet,
    FixedOpinions,
    FixedSet,
    GaussianOpinions,
    RademacherOpinions,
    RandomFraction,
    Scenario,
    SweepRow,
    TopCentralityFraction,
    balanced_accuracy,
    detection_experiment,
    recovery_error,
    recovery_experiment,
    select_top_centrality,
    sweep_alpha,
    sweep_strategic_fraction,
)
from .graph import (
    CommunityEmbedding,
    SpectralDecomposition,
    WeightedGraph,
    eigenvector_centrality,
    generate_blockmodel,
    laplacian,
    restricted_laplacian,
    spectral_decomposition,
)
from .nash import (
    NashSystem,
    StrategicOutcome,
    StrategicSet,
    Uniqueness,
    best_response,
    build_system,
    closed_form_all_deviate,
    cost_gradient,
    iterate_best_responses,
    solve_nash,
    truthful_outcome,
    verify_nash,
)
from .recovery import (
    CertificateMethod,
    EmbeddingMatrix,
    EmbeddingProvenance,
    RecoveryResult,
    SscSssCertificate,
    TorrentResult,
    blockmodel_constants,
    max_certified_set_size,
    min_max_normalize,
    recover_deviators,
    spectral_embedding,
    ssc_sss_bruteforce,
    torrent,
)

__version__ = "0.1.0"
