"""Step-function summaries of persistence diagrams, with the statistics,
kernels, and learning machinery built on them."""

__version__ = "0.1.0"

from .analysis import (
    MatrixKind,
    SymmetricMatrix,
    pairwise_matrix,
    pif_distance,
    pif_kernel,
    read_matrix,
    wasserstein_distance,
    write_matrix,
)
from .diagram import (
    DROP,
    Drop,
    EssentialPolicy,
    PersistenceDiagram,
    PersistencePair,
    TruncateAt,
    apply_policy,
    count_containing,
    read_diagram,
    to_pif,
    total_persistence,
    write_diagram,
)
from .errors import CapacityError, DatasetMissingError, ParseError, ValidationError
from .homology import (
    Filtration,
    Graph,
    Simplex,
    betti_numbers,
    compute_persistence,
    degree_filtration,
    rips_filtration,
    weight_filtration,
)
from .learn import (
    CvResult,
    CvScheme,
    HoldoutSplit,
    KFold,
    LabeledCorpus,
    LeaveOneOut,
    LeavePOut,
    SvmModel,
    cross_validate,
    cross_validate_kernel,
    kernel_pca,
    precision_recall,
    svm_predict,
    svm_train,
)
from .data import (
    Cube,
    SamplerSpec,
    Sphere,
    Torus,
    load_graph_corpus,
    load_point_cloud,
    parse_sampler_spec,
    preset_shapes,
    sample,
    write_point_cloud,
)
from .stats import (
    ConfidenceBand,
    ZTestResult,
    bootstrap_percentile,
    confidence_band,
    mean_pif,
    norm_variance,
    two_sample_z_test,
)
from .stepfn import (
    EMPTY,
    StepFunction,
    abs_pow,
    integrate,
    linear_combine,
    lp_norm,
    read_step_function,
    scale,
    sup_abs_difference,
    write_step_function,
)
