"""Distance-restricted abductive and contrastive explanations of
classifiers, computed through a monotone adversarial-example oracle."""

__version__ = "0.1.0"

from .enumeration import (
    ExplanationFamily,
    SeedEngine,
    brute_force_enumerate,
    check_duality,
    enumerate_explanations,
    enumerate_families,
    minimal_hitting_sets,
)
from .errors import (
    CombinatorialLimit,
    DomainViolation,
    DrxpError,
    IncompleteFamily,
    NoExplanation,
    OracleFailure,
    OracleInconsistency,
    PredictionMismatch,
    SchemaViolation,
    SeedEngineOverflow,
    Unsupported,
)
from .extraction import (
    AXP,
    CXP,
    AllNecessary,
    Freed,
    MonotonePredicate,
    RunConfig,
    RunStats,
    deletion_extract,
    dichotomic_extract,
    feat_disjunct,
    find_transition_prefix,
    shrink_minimal,
    swift_xplain,
    verify_minimal,
)
from .external import ExternalOracle
from .models import (
    DecisionTree,
    LinearThreshold,
    LookupTable,
    RegionConjunction,
    evaluate,
    parse_instance,
    parse_model,
    problem_from_document,
    problem_to_document,
    random_problem,
    serialize_model,
)
from .oracle import (
    AdvFound,
    Cancelled,
    CountingOracle,
    GridOracle,
    MemoOracle,
    OracleQuery,
    Robust,
    SyntheticOracle,
    SyntheticSpec,
    is_adv,
    verify_witness,
)
from .parallel import ProbeBatch, BatchOutcome, run_batch
from .problem import (
    INF,
    NORMS,
    Categorical,
    ClassificationProblem,
    ContinuousOrdinal,
    DiscreteOrdinal,
    ExplanationProblem,
    Instance,
    diff_set,
    distance,
    in_ball,
    validate_explanation_problem,
)
from .report import RunReport, build_report, canonical_json, parse_report, report_to_json
