"""Multi-target rule learning over knowledge graphs.

Sparse per-predicate operators, saturation/bifurcation structure indicators,
a differentiable multi-target rule reasoner with exact hand-derived gradients,
mini-batch Adam training, rule extraction, and a filtered link-prediction
evaluation harness.
"""

from .kg import (
    DatasetSplits,
    KnowledgeGraph,
    MultiTargetQuery,
    TripleParseError,
    bw_degree,
    fw_degree,
    group_queries,
    load_dataset,
    write_triples,
)
from .operators import (
    IDENTITY_HOP,
    IDENTITY_OP,
    Operator,
    OperatorSet,
    RulePattern,
    build_operators,
    count_paths,
    enumerate_patterns,
    propagate,
)
from .indicators import (
    BifurcationRecord,
    CostBudgetError,
    EmptySubgraphError,
    SaturationRecord,
    bifurcation,
    comprehensive_saturation,
    macro_saturation,
    micro_saturation,
    sample_subgraph,
    saturation_report,
)
from .model import (
    AttentionTensor,
    ExtractedRule,
    ModelParams,
    ScoreResult,
    attention_forward,
    backward,
    extract_rules,
    load_checkpoint,
    logit_loss,
    neural_lp_score,
    save_checkpoint,
    score_entities,
    score_query,
)
from .training import (
    AdamOptimizer,
    EvalReport,
    TrainConfig,
    TrainingDivergedError,
    evaluate,
    hit_upper_bound,
    train,
)

__version__ = "0.1.0"
