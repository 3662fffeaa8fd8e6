"""treerules: compress trained tree ensembles into compact IF-THEN rulesets.

The library trains or imports binary-classification tree ensembles, extracts
their root-to-leaf rules, and greedily combines and prunes them into a small
unordered ruleset. Rule statistics during the greedy search come either from
precomputed smoothed probability tables (fast) or from exact counting over
packed coverage bitsets (the oracle and runtime baseline).
"""

from .conditions import GT, LE, Condition
from .dataset import (
    CoverageBitset,
    Dataset,
    FoldPlan,
    eval_condition,
    load_csv,
    stratified_folds,
)
from .ensemble import (
    Ensemble,
    TrainConfig,
    TreeNode,
    export_json,
    export_json_file,
    import_json,
    n_rules,
    predict_ensemble,
    predict_ensemble_batch,
    train_cart,
    train_forest,
)
from .metrics import accuracy_score, f1_score
from .probability import (
    HybridParams,
    ProbTables,
    approx_coverage,
    fit_tables,
    hybrid_posterior,
    leaf_posterior,
    merge_evidence,
    nb_posterior,
    rule_evidence,
)
from .rules import (
    Rule,
    RuleSet,
    canonicalize,
    empirical_stats,
    extract_rules,
    merge_antecedents,
)
from .simplify import (
    SimplifyConfig,
    SimplifyTrace,
    default_rule,
    e_upper,
    generalize,
    sequential_covering_prune,
    simplify,
    z_from_confidence,
)

__version__ = "0.1.0"
