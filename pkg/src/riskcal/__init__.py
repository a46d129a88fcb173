"""Risk calibration of naive Bayes classifiers, centralized and collaborative."""

from .calibration import RCRecord, RCTrace, lrc, project, rc, rc_update
from .data import (
    Continuous,
    DataError,
    Dataset,
    Discrete,
    FeatureSchema,
    dataset_from_table,
    infer_schema,
    load_csv,
    train_test_split,
    write_csv,
)
from .model import (
    COUNT_FLOOR,
    VAR_FLOOR,
    NBParams,
    StatsVector,
    evaluate,
    evaluate_many,
    param_map,
    posterior,
    posterior_matrix,
    predict,
    predict_matrix,
    prob_stat_map,
    stat_map_dataset,
    stat_map_instance,
    uniform_init,
    zero_stats,
)
from .network import (
    Graph,
    RewireSchedule,
    add_random_edges,
    build_topology,
    chain,
    full_graph,
    neighbors,
    random_tree,
    read_edge_list,
    rewire,
    write_edge_list,
)
from .partition import (
    PARTITION_MODES,
    SPLITTERS,
    PartitionPlan,
    first_principal_component,
    global_sample,
    local_datasets,
    split_drift_x,
    split_drift_xy,
    split_drift_y,
    split_iid,
)
from .sim import (
    METRICS_COLUMNS,
    CRCResult,
    NodeState,
    RoundMetrics,
    evaluate_round,
    m0_heuristic,
    run_baseline,
    run_crc,
    write_metrics_csv,
)
from .synth import GENERATORS, categorical_mixture, gaussian_blobs, mixed_dataset

__version__ = "0.1.0"
