from kplist.listing.broadcast import flood_and_list
from kplist.listing.cluster import (
    ClusterDiagnostics,
    ClusterStrategy,
    ClusterThresholds,
    GoalEdgeSet,
    LearnedEdges,
    LearnTag,
    NeighborClassification,
    classify,
    classify_clusters,
    cluster_list_kp,
    import_outside_edges,
    mark_bad_edges,
    reshuffle,
)
from kplist.listing.config import ListingConfig
from kplist.listing.pipeline import (
    RunReport,
    ScheduleError,
    arb_list,
    congest_list_k4,
    congest_list_kp,
    list_round,
)
from kplist.listing.schedule import IterationSchedule, LogExponent
from kplist.listing.sparse import (
    NodePartition,
    ResponsibilityMap,
    cc_list_kp,
    check_partition_balance,
    delivery_fanout,
    random_partition,
    tuple_assign,
)
