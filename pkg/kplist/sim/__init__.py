from kplist.sim.accounting import (
    Accounting,
    BandwidthExceeded,
    BudgetViolation,
    LearnCapExceeded,
    LoadCapExceeded,
    PayloadTooLarge,
)
from kplist.sim.config import SimConfig
from kplist.sim.engine import (
    Message,
    NodeContext,
    Protocol,
    QueuedProtocol,
    RoundEngine,
    run_protocol,
)
from kplist.sim.routing import ClusterChannel, assign_cluster_ids, cluster_route
