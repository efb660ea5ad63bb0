from kplist.graph import CliqueInstance, Graph, brute_force_list_kp, generate
from kplist.listing import (
    RunReport,
    cc_list_kp,
    congest_list_k4,
    congest_list_kp,
)
from kplist.sim import Accounting, SimConfig

__version__ = "0.0.1"
