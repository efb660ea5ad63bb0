from kplist.decomposition.conductance import (
    conductance_certificate,
    cut_conductance,
    exact_conductance,
    spectral_gap,
    sweep_cut,
)
from kplist.decomposition.expander import (
    DecompositionConfig,
    DecompositionError,
    expander_decompose,
)
from kplist.decomposition.partition import Cluster, EdgeLabel, EdgePartition
from kplist.decomposition.verify import DecompositionReport, verify_decomposition
