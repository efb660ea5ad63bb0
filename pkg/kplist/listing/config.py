from dataclasses import dataclass

from kplist.serializable import Serializable


@dataclass
class ListingConfig(Serializable):
    # C-heavy: more than heavy_factor * n^(1/4) neighbors in the cluster
    heavy_factor: float = 1.0
    # bad: more than light_factor * n^(1/2) * log2 n light neighbors
    light_factor: float = 0.1
    # K4 variant, C-heavy above k4_heavy_factor * n^(d - 1/3)
    k4_heavy_factor: float = 1.0
    # per-node learned edges <= learn_factor * n^(d + 3/4)
    learn_factor: float = 4.0
    # clique mode pads to m / n^(1/p) = fake_edge_factor * n * log2 n
    fake_edge_factor: float = 20.0
    load_const_ceiling: float = 32.0
    bad_fraction_limit: float = 1 / 25
    # terminal broadcast rounds <= broadcast_cap * n^(d_k)
    broadcast_cap: float = 4.0
    # run exactly this many outer steps, ignoring the stop predicate
    forced_depth: int = None

    @classmethod
    def asymptotic_constants(cls, **kwargs) -> "ListingConfig":
        kwargs.setdefault("heavy_factor", 1.0)
        kwargs.setdefault("light_factor", 100.0)
        return cls(**kwargs)
