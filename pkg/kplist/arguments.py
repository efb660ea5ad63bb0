import ast
import json
import os
from dataclasses import MISSING, dataclass, field, fields
from string import Template
from typing import Any, Dict, List, Optional, Type, TypeVar

from kplist.logging import logger
from kplist.serializable import Serializable

T = TypeVar("T")


def create_config_class_from_args(config_class: Type[T], args) -> T:
    """Builds `config_class` from the same-named fields of a flat args object."""
    kwargs = {
        f.name: getattr(args, f.name) for f in fields(config_class) if hasattr(args, f.name)
    }
    return config_class(**kwargs)


@dataclass
class Args(Serializable):
    @property
    def updated_kwargs(self):
        def default_of(f):
            if f.default_factory is not MISSING:
                return f.default_factory()
            return f.default

        return {
            k.name: getattr(self, k.name)
            for k in fields(self)
            if getattr(self, k.name) != default_of(k)
        }

    @classmethod
    def process_kwargs(cls, kwargs, eval=True, raise_error=True, silent=False):
        overwrites_log = []

        for k, v in kwargs.items():
            if eval and isinstance(v, str):
                try:
                    v = ast.literal_eval(v)
                except (ValueError, SyntaxError):
                    pass

            if k not in {f.name for f in fields(cls)} and raise_error:
                raise ValueError(f"{k} is not in the config")

            if eval and not silent:
                overwrites_log.append(f"Overwriting {k} to {v}")

            if type(v) == str and "$" in v:
                # raises KeyError if the variable is not set
                v = Template(v).substitute(os.environ)

            kwargs[k] = v
        return overwrites_log

    def to_json(self, indent: int = 4):
        return json.dumps(self.asdict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, config_file, raise_error=True, **overrides):
        """Loads the config from a JSON file; `overrides` take precedence over the file."""
        with open(config_file, "r") as fin:
            kwargs = json.load(fin)
        kwargs.pop("class_name", None)

        cls.process_kwargs(kwargs, eval=False, raise_error=raise_error)
        if overrides:
            for log in cls.process_kwargs(overrides, raise_error=raise_error):
                logger.warning(log)
            kwargs.update(overrides)
        return cls(**kwargs)

    @classmethod
    def from_sources(
        cls,
        config_file: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
        raise_error: bool = True,
    ):
        """Defaults, then the config file, then explicit overrides."""
        overrides = dict(overrides or {})
        if config_file:
            if not os.path.exists(config_file):
                candidate = os.path.join(os.getenv("CONFIG_PATH", "configs"), config_file)
                if os.path.exists(candidate):
                    config_file = candidate
                elif os.path.exists(candidate + ".json"):
                    config_file = candidate + ".json"
                else:
                    raise ValueError(f"Config file {config_file} does not exist.")
            return cls.from_json(config_file, raise_error=raise_error, **overrides)

        for log in cls.process_kwargs(overrides, raise_error=raise_error):
            logger.warning(log)
        return cls(**overrides)

    def save_config(self, output_dir):
        os.makedirs(output_dir, exist_ok=True)

        with open(os.path.join(output_dir, "config.json"), "w+") as fout:
            fout.write(self.to_json())
            fout.write("\n")


def _check_positive(config, names: List[str]):
    for name in names:
        value = getattr(config, name)
        if value is not None and value <= 0:
            raise ValueError(f"{name} must be > 0, got {value}.")


@dataclass
class RunConfig(Args):
    # what to run
    mode: str = "cc"
    p: int = 4
    seed: int = 0
    delta: float = 0.5  # only used by the decompose mode

    # graph source, exactly one of the two
    gen: str = None  # e.g. gnp:80:0.3:17
    graph: str = None  # path to an edge-list file

    # outputs
    verify: bool = False
    emit: str = None
    emit_csv: str = None
    emit_cliques: bool = True
    log_dir: str = None
    log_level: str = "INFO"

    # simulator
    bandwidth_factor: int = int(os.getenv("KPLIST_BANDWIDTH_FACTOR", 3))
    message_words: int = 3
    routing_polylog_factor: float = (
        float(os.environ["KPLIST_ROUTING_POLYLOG_FACTOR"])
        if "KPLIST_ROUTING_POLYLOG_FACTOR" in os.environ
        else None
    )
    load_cap_factor: float = float(os.getenv("KPLIST_LOAD_CAP_FACTOR", 256))
    clique_routing_factor: float = 1.0
    decomposition_factor: float = 1.0
    polylog_exponent: int = 2
    max_rounds: int = 1_000_000

    # decomposition
    min_degree_factor: float = 0.5
    phi_min: float = None
    exact_conductance_limit: int = 2**14
    dense_spectral_limit: int = 2048
    power_iterations: int = 500
    max_retries: int = 12

    # listing
    heavy_factor: float = 1.0
    light_factor: float = 0.1
    k4_heavy_factor: float = 1.0
    learn_factor: float = 4.0
    fake_edge_factor: float = 20.0
    load_const_ceiling: float = 32.0
    bad_fraction_limit: float = 1 / 25
    broadcast_cap: float = 4.0
    forced_depth: int = None

    def __post_init__(self):
        if self.p < 3:
            raise ValueError(f"p must be >= 3, got {self.p}.")
        _check_positive(
            self,
            [f.name for f in fields(self) if f.name.endswith("_factor")]
            + ["message_words", "load_const_ceiling", "broadcast_cap", "phi_min"],
        )
        if self.forced_depth is not None and self.forced_depth < 0:
            raise ValueError(f"forced_depth must be >= 0, got {self.forced_depth}.")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}.")

    @property
    def sim_config(self):
        from kplist.sim.config import SimConfig

        return create_config_class_from_args(SimConfig, self)

    @property
    def decomposition_config(self):
        from kplist.decomposition.expander import DecompositionConfig

        return create_config_class_from_args(DecompositionConfig, self)

    @property
    def listing_config(self):
        from kplist.listing.config import ListingConfig

        return create_config_class_from_args(ListingConfig, self)


@dataclass
class BenchConfig(Args):
    n_values: List[int] = field(default_factory=lambda: [64, 128, 256])
    density: float = 0.1
    repetitions: int = 3
    mode: str = "cc"
    p: int = 3
    seed: int = 0
    forced_depth: int = None
    # any other RunConfig field, applied to every run of the sweep
    overrides: Dict[str, Any] = field(default_factory=dict)

    def run_config(self, seed: int) -> RunConfig:
        kwargs = dict(self.overrides)
        kwargs.update(mode=self.mode, p=self.p, seed=seed, forced_depth=self.forced_depth)
        return RunConfig(**kwargs)

    def __post_init__(self):
        reserved = {"mode", "p", "seed", "forced_depth"} & set(self.overrides)
        if reserved:
            raise ValueError(f"Set {sorted(reserved)} on the bench config, not as overrides.")
        RunConfig.process_kwargs(self.overrides, silent=True)
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}.")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError(f"density must lie in [0, 1], got {self.density}.")
