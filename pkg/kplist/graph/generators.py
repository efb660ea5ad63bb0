import abc
import dataclasses
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from kplist.graph.graph import CliqueInstance, Graph, edge_key
from kplist.registrable import Registrable
from kplist.serializable import Serializable


@dataclass
class GeneratorConfig(Serializable):
    pass


@dataclass
class GnpConfig(GeneratorConfig):
    n: int = 32
    q: float = 0.5
    seed: int = 0


@dataclass
class PlantedConfig(GeneratorConfig):
    n: int = 40
    p: int = 4
    count: int = 1
    q_background: float = 0.05
    seed: int = 0


@dataclass
class CompleteConfig(GeneratorConfig):
    n: int = 4


@dataclass
class EmptyConfig(GeneratorConfig):
    n: int = 4


@dataclass
class BipartiteConfig(GeneratorConfig):
    n1: int = 8
    n2: int = 8
    q: float = 0.5
    seed: int = 0


@dataclass
class BarbellConfig(GeneratorConfig):
    size: int = 8


def _check_probability(q: float):
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"Edge probability must lie in [0, 1], got {q}.")


def _gnp_pairs(n: int, q: float, rng: np.random.Generator) -> List[Tuple[int, int]]:
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.shape[0]) < q
    return list(zip(rows[keep].tolist(), cols[keep].tolist()))


class GraphGenerator(abc.ABC, Registrable):
    def __init__(self, config: GeneratorConfig):
        self.config = config

    @abc.abstractmethod
    def generate(self) -> Graph:
        pass


@GraphGenerator.register("gnp", GnpConfig)
class GnpGenerator(GraphGenerator):
    def generate(self) -> Graph:
        _check_probability(self.config.q)
        rng = np.random.default_rng(self.config.seed)
        return Graph.from_edges(self.config.n, _gnp_pairs(self.config.n, self.config.q, rng))


@GraphGenerator.register("planted", PlantedConfig)
class PlantedCliqueGenerator(GraphGenerator):
    """Background G(n, q) plus `count` vertex-disjoint copies of K_p."""

    def _sample(self):
        c = self.config
        if c.count * c.p > c.n:
            raise ValueError(
                f"Cannot plant {c.count} disjoint K_{c.p} in {c.n} nodes (count*p > n)."
            )
        _check_probability(c.q_background)
        rng = np.random.default_rng(c.seed)
        chosen = rng.permutation(c.n)[: c.count * c.p].tolist()
        cliques = [
            CliqueInstance.of(chosen[i * c.p : (i + 1) * c.p]) for i in range(c.count)
        ]
        pairs = set(edge_key(u, v) for u, v in _gnp_pairs(c.n, c.q_background, rng))
        for clique in cliques:
            pairs.update(clique.edges())
        return Graph(c.n, frozenset(pairs)), cliques

    def generate(self) -> Graph:
        return self._sample()[0]

    def planted_cliques(self) -> List[CliqueInstance]:
        return self._sample()[1]


@GraphGenerator.register("complete", CompleteConfig)
class CompleteGenerator(GraphGenerator):
    def generate(self) -> Graph:
        n = self.config.n
        return Graph(n, frozenset((u, v) for u in range(n) for v in range(u + 1, n)))


@GraphGenerator.register("empty", EmptyConfig)
class EmptyGenerator(GraphGenerator):
    def generate(self) -> Graph:
        return Graph(self.config.n)


@GraphGenerator.register("bipartite", BipartiteConfig)
class BipartiteGenerator(GraphGenerator):
    def generate(self) -> Graph:
        c = self.config
        _check_probability(c.q)
        rng = np.random.default_rng(c.seed)
        keep = rng.random((c.n1, c.n2)) < c.q
        left, right = np.nonzero(keep)
        return Graph.from_edges(
            c.n1 + c.n2, zip(left.tolist(), (right + c.n1).tolist())
        )


@GraphGenerator.register("barbell", BarbellConfig)
class BarbellGenerator(GraphGenerator):
    """Two copies of K_size joined by a single bridge edge."""

    def generate(self) -> Graph:
        s = self.config.size
        pairs = [(u, v) for u in range(s) for v in range(u + 1, s)]
        pairs += [(u + s, v + s) for u, v in pairs]
        pairs.append((s - 1, s))
        return Graph.from_edges(2 * s, pairs)


def build_generator(spec: str) -> GraphGenerator:
    """Parses `kind:arg1:arg2:...`, assigning args to the kind's config fields in order."""
    kind, *args = spec.split(":")
    config_cls = GraphGenerator.get_config_class_by_name(kind)
    config_fields = dataclasses.fields(config_cls)
    if len(args) > len(config_fields):
        raise ValueError(
            f"Generator '{kind}' takes at most {len(config_fields)} arguments, got {len(args)}."
        )
    kwargs = {}
    for f, raw in zip(config_fields, args):
        try:
            kwargs[f.name] = f.type(raw)
        except ValueError:
            raise ValueError(f"Generator '{kind}': cannot parse {f.name}={raw!r}.")
    return GraphGenerator.create(kind, config_cls(**kwargs))


def generate(spec: str) -> Graph:
    return build_generator(spec).generate()
