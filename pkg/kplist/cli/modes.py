import abc
from typing import Set

from kplist.arguments import RunConfig
from kplist.decomposition import expander_decompose, verify_decomposition
from kplist.graph import Graph, brute_force_list_kp, generate, read_edge_list
from kplist.graph.graph import CliqueInstance
from kplist.listing import RunReport, cc_list_kp, congest_list_k4, congest_list_kp
from kplist.registrable import Registrable
from kplist.sim.accounting import Accounting


def resolve_graph(config: RunConfig) -> Graph:
    if (config.gen is None) == (config.graph is None):
        raise ValueError("Exactly one of --gen and --graph must be given.")
    if config.gen is not None:
        return generate(config.gen)
    return read_edge_list(config.graph)


class Mode(abc.ABC, Registrable):
    """One way of running the simulator on a graph."""

    def __init__(self, config: RunConfig):
        self.config = config

    @property
    def p(self) -> int:
        return self.config.p

    @abc.abstractmethod
    def run(self, g: Graph) -> RunReport:
        pass

    def verify(self, g: Graph, report: RunReport) -> bool:
        return report.clique_set() == brute_force_list_kp(g, self.p)


@Mode.register("cc", RunConfig)
class CongestedCliqueMode(Mode):
    def run(self, g: Graph) -> RunReport:
        cliques, accounting = cc_list_kp(
            g,
            self.p,
            self.config.seed,
            self.config.listing_config,
            self.config.sim_config,
        )
        return RunReport.from_run("cc", g, self.p, cliques, accounting)


@Mode.register("congest", RunConfig)
class CongestMode(Mode):
    def run(self, g: Graph) -> RunReport:
        return congest_list_kp(
            g,
            self.p,
            self.config.seed,
            self.config.listing_config,
            self.config.sim_config,
            self.config.decomposition_config,
        )


@Mode.register("congest-k4", RunConfig)
class CongestK4Mode(Mode):
    @property
    def p(self) -> int:
        return 4

    def run(self, g: Graph) -> RunReport:
        return congest_list_k4(
            g,
            self.config.seed,
            self.config.listing_config,
            self.config.sim_config,
            self.config.decomposition_config,
        )


@Mode.register("decompose", RunConfig)
class DecomposeMode(Mode):
    """Builds an expander decomposition at `delta` and checks it; lists nothing."""

    def run(self, g: Graph) -> RunReport:
        accounting = Accounting()
        decomposition_config = self.config.decomposition_config
        part = expander_decompose(
            g, self.config.delta, decomposition_config, accounting, self.config.sim_config
        )
        checks = verify_decomposition(g, part, decomposition_config)
        accounting.metrics.update(
            {
                "clusters": len(part.clusters),
                "M": len(part.M),
                "S": len(part.S),
                "R": len(part.R),
                "phi_min": part.phi_min,
            }
        )
        report = RunReport.from_run("decompose", g, self.p, set(), accounting)
        report.schedule = {"delta": self.config.delta, "checks": checks.checks}
        report.metrics["check_details"] = dict(checks.details)
        return report

    def verify(self, g: Graph, report: RunReport) -> bool:
        return all(report.schedule["checks"].values())


@Mode.register("verify", RunConfig)
class OracleMode(Mode):
    """Lists with the centralized oracle only."""

    def run(self, g: Graph) -> RunReport:
        cliques: Set[CliqueInstance] = brute_force_list_kp(g, self.p)
        return RunReport.from_run("verify", g, self.p, cliques, Accounting())


def execute(config: RunConfig) -> RunReport:
    mode = Mode.create(config.mode, config)
    g = resolve_graph(config)
    report = mode.run(g)
    report.config = config.asdict()
    if config.verify:
        report.verified = mode.verify(g, report)
    if not config.emit_cliques:
        report.cliques = []
    return report
