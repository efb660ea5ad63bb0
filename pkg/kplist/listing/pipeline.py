"""Nested iteration driver: arb_list inside list_round inside the outer schedule, followed by
the terminal out-edge broadcast."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Set

from kplist.decomposition.expander import DecompositionConfig, expander_decompose
from kplist.decomposition.partition import EdgePartition
from kplist.graph.graph import CliqueInstance, Edge, Graph
from kplist.graph.orientation import degeneracy_orient
from kplist.listing.broadcast import flood_and_list
from kplist.listing.cluster import ClusterDiagnostics, ClusterStrategy
from kplist.listing.config import ListingConfig
from kplist.listing.schedule import IterationSchedule
from kplist.logging import logger, warn_once
from kplist.serializable import Serializable
from kplist.sim.accounting import Accounting, Violation
from kplist.sim.config import SimConfig
from kplist.utils import ceil_log2, derive_seed, log2

SCHEMA_VERSION = 1


class ScheduleError(RuntimeError):
    """A failure inside the iteration schedule, tagged with its (outer, inner) position."""

    def __init__(self, message: str, outer: Optional[int] = None, inner: Optional[int] = None):
        super().__init__(message)
        self.outer = outer
        self.inner = inner


@dataclass
class RunReport(Serializable):
    mode: str
    n: int
    m: int
    p: int
    cliques: List[List[int]] = field(default_factory=list)
    count: int = 0
    rounds: Dict[str, int] = field(default_factory=dict)
    total_rounds: int = 0
    messages: Dict[str, int] = field(default_factory=dict)
    max_load: Dict[str, int] = field(default_factory=dict)
    edge_sizes: List[Dict[str, Any]] = field(default_factory=list)
    violations: List[Violation] = field(default_factory=list)
    bad_fractions: List[float] = field(default_factory=list)
    # one entry per cluster of every inner step, tagged with its (outer, inner) position
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)
    schedule: Dict[str, Any] = field(default_factory=dict)
    metrics: Dict[str, Any] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    verified: Optional[bool] = None
    schema: int = SCHEMA_VERSION

    @classmethod
    def from_run(
        cls,
        mode: str,
        g: Graph,
        p: int,
        cliques: Set[CliqueInstance],
        accounting: Accounting,
        **kwargs,
    ) -> "RunReport":
        ordered = sorted(cliques)
        return cls(
            mode=mode,
            n=g.n,
            m=g.m,
            p=p,
            cliques=[list(c.nodes) for c in ordered],
            count=len(ordered),
            rounds=dict(accounting.rounds_by_phase),
            total_rounds=accounting.total_rounds,
            messages=dict(accounting.messages_by_phase),
            max_load=dict(accounting.max_load_by_phase),
            violations=list(accounting.violations),
            metrics=dict(accounting.metrics),
            **kwargs,
        )

    def clique_set(self) -> Set[CliqueInstance]:
        return {CliqueInstance(tuple(c)) for c in self.cliques}


@dataclass
class ArbListResult:
    hat_Em: Set[Edge]
    hat_Es: Dict[Edge, int]
    hat_Er: Set[Edge]
    cliques: Set[CliqueInstance]
    s_bound: float
    bad_fraction: float
    partition: EdgePartition
    diagnostics: List[ClusterDiagnostics] = field(default_factory=list)

    @property
    def s_out_degree(self) -> int:
        out: Dict[int, int] = {}
        for tail in self.hat_Es.values():
            out[tail] = out.get(tail, 0) + 1
        return max(out.values(), default=0)


@dataclass
class ListRoundResult:
    tilde_Em: Set[Edge]
    tilde_Es: Dict[Edge, int]
    cliques: Set[CliqueInstance]
    steps: List[Dict[str, Any]] = field(default_factory=list)
    bad_fractions: List[float] = field(default_factory=list)
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)
    leftover: int = 0

    def residual_graph(self, n: int) -> Graph:
        return Graph(n, frozenset(self.tilde_Es), dict(self.tilde_Es))


def _current_graph(g: Graph, E_s: Mapping[Edge, int], E_r: Set[Edge]) -> Graph:
    orientation = dict(E_s)
    orientation.update({e: g.tail(e) for e in E_r})
    return Graph(g.n, frozenset(orientation), orientation)


def arb_list(
    g: Graph,
    E_s: Mapping[Edge, int],
    E_r: Set[Edge],
    p: int,
    delta: float,
    c: int,
    d: float,
    seed: int = 0,
    strategy: ClusterStrategy = None,
    decomposition_config: DecompositionConfig = None,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> ArbListResult:
    """Decomposes (V, E_r) and lists every p-clique with an edge in a cluster.

    `g` supplies the orientation of E_r; E_s arrives with its own tails and out-degree at most
    c * n^delta. The returned hat_Es adds the decomposition's S-edges, so its out-degree is at
    most (c + 1) * n^delta; hat_Er holds R plus the deferred bad edges.
    """
    sim_config = sim_config or SimConfig()
    strategy = strategy or ClusterStrategy.create("kp", sim_config=sim_config)
    accounting = accounting if accounting is not None else Accounting()

    h_r = Graph(g.n, frozenset(E_r))
    part = expander_decompose(
        h_r, delta, decomposition_config, accounting, sim_config, phase="decomposition"
    )
    current = _current_graph(g, E_s, set(E_r))
    step = strategy.list_clusters(current, part, p, d, seed, accounting)

    hat_Es = dict(E_s)
    hat_Es.update({e: part.s_orientation[e] for e in part.S})
    return ArbListResult(
        hat_Em=part.M,
        hat_Es=hat_Es,
        hat_Er=part.R,
        cliques=step.cliques,
        s_bound=(c + 1) * float(g.n) ** delta,
        bad_fraction=step.bad_fraction,
        partition=part,
        diagnostics=step.diagnostics,
    )


def list_round(
    g: Graph,
    d: float,
    delta: float,
    p: int,
    seed: int = 0,
    strategy: ClusterStrategy = None,
    decomposition_config: DecompositionConfig = None,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
    strict: bool = True,
    outer: Optional[int] = None,
) -> ListRoundResult:
    """Repeats arb_list with c = 0, 1, 2, ... until E_r is empty.

    Returns tilde_Em, the union of the cluster edges, and tilde_Es, whose out-degree halves the
    input bound. Inner steps stop after ceil(log2 n); whatever remains of E_r then joins
    tilde_Es with its original tail.
    """
    if not g.is_oriented:
        raise ValueError("list_round needs an oriented graph.")
    accounting = accounting if accounting is not None else Accounting()
    n = g.n
    bound = float(n) ** d
    problems = []
    if g.max_out_degree > bound + 1e-9:
        problems.append(f"out-degree {g.max_out_degree} > n^d={bound:.2f}")
    if n > 1 and float(n) ** (p / (p + 2)) >= bound / (2 * log2(n)):
        problems.append(f"n^(p/(p+2)) >= n^d/(2 log n)={bound / (2 * log2(n)):.2f}")
    if problems:
        if strict:
            raise ValueError(f"list_round preconditions fail: {'; '.join(problems)}.")
        logger.warning(
            "Outer step %s runs with waived preconditions: %s", outer, "; ".join(problems)
        )

    E_s: Dict[Edge, int] = {}
    E_r: Set[Edge] = set(g.edges)
    result = ListRoundResult(tilde_Em=set(), tilde_Es={}, cliques=set())
    for c in range(ceil_log2(n)):
        if not E_r:
            break
        inner = Accounting()
        try:
            step = arb_list(
                g,
                E_s,
                E_r,
                p,
                delta,
                c,
                d,
                derive_seed(seed, c),
                strategy,
                decomposition_config,
                sim_config,
                inner,
            )
        except ScheduleError:
            raise
        except Exception as e:
            raise ScheduleError(
                f"Inner step {c} of outer step {outer} failed: {e}", outer, c
            ) from e
        finally:
            accounting.absorb(inner, prefix=f"inner{c}")

        if strict and step.s_out_degree > step.s_bound + 1e-9:
            raise ScheduleError(
                f"hat_Es out-degree {step.s_out_degree} exceeds {step.s_bound:.2f}", outer, c
            )
        logger.info(
            "Step (%s, %d): |E_r|=%d -> |hat_Em|=%d |hat_Es|=%d |hat_Er|=%d, %d cliques",
            outer,
            c,
            len(E_r),
            len(step.hat_Em),
            len(step.hat_Es),
            len(step.hat_Er),
            len(step.cliques),
        )
        result.steps.append(
            {
                "outer": outer,
                "inner": c,
                "E_r": len(E_r),
                "hat_Em": len(step.hat_Em),
                "hat_Es": len(step.hat_Es),
                "hat_Er": len(step.hat_Er),
                "s_bound": round(step.s_bound, 6),
                "s_out_degree": step.s_out_degree,
                "clusters": len(step.partition.clusters),
            }
        )
        result.bad_fractions.append(step.bad_fraction)
        for diagnostics in step.diagnostics:
            entry = diagnostics.asdict()
            entry.pop("class_name")
            result.diagnostics.append({"outer": outer, "inner": c, **entry})
        result.tilde_Em |= step.hat_Em
        result.cliques |= step.cliques
        E_s, E_r = step.hat_Es, step.hat_Er

    result.tilde_Es = dict(E_s)
    if E_r:
        warn_once(
            f"Inner steps did not drain E_r; {len(E_r)} edges join the residual set"
        )
        result.leftover = len(E_r)
        result.tilde_Es.update({e: g.tail(e) for e in E_r})
    return result


def _wrap(position: Optional[int], fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ScheduleError:
        raise
    except Exception as e:
        raise ScheduleError(f"Outer step {position} failed: {e}", position) from e


def congest_list_kp(
    g: Graph,
    p: int,
    seed: int = 0,
    config: ListingConfig = None,
    sim_config: SimConfig = None,
    decomposition_config: DecompositionConfig = None,
    strategy: str = "kp",
    mode: str = "congest",
) -> RunReport:
    """K_p listing in CONGEST: outer schedule of list_round calls, then out-edge flooding."""
    if p < 4:
        raise ValueError(f"CONGEST listing needs p >= 4, got {p}.")
    config = config or ListingConfig()
    sim_config = sim_config or SimConfig()
    accounting = Accounting()
    n = g.n

    oriented, certificate = degeneracy_orient(g)
    accounting.metrics["degeneracy"] = certificate.max_out_degree
    cliques: Set[CliqueInstance] = set()
    edge_sizes: List[Dict[str, Any]] = []
    bad_fractions: List[float] = []
    diagnostics: List[Dict[str, Any]] = []

    if n >= 2 and p > ceil_log2(n):
        logger.info("p=%d > ceil(log2 n)=%d, flooding full neighborhoods", p, ceil_log2(n))
        found, rounds = _wrap(
            None, flood_and_list, oriented, p, True, seed, sim_config, accounting
        )
        accounting.metrics["fallback"] = 1
        return RunReport.from_run(
            mode,
            g,
            p,
            found,
            accounting,
            schedule={"variant": strategy, "steps": [], "fallback": True},
        )

    schedule = IterationSchedule(
        n, p, "k4" if strategy == "k4" else "kp", forced_depth=config.forced_depth
    )
    steps = schedule.steps()
    if not steps:
        warn_once(f"No outer steps at n={n}, p={p}: only the terminal broadcast runs")
    cluster_strategy = ClusterStrategy.create(strategy, config, sim_config)

    current = oriented
    for step in steps:
        outer = Accounting()
        try:
            result = _wrap(
                step.k,
                list_round,
                current,
                step.d.value(n),
                step.delta.value(n),
                p,
                seed=derive_seed(seed, step.k),
                strategy=cluster_strategy,
                decomposition_config=decomposition_config,
                sim_config=sim_config,
                accounting=outer,
                strict=not schedule.forced,
                outer=step.k,
            )
        finally:
            accounting.absorb(outer, prefix=f"outer{step.k}")
        cliques |= result.cliques
        edge_sizes.extend(result.steps)
        edge_sizes.append(
            {
                "outer": step.k,
                "tilde_Em": len(result.tilde_Em),
                "tilde_Es": len(result.tilde_Es),
                "leftover": result.leftover,
            }
        )
        bad_fractions.extend(result.bad_fractions)
        diagnostics.extend(result.diagnostics)
        current = result.residual_graph(n)
        accounting.metrics[f"outer{step.k}/out_degree"] = current.max_out_degree

    found, rounds = _wrap(
        None, flood_and_list, current, p, False, seed, sim_config, accounting
    )
    cliques |= found
    d_final = schedule.terminal_d().value(n) if n >= 4 else 1.0
    budget = config.broadcast_cap * float(max(n, 1)) ** d_final
    ratio = rounds / budget if budget else 0.0
    accounting.metrics["broadcast_ratio"] = round(ratio, 6)
    if ratio > 1:
        if not schedule.forced:
            node = max(range(n), key=lambda v: (current.out_degree(v), -v))
            accounting.record_violation(node, "broadcast", budget, rounds)
        logger.warning("Terminal broadcast took %d rounds, above %.1f", rounds, budget)

    return RunReport.from_run(
        mode,
        g,
        p,
        cliques,
        accounting,
        edge_sizes=edge_sizes,
        bad_fractions=[round(f, 6) for f in bad_fractions],
        diagnostics=diagnostics,
        schedule={
            "variant": schedule.variant,
            "forced_depth": config.forced_depth,
            "steps": [
                {"k": s.k, "d": round(s.d.value(n), 6), "delta": round(s.delta.value(n), 6)}
                for s in steps
            ],
            "fallback": False,
        },
    )


def congest_list_k4(
    g: Graph,
    seed: int = 0,
    config: ListingConfig = None,
    sim_config: SimConfig = None,
    decomposition_config: DecompositionConfig = None,
) -> RunReport:
    return congest_list_kp(
        g,
        4,
        seed,
        config,
        sim_config,
        decomposition_config,
        strategy="k4",
        mode="congest-k4",
    )
