from typing import Iterable, List, Sequence, Set, Tuple

import numpy as np
import scipy.sparse as sp

from kplist.graph.graph import Edge


def _index(members: Sequence[int], edges: Iterable[Edge]):
    members = sorted(members)
    pos = {v: i for i, v in enumerate(members)}
    ei = np.array([(pos[u], pos[v]) for u, v in edges], dtype=np.int64).reshape(-1, 2)
    deg = np.bincount(ei.ravel(), minlength=len(members)).astype(np.float64)
    return members, ei, deg


def cut_conductance(side: Set[int], members: Sequence[int], edges: Iterable[Edge]) -> float:
    """cut(S) / min(vol(S), vol(V \\ S)) with volumes taken inside the subgraph."""
    edges = list(edges)
    cut = sum(1 for u, v in edges if (u in side) != (v in side))
    vol_s = sum((u in side) + (v in side) for u, v in edges)
    denom = min(vol_s, 2 * len(edges) - vol_s)
    if denom == 0:
        return 0.0 if cut == 0 else float("inf")
    return cut / denom


def exact_conductance(members: Sequence[int], edges: Iterable[Edge]) -> float:
    """Minimum over all proper subsets, enumerated as bitmasks over all but the last node."""
    members, ei, deg = _index(members, edges)
    k = len(members)
    if k < 2 or ei.shape[0] == 0:
        return 0.0
    masks = np.arange(1, 1 << (k - 1), dtype=np.int64)
    bits = (masks[:, None] >> np.arange(k, dtype=np.int64)) & 1
    vol = bits @ deg
    cut = (bits[:, ei[:, 0]] != bits[:, ei[:, 1]]).sum(axis=1)
    denom = np.minimum(vol, deg.sum() - vol)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(denom > 0, cut / np.where(denom > 0, denom, 1), np.inf)
    ratios = np.where((denom == 0) & (cut == 0), 0.0, ratios)
    return float(ratios.min())


def _normalized_adjacency(k: int, ei: np.ndarray, deg: np.ndarray):
    inv_sqrt = 1.0 / np.sqrt(deg)
    rows = np.concatenate([ei[:, 0], ei[:, 1]])
    cols = np.concatenate([ei[:, 1], ei[:, 0]])
    vals = inv_sqrt[rows] * inv_sqrt[cols]
    return sp.csr_matrix((vals, (rows, cols)), shape=(k, k))


def spectral_gap(
    members: Sequence[int],
    edges: Iterable[Edge],
    dense_limit: int = 2048,
    iterations: int = 500,
    seed: int = 0,
) -> Tuple[float, np.ndarray]:
    """Second-smallest eigenvalue of the normalized Laplacian and its Fiedler embedding.

    Dense eigendecomposition up to `dense_limit` nodes, deflated power iteration on the lazy
    walk operator beyond. The embedding is D^{-1/2} times the eigenvector, sign-normalized.
    Assumes every member has at least one edge.
    """
    members, ei, deg = _index(members, edges)
    k = len(members)
    if k < 2:
        return 0.0, np.zeros(k)
    norm_adj = _normalized_adjacency(k, ei, deg)

    if k <= dense_limit:
        laplacian = np.eye(k) - norm_adj.toarray()
        vals, vecs = np.linalg.eigh(laplacian)
        lam2, vec = float(vals[1]), vecs[:, 1]
    else:
        lazy = (sp.identity(k, format="csr") + norm_adj) * 0.5
        top = np.sqrt(deg) / np.linalg.norm(np.sqrt(deg))
        rng = np.random.default_rng(seed)
        vec = rng.standard_normal(k)
        for _ in range(iterations):
            vec = vec - (top @ vec) * top
            vec = lazy @ vec
            vec /= np.linalg.norm(vec)
        vec = vec - (top @ vec) * top
        vec /= np.linalg.norm(vec)
        lam2 = float(2.0 * (1.0 - vec @ (lazy @ vec)))

    embedding = vec / np.sqrt(deg)
    pivot = int(np.argmax(np.abs(embedding)))
    if embedding[pivot] < 0:
        embedding = -embedding
    return max(lam2, 0.0), embedding


def conductance_certificate(
    members: Sequence[int],
    edges: Iterable[Edge],
    exact_limit: int = 2**14,
    dense_limit: int = 2048,
    iterations: int = 500,
) -> float:
    """A lower bound on conductance: exact when small enough, otherwise Cheeger's λ₂/2."""
    edges = list(edges)
    k = len(members)
    if k < 2:
        return 0.0
    if (1 << (k - 1)) <= exact_limit:
        return exact_conductance(members, edges)
    lam2, _ = spectral_gap(members, edges, dense_limit, iterations)
    return lam2 / 2.0


def sweep_cut(
    members: Sequence[int],
    edges: Iterable[Edge],
    dense_limit: int = 2048,
    iterations: int = 500,
) -> Tuple[Set[int], float]:
    """Best prefix of the Fiedler ordering; returns the side and its conductance."""
    edges = list(edges)
    members_sorted, ei, deg = _index(members, edges)
    k = len(members_sorted)
    _, embedding = spectral_gap(members_sorted, edges, dense_limit, iterations)
    order = np.argsort(embedding, kind="stable")

    neighbors: List[List[int]] = [[] for _ in range(k)]
    for a, b in ei:
        neighbors[a].append(b)
        neighbors[b].append(a)

    total = deg.sum()
    inside = np.zeros(k, dtype=bool)
    cut = vol = 0.0
    best, best_at = np.inf, 1
    for i, idx in enumerate(order[:-1], start=1):
        inside[idx] = True
        cut += deg[idx] - 2 * sum(inside[j] for j in neighbors[idx])
        vol += deg[idx]
        denom = min(vol, total - vol)
        ratio = cut / denom if denom > 0 else np.inf
        if ratio < best:
            best, best_at = ratio, i
    side = {members_sorted[j] for j in order[:best_at]}
    return side, float(best)
