"""Graph and label statistics.

Everything here is descriptive: connectivity, density, exact hop diameter,
rank-size series, label histograms, and two distribution-distance measures
used to compare a subsample against a reference run.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from .graphs import GraphBuildNotes
from .records import DataError, SpatialNetwork
from .sparse import MultiGraph, SparseSymMatrix

EPS_SMOOTH = 1e-9


def connected_components(adj: SparseSymMatrix) -> tuple[list[np.ndarray], np.ndarray]:
    """Split the graph into components of linked nodes.

    Returns (components, isolated): components hold only nodes with at
    least one neighbor, ordered largest first (ties by smallest member);
    isolated nodes come back separately. Self-loops do not count as links.
    """
    deg = adj.degrees()
    isolated = np.flatnonzero(deg == 0)
    if adj.dim == 0:
        return [], isolated
    csr = adj.to_csr(include_diagonal=False)
    _, labels = csgraph.connected_components(csr, directed=False)
    comps: dict[int, list[int]] = {}
    for node in np.flatnonzero(deg > 0):
        comps.setdefault(int(labels[node]), []).append(int(node))
    out = [np.array(sorted(nodes), dtype=np.int64) for nodes in comps.values()]
    out.sort(key=lambda a: (-len(a), int(a[0])))
    return out, isolated


def graph_density(n: int, m: int) -> float:
    """Simple-graph density 2m / (n(n-1)) over non-isolated nodes."""
    if n < 2:
        raise DataError("density undefined for fewer than two nodes")
    return 2.0 * m / (n * (n - 1))


def _bfs_dist(csr: sp.csr_matrix, source: int) -> np.ndarray:
    return csgraph.dijkstra(csr, directed=False, unweighted=True, indices=source)


def _twin_representatives(sub: sp.csr_matrix) -> np.ndarray:
    """One representative per class of nodes with identical closed neighborhoods.

    Such nodes are mutually adjacent and interchangeable on every shortest
    path, so distances between distinct classes survive contraction intact.
    """
    sub.sort_indices()
    indptr, indices = sub.indptr, sub.indices
    seen: dict[bytes, int] = {}
    reps: list[int] = []
    for i in range(sub.shape[0]):
        row = indices[indptr[i] : indptr[i + 1]]
        closed = np.insert(row, np.searchsorted(row, i), i)
        if seen.setdefault(closed.tobytes(), i) == i:
            reps.append(i)
    return np.asarray(reps, dtype=np.int64)


# Sweep-based bounding retires at least one node per sweep, but on dense
# low-diameter graphs that is its worst case: switch to the batched BFS
# once this many sweeps have not cleared the field.
_SWEEP_LIMIT = 32
_FALLBACK_MIN_ACTIVE = 64
_BITSET_CHUNK = 1 << 18  # adjacency entries gathered per propagation block


def _max_ecc_bitset(csr: sp.csr_matrix, sources: np.ndarray) -> int:
    """Exact max eccentricity over `sources` via level-synchronous BFS.

    All sources advance together, one bit per source packed into uint64
    lanes, so each hop is a single pass over the adjacency lists instead of
    one BFS per source.
    """
    n = csr.shape[0]
    ns = len(sources)
    words = (ns + 63) // 64
    lane = np.arange(ns, dtype=np.int64)
    bits = np.left_shift(np.uint64(1), (lane & 63).astype(np.uint64))
    reached = np.zeros((n, words), dtype=np.uint64)
    np.bitwise_or.at(reached, (sources, lane >> 6), bits)
    frontier = reached.copy()

    full = np.full(words, ~np.uint64(0))
    if ns & 63:
        full[-1] = np.uint64((1 << (ns & 63)) - 1)

    indptr, indices = csr.indptr, csr.indices
    # row blocks sized so one gather stays within the chunk budget
    cuts = [0]
    while cuts[-1] < n:
        nxt = int(np.searchsorted(indptr, indptr[cuts[-1]] + _BITSET_CHUNK, side="left"))
        cuts.append(min(max(nxt, cuts[-1] + 1), n))

    level = 0
    new = np.empty_like(reached)
    while not np.array_equal(np.bitwise_and.reduce(reached, axis=0), full):
        if not frontier.any():
            raise DataError("component is not connected")
        for r0, r1 in zip(cuts, cuts[1:]):
            seg = indices[indptr[r0] : indptr[r1]]
            offsets = (indptr[r0:r1] - indptr[r0]).astype(np.int64)
            block = np.bitwise_or.reduceat(frontier[seg], offsets, axis=0)
            block &= ~reached[r0:r1]
            new[r0:r1] = block
        frontier = new.copy()
        reached |= frontier
        level += 1
    return level


def hop_diameter(adj: SparseSymMatrix, component: np.ndarray) -> int:
    """Exact unweighted diameter of one connected component.

    Structural twins are contracted first, which collapses the clique blocks
    these graphs are built from. The remainder runs eccentricity bounding:
    each breadth-first sweep pins the eccentricity of its source and narrows
    [lower, upper] bounds for every other node; nodes whose bounds meet or
    whose upper bound cannot beat the best lower bound drop out. If the
    field refuses to clear (dense graphs with diameter near 2), the leftover
    eccentricities are finished exactly in one batched bitset BFS.
    """
    nc = len(component)
    if nc == 0:
        raise DataError("empty component")
    if nc == 1:
        return 0
    sub = adj.to_csr(include_diagonal=False)[component][:, component].tocsr()

    reps = _twin_representatives(sub)
    if len(reps) == 1:
        return 1  # one twin class: the component is a clique
    if len(reps) < nc:
        sub = sub[reps][:, reps].tocsr()
    n = sub.shape[0]

    lo = np.zeros(n, dtype=np.int64)
    hi = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    diam_lo = 0
    deg = np.diff(sub.indptr)
    pick_max = True
    v = int(np.argmax(deg))
    sweeps = 0
    while True:
        dist = _bfs_dist(sub, v)
        if np.any(np.isinf(dist)):
            raise DataError("component is not connected")
        d = dist.astype(np.int64)
        ecc = int(d.max())
        diam_lo = max(diam_lo, ecc)
        lo = np.maximum(lo, np.maximum(ecc - d, d))
        hi = np.minimum(hi, ecc + d)
        settled = active & (lo == hi)
        if np.any(settled):
            diam_lo = max(diam_lo, int(lo[settled].max()))
            active &= ~settled
        active &= hi > diam_lo
        if not np.any(active):
            return diam_lo
        sweeps += 1
        if sweeps >= _SWEEP_LIMIT and int(active.sum()) > _FALLBACK_MIN_ACTIVE:
            return max(diam_lo, _max_ecc_bitset(sub, np.flatnonzero(active)))
        idx = np.flatnonzero(active)
        if pick_max:
            v = int(idx[np.argmax(hi[idx])])
        else:
            v = int(idx[np.argmin(lo[idx])])
        pick_max = not pick_max


def degree_rank_size(adj: SparseSymMatrix) -> np.ndarray:
    """Unweighted degrees of non-isolated nodes, sorted descending."""
    deg = adj.degrees()
    deg = deg[deg > 0]
    return np.sort(deg)[::-1].astype(np.int64)


def kl_divergence(p: np.ndarray, q: np.ndarray, eps: float = EPS_SMOOTH) -> float:
    """D_KL(p || q) over count or proportion vectors.

    Both sides are normalized, smoothed additively by eps, and renormalized
    so empty cells on either side stay finite.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise DataError("distribution shape mismatch")
    if np.any(p < 0) or np.any(q < 0):
        raise DataError("negative mass in distribution")
    if p.sum() <= 0.0 or q.sum() <= 0.0:
        raise DataError("zero total count")
    ph = p / p.sum() + eps
    qh = q / q.sum() + eps
    ph /= ph.sum()
    qh /= qh.sum()
    return float(np.sum(ph * np.log(ph / qh)))


def chi_square(observed: np.ndarray, expected_dist: np.ndarray, eps: float = EPS_SMOOTH) -> float:
    """Goodness-of-fit statistic of observed counts against a reference shape.

    The reference is normalized (with eps smoothing so no expected cell is
    zero) and scaled to the observed total.
    """
    o = np.asarray(observed, dtype=np.float64)
    e = np.asarray(expected_dist, dtype=np.float64)
    if o.shape != e.shape or o.ndim != 1:
        raise DataError("distribution shape mismatch")
    if np.any(o < 0) or np.any(e < 0):
        raise DataError("negative mass in distribution")
    total = o.sum()
    if total <= 0.0 or e.sum() <= 0.0:
        raise DataError("zero total count")
    frac = e / e.sum() + eps
    frac /= frac.sum()
    expected = frac * total
    return float(np.sum((o - expected) ** 2 / expected))


@dataclass(frozen=True)
class LayerStats:
    nodes: int  # non-isolated
    isolated: int
    edges: int
    density: float
    components: int
    largest_component: int
    diameter_largest: int | None  # None when the pass was skipped

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": self.nodes,
            "isolated": self.isolated,
            "edges": self.edges,
            "density": self.density,
            "components": self.components,
            "largest_component": self.largest_component,
            "diameter_largest": self.diameter_largest,
        }


def layer_stats(adj: SparseSymMatrix, *, with_diameter: bool = True) -> LayerStats:
    """Connectivity summary of one graph layer (self-loops ignored)."""
    off = adj.off_diagonal()
    comps, isolated = connected_components(off)
    n = adj.dim - len(isolated)
    m = off.nnz
    density = graph_density(n, m) if n >= 2 else 0.0
    largest = comps[0] if comps else np.zeros(0, dtype=np.int64)
    diam: int | None = None
    if with_diameter:
        diam = hop_diameter(off, largest) if len(largest) > 1 else 0
    return LayerStats(
        nodes=n,
        isolated=len(isolated),
        edges=m,
        density=density,
        components=len(comps),
        largest_component=len(largest),
        diameter_largest=diam,
    )


@dataclass
class StatsReport:
    """Everything the stats stage knows about one pipeline run."""

    k: int
    layers: dict[str, LayerStats]
    backend_network: dict[str, Any]
    degree_series: dict[str, np.ndarray] = field(repr=False, default_factory=dict)
    posts_per_node: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    labels: dict[str, Any] = field(default_factory=dict)
    comparison: dict[str, Any] | None = None
    notes: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "layers": {name: st.to_dict() for name, st in self.layers.items()},
            "backend_network": self.backend_network,
            "labels": self.labels,
            "comparison": self.comparison,
            "notes": self.notes,
        }


def network_stats(network: SpatialNetwork) -> dict[str, Any]:
    """Density summary of the street network itself."""
    deg = np.zeros(network.node_count, dtype=np.int64)
    np.add.at(deg, network.edge_src, 1)
    np.add.at(deg, network.edge_dst, 1)
    n = int((deg > 0).sum())
    m = network.edge_count
    return {
        "nodes": n,
        "isolated": network.node_count - n,
        "edges": m,
        "density": graph_density(n, m) if n >= 2 else 0.0,
    }


def build_report(
    graph: MultiGraph,
    network: SpatialNetwork,
    notes: GraphBuildNotes,
    label_summary: dict[str, Any],
    posts_per_node: np.ndarray,
    reference_hists: dict[str, list[int]] | None = None,
    *,
    with_diameter: bool = True,
    threads: int = 1,
) -> StatsReport:
    """Assemble the full report for one run.

    Per-layer statistics are independent, so they run on a worker pool when
    threads > 1; results are keyed by layer name, which keeps the output
    identical regardless of completion order.
    """
    targets = {**graph.layers, "composed": graph.composed}

    def one(item: tuple[str, SparseSymMatrix]) -> tuple[str, LayerStats, np.ndarray]:
        name, adj = item
        return name, layer_stats(adj, with_diameter=with_diameter), degree_rank_size(adj)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, targets.items()))
    else:
        results = [one(item) for item in targets.items()]
    layer_map = {name: st for name, st, _ in results}
    series = {name: sr for name, _, sr in results}

    net = network_stats(network)
    net["occupied_nodes"] = notes.occupied_nodes

    comparison = None
    if reference_hists is not None:
        comparison = {}
        for key in ("hv", "ha"):
            sub = np.asarray(label_summary[key]["histogram"], dtype=np.float64)
            ref = np.asarray(reference_hists[key], dtype=np.float64)
            comparison[key] = {
                "kl": kl_divergence(sub, ref),
                "chi2": chi_square(sub, ref),
            }

    return StatsReport(
        k=graph.node_count,
        layers=layer_map,
        backend_network=net,
        degree_series=series,
        posts_per_node=np.sort(posts_per_node)[::-1].astype(np.int64),
        labels=label_summary,
        comparison=comparison,
        notes={
            "groupless_users": notes.groupless_users,
            "user_links_interest_prebeta": notes.user_links_interest_prebeta,
            "user_links_interest_postbeta": notes.user_links_interest_postbeta,
            "posts_nonisolated_soc_prebeta": notes.posts_nonisolated_soc_prebeta,
        },
    )
