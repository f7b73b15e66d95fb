"""Construction of the temporal, social, and spatial post graphs.

Each layer follows the same recipe: posts are one-hot assigned to the nodes
of a small context graph (ISO weeks, users, street intersections), a
similarity kernel is built over those context nodes, and the kernel is
projected back onto posts. The projection never materializes a dense K x K
matrix; it enumerates kernel entries and expands the cartesian products of
the post groups assigned to each kernel row.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .records import DataError, GraphConfig, PostRecord, SpatialNetwork, UserRelations
from .sparse import IndicatorMatrix, MultiGraph, SparseSymMatrix

log = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_008.8

LAYER_TEM = "tem"
LAYER_SOC = "soc"
LAYER_SPA = "spa"


# ---------------------------------------------------------------------------
# indicators


def one_hot_time(records: list[PostRecord]) -> tuple[np.ndarray, IndicatorMatrix]:
    """Assign posts to the sorted distinct week ordinals present."""
    post_weeks = np.array([r.week_index for r in records], dtype=np.int64)
    weeks = np.unique(post_weeks)
    assignment = np.searchsorted(weeks, post_weeks)
    return weeks, IndicatorMatrix(rows=len(weeks), assignment=assignment.astype(np.int64))


def one_hot_user(records: list[PostRecord], relations: UserRelations) -> IndicatorMatrix:
    idx = relations.index()
    try:
        assignment = np.array([idx[r.user_id] for r in records], dtype=np.int64)
    except KeyError as exc:  # ingest registers unknown users, so this is a bug guard
        raise DataError(f"post references unknown user {exc.args[0]}") from exc
    return IndicatorMatrix(rows=len(relations.users), assignment=assignment)


# ---------------------------------------------------------------------------
# user-level matrices


def friendship_matrix(relations: UserRelations) -> SparseSymMatrix:
    """Self links for every user plus symmetric contact links, all weight 1."""
    idx = relations.index()
    n = len(relations.users)
    rows = list(range(n))
    cols = list(range(n))
    for a, b in relations.contacts:
        rows.append(idx[a])
        cols.append(idx[b])
    return SparseSymMatrix.from_entries(
        n,
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.ones(len(rows), dtype=np.float64),
    )


def interest_matrix(relations: UserRelations) -> SparseSymMatrix:
    """Jaccard overlap of group-membership sets.

    Pairs whose combined group set is empty have no entry at all, so users
    without groups carry no self link here either.
    """
    idx = relations.index()
    n = len(relations.users)
    group_sizes = np.zeros(n, dtype=np.int64)
    members: dict[str, list[int]] = {}
    for user, gs in relations.groups.items():
        j = idx[user]
        group_sizes[j] = len(gs)
        for g in gs:
            members.setdefault(g, []).append(j)

    inter: dict[tuple[int, int], int] = {}
    for js in members.values():
        js.sort()
        for a in range(len(js)):
            for b in range(a + 1, len(js)):
                key = (js[a], js[b])
                inter[key] = inter.get(key, 0) + 1

    rows, cols, vals = [], [], []
    for j in np.flatnonzero(group_sizes):
        rows.append(int(j))
        cols.append(int(j))
        vals.append(1.0)
    for (a, b), shared in inter.items():
        union = group_sizes[a] + group_sizes[b] - shared
        rows.append(a)
        cols.append(b)
        vals.append(shared / union)
    return SparseSymMatrix.from_entries(
        n,
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals, dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# kernels


def temporal_kernel(weeks: np.ndarray, cfg: GraphConfig) -> SparseSymMatrix:
    """Unit self links; adjacent-week links weighted alpha_t.

    By default adjacency means calendar-consecutive ISO weeks (ordinal gap
    of exactly 1). With `rank_tridiagonal` every consecutive pair of the
    sorted distinct weeks links regardless of the calendar gap.
    """
    t = len(weeks)
    rows = list(range(t))
    cols = list(range(t))
    vals = [1.0] * t
    if cfg.alpha_t > 0.0:
        for i in range(t - 1):
            if cfg.rank_tridiagonal or weeks[i + 1] - weeks[i] == 1:
                rows.append(i)
                cols.append(i + 1)
                vals.append(cfg.alpha_t)
    return SparseSymMatrix.from_entries(
        t,
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals, dtype=np.float64),
    )


def social_kernel(
    friend: SparseSymMatrix, interest: SparseSymMatrix, cfg: GraphConfig
) -> SparseSymMatrix:
    """Normalized blend of identity, friendship, and thresholded interest.

    kernel = (a1*I + a2*friend + a3*(interest > beta)) / (a1 + a2 + a3).
    Users in no group keep a reduced self weight because the interest term
    contributes nothing for them.
    """
    if friend.dim != interest.dim:
        raise DataError("friendship and interest matrices disagree on user count")
    total = cfg.alpha_u1 + cfg.alpha_u2 + cfg.alpha_u3
    if total <= 0.0:
        raise DataError("social kernel weights sum to zero")
    n = friend.dim
    mask = interest.weight > cfg.beta_u

    rows = np.concatenate(
        [np.arange(n, dtype=np.int64), friend.row, interest.row[mask]]
    )
    cols = np.concatenate(
        [np.arange(n, dtype=np.int64), friend.col, interest.col[mask]]
    )
    vals = np.concatenate(
        [
            np.full(n, cfg.alpha_u1, dtype=np.float64),
            np.full(friend.nnz, cfg.alpha_u2, dtype=np.float64),
            np.full(int(mask.sum()), cfg.alpha_u3, dtype=np.float64),
        ]
    )
    return SparseSymMatrix.from_entries(n, rows, cols, vals / total, sum_duplicates=True)


def spatial_kernel(network: SpatialNetwork, cfg: GraphConfig) -> SparseSymMatrix:
    """Travel-time kernel over an already filtered street network.

    An edge with travel time w gets weight (max - w) / max, so the cutoff
    itself maps to weight zero and is dropped. Self links get weight 1
    unless `spatial_unit_diagonal` is off.
    """
    if len(network.travel_min) and float(network.travel_min.max()) > cfg.max_travel_min:
        raise DataError("spatial kernel expects edges at or under the travel cutoff")
    n = network.node_count
    keep = network.travel_min < cfg.max_travel_min
    w = (cfg.max_travel_min - network.travel_min[keep]) / cfg.max_travel_min
    rows = [network.edge_src[keep]]
    cols = [network.edge_dst[keep]]
    vals = [w]
    if cfg.spatial_unit_diagonal:
        rows.append(np.arange(n, dtype=np.int64))
        cols.append(np.arange(n, dtype=np.int64))
        vals.append(np.ones(n, dtype=np.float64))
    return SparseSymMatrix.from_entries(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


# ---------------------------------------------------------------------------
# geography


def haversine_m(
    lat1: np.ndarray, lon1: np.ndarray, lat2: np.ndarray, lon2: np.ndarray
) -> np.ndarray:
    """Great-circle distance in meters (broadcasting over the inputs)."""
    p1, l1, p2, l2 = map(np.radians, (lat1, lon1, lat2, lon2))
    a = np.sin((p2 - p1) / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin((l2 - l1) / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(a)))


def nearest_node_indices(
    lats: np.ndarray, lons: np.ndarray, network: SpatialNetwork, block: int = 2048
) -> np.ndarray:
    """Index of the nearest street node per coordinate pair.

    Exhaustive haversine search in blocks; ties go to the lowest node_id
    (nodes are stored sorted by id, argmin keeps the first minimum).
    """
    if network.node_count == 0:
        raise DataError("empty spatial network")
    out = np.empty(len(lats), dtype=np.int64)
    nlat = network.lat[None, :]
    nlon = network.lon[None, :]
    for start in range(0, len(lats), block):
        stop = min(start + block, len(lats))
        d = haversine_m(lats[start:stop, None], lons[start:stop, None], nlat, nlon)
        out[start:stop] = np.argmin(d, axis=1)
    return out


def assign_nearest_node(geo: tuple[float, float], network: SpatialNetwork) -> str:
    """Nearest node id for one (lat, lon) pair."""
    idx = nearest_node_indices(
        np.array([geo[0]], dtype=np.float64), np.array([geo[1]], dtype=np.float64), network
    )
    return network.node_ids[int(idx[0])]


def assign_posts_to_nodes(
    records: list[PostRecord], network: SpatialNetwork
) -> np.ndarray:
    lats = np.array([r.geo[0] for r in records], dtype=np.float64)
    lons = np.array([r.geo[1] for r in records], dtype=np.float64)
    return nearest_node_indices(lats, lons, network)


def spatial_subgraph(
    network: SpatialNetwork, assignments: np.ndarray, max_travel_min: float
) -> tuple[SpatialNetwork, IndicatorMatrix]:
    """Restrict the street network to nodes that received posts.

    Keeps only nodes with at least one assigned post and edges between kept
    nodes whose travel time is at most the cutoff. The returned indicator
    maps posts to ranks in the kept (still id-sorted) node list.
    """
    counts = np.bincount(assignments, minlength=network.node_count)
    occupied = np.flatnonzero(counts)
    rank = np.full(network.node_count, -1, dtype=np.int64)
    rank[occupied] = np.arange(len(occupied))

    keep = (
        (rank[network.edge_src] >= 0)
        & (rank[network.edge_dst] >= 0)
        & (network.travel_min <= max_travel_min)
    )
    kept = SpatialNetwork(
        node_ids=tuple(network.node_ids[i] for i in occupied),
        lat=network.lat[occupied],
        lon=network.lon[occupied],
        edge_src=rank[network.edge_src[keep]],
        edge_dst=rank[network.edge_dst[keep]],
        travel_min=network.travel_min[keep],
    )
    ind = IndicatorMatrix(rows=len(occupied), assignment=rank[assignments])
    return kept, ind


# ---------------------------------------------------------------------------
# projection and composition


def project_adjacency(ind: IndicatorMatrix, kernel: SparseSymMatrix) -> SparseSymMatrix:
    """Pull a context-node kernel back onto posts.

    Equivalent to indicator^T * kernel * indicator for one-hot indicators:
    post pair (i, j) inherits the kernel weight between their assigned
    rows. Work is proportional to the number of realized post pairs, done
    group-by-group instead of through any K x K intermediate.
    """
    if ind.rows != kernel.dim:
        raise DataError("indicator and kernel shapes disagree")
    present, starts, order = ind.groups()
    where = {int(r): i for i, r in enumerate(present)}

    rows_out: list[np.ndarray] = []
    cols_out: list[np.ndarray] = []
    vals_out: list[np.ndarray] = []
    for r, c, w in zip(kernel.row, kernel.col, kernel.weight):
        gi = where.get(int(r))
        gj = where.get(int(c))
        if gi is None or gj is None:
            continue
        a = order[starts[gi] : starts[gi + 1]]
        if r == c:
            # all unordered pairs inside the group, self pairs included
            ii, jj = np.triu_indices(len(a), k=0)
            rows_out.append(a[ii])
            cols_out.append(a[jj])
            vals_out.append(np.full(len(ii), w))
        else:
            b = order[starts[gj] : starts[gj + 1]]
            pr = np.repeat(a, len(b))
            pc = np.tile(b, len(a))
            rows_out.append(np.minimum(pr, pc))
            cols_out.append(np.maximum(pr, pc))
            vals_out.append(np.full(len(pr), w))

    if not rows_out:
        return SparseSymMatrix.empty(ind.cols)
    return SparseSymMatrix.from_entries(
        ind.cols,
        np.concatenate(rows_out),
        np.concatenate(cols_out),
        np.concatenate(vals_out),
    )


def compose_simple(layers: dict[str, SparseSymMatrix]) -> SparseSymMatrix:
    """Unweighted union of the layers' off-diagonal supports."""
    dims = {m.dim for m in layers.values()}
    if len(dims) != 1:
        raise DataError("layers disagree on node count")
    dim = dims.pop()
    keys = []
    for m in layers.values():
        off = m.row != m.col
        keys.append(m.row[off] * np.int64(dim) + m.col[off])
    merged = np.unique(np.concatenate(keys)) if keys else np.zeros(0, dtype=np.int64)
    return SparseSymMatrix(
        dim=dim,
        row=(merged // dim).astype(np.int64),
        col=(merged % dim).astype(np.int64),
        weight=np.ones(len(merged), dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# orchestration


@dataclass(frozen=True)
class GraphBuildNotes:
    """Side observations surfaced in the stats report."""

    groupless_users: int
    user_links_interest_prebeta: int  # user pairs with any shared group
    user_links_interest_postbeta: int
    posts_nonisolated_soc_prebeta: int
    occupied_nodes: int  # street nodes that received posts


@dataclass(frozen=True)
class GraphArtifacts:
    weeks: np.ndarray
    time_indicator: IndicatorMatrix
    user_indicator: IndicatorMatrix
    space_indicator: IndicatorMatrix  # over the kept sub-network's nodes
    kept_network: SpatialNetwork
    posts_per_node: np.ndarray  # aligned with kept_network.node_ids


def _soc_prebeta_posts(
    relations: UserRelations,
    interest: SparseSymMatrix,
    posts_per_user: np.ndarray,
) -> int:
    """Posts that would be non-isolated in the social layer at beta = 0.

    A post is non-isolated when its user has a second post (self links in
    the kernel always connect same-user posts) or any positively linked
    user (contact or shared group) has at least one post.
    """
    n = len(relations.users)
    idx = relations.index()
    linked_other = np.zeros(n, dtype=bool)
    off = interest.row != interest.col
    for a, b in zip(interest.row[off], interest.col[off]):
        if posts_per_user[b] > 0:
            linked_other[a] = True
        if posts_per_user[a] > 0:
            linked_other[b] = True
    for ua, ub in relations.contacts:
        a, b = idx[ua], idx[ub]
        if posts_per_user[b] > 0:
            linked_other[a] = True
        if posts_per_user[a] > 0:
            linked_other[b] = True
    alive = (posts_per_user >= 2) | (linked_other & (posts_per_user >= 1))
    return int(posts_per_user[alive].sum())


def build_multigraph(
    records: list[PostRecord],
    relations: UserRelations,
    network: SpatialNetwork,
    cfg: GraphConfig,
) -> tuple[MultiGraph, GraphBuildNotes, GraphArtifacts]:
    """Build all three layers and their composition for one dataset."""
    if not records:
        raise DataError("empty dataset")
    k = len(records)

    weeks, t_ind = one_hot_time(records)
    u_ind = one_hot_user(records, relations)
    assignments = assign_posts_to_nodes(records, network)
    kept, s_ind = spatial_subgraph(network, assignments, cfg.max_travel_min)

    friend = friendship_matrix(relations)
    interest = interest_matrix(relations)

    log.info("projecting temporal layer (%d weeks)", len(weeks))
    tem = project_adjacency(t_ind, temporal_kernel(weeks, cfg))
    log.info("projecting social layer (%d users)", len(relations.users))
    soc = project_adjacency(u_ind, social_kernel(friend, interest, cfg))
    log.info("projecting spatial layer (%d occupied nodes)", kept.node_count)
    spa = project_adjacency(s_ind, spatial_kernel(kept, cfg))

    layers = {LAYER_TEM: tem, LAYER_SOC: soc, LAYER_SPA: spa}
    composed = compose_simple(layers)
    graph = MultiGraph(node_count=k, layers=layers, composed=composed)

    posts_per_user = np.bincount(u_ind.assignment, minlength=len(relations.users))
    off = interest.row != interest.col
    per_node = np.bincount(s_ind.assignment, minlength=kept.node_count)
    notes = GraphBuildNotes(
        groupless_users=int(
            sum(1 for u in relations.users if not relations.groups_of(u))
        ),
        user_links_interest_prebeta=int(off.sum()),
        user_links_interest_postbeta=int((interest.weight[off] > cfg.beta_u).sum()),
        posts_nonisolated_soc_prebeta=_soc_prebeta_posts(
            relations, interest, posts_per_user
        ),
        occupied_nodes=kept.node_count,
    )
    artifacts = GraphArtifacts(
        weeks=weeks,
        time_indicator=t_ind,
        user_indicator=u_ind,
        space_indicator=s_ind,
        kept_network=kept,
        posts_per_node=per_node,
    )
    return graph, notes, artifacts
