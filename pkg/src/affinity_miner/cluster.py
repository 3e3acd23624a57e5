"""Random-walk graph clustering and clustering-quality metrics.

Two clusterers over the affinity graph: flow simulation by alternating
matrix expansion and entrywise inflation (may yield overlapping clusters),
and an iterative hitting-time clusterer that assigns every node to its
nearest destination node and re-centers destinations until stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .affinity import stationary_distribution
from .errors import (
    EmptyGraph,
    KOutOfRange,
    LengthMismatch,
    SingularSystem,
)
from .graph import AffinityGraph

DEFAULT_TELEPORT = 0.01
MCL_MAX_ITER = 200
MCL_TOL = 1e-8


@dataclass(frozen=True)
class StochasticMatrix:
    """Row-stochastic walk matrix over the graph's sorted nodes."""

    entries: np.ndarray
    nodes: tuple[str, ...]
    teleport: float

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class HittingTimeMatrix:
    """entries[i, j] = expected walk steps from node i to node j."""

    entries: np.ndarray
    nodes: tuple[str, ...]


@dataclass(frozen=True)
class Clustering:
    """Cluster assignment plus the metadata needed to serialize it.

    For the flow clusterer, `attraction[c, i]` holds the limit-matrix mass
    of node i on cluster c's attractor rows; the hitting-time clusterer
    fills `destinations` and `objective_trace` instead.
    """

    clusters: tuple[frozenset[str], ...]
    method: str
    params: dict
    overlapping: bool
    nodes: tuple[str, ...]
    iterations: int
    converged: bool
    attraction: np.ndarray | None = field(default=None)
    destinations: tuple[str, ...] | None = field(default=None)
    objective_trace: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        if any(not c for c in self.clusters):
            raise ValueError("empty cluster")
        universe = set(self.nodes)
        if any(not c <= universe for c in self.clusters):
            raise ValueError("cluster contains unknown node")


def _weight_matrix(g: AffinityGraph, order: Sequence[str]) -> np.ndarray:
    index = {u: i for i, u in enumerate(order)}
    W = np.zeros((len(order), len(order)))
    for (u, v), w in g.edges.items():
        W[index[u], index[v]] = w
    return W


def random_walk_matrix(g: AffinityGraph, tau: float = DEFAULT_TELEPORT) -> StochasticMatrix:
    """Row-normalized out-weights mixed with uniform teleportation.

    Rows of nodes without out-edges become uniform before mixing, so the
    result is strictly positive and ergodic for any 0 < tau < 1.
    """
    if not g.nodes:
        raise EmptyGraph("walk matrix needs at least one node")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"teleport must be in (0, 1), got {tau}")
    order = tuple(g.sorted_nodes())
    n = len(order)
    W = _weight_matrix(g, order)
    out = W.sum(axis=1)
    dangling = out == 0.0
    W[dangling] = 1.0 / n
    out[dangling] = 1.0
    P = (1.0 - tau) * (W / out[:, None]) + tau / n
    return StochasticMatrix(P, order, tau)


def hitting_times(P) -> HittingTimeMatrix:
    """Expected first-arrival steps between all node pairs.

    Uses the fundamental matrix Z = inv(I - P + 1 pi^T) of the ergodic
    chain: H[i, j] = (Z[j, j] - Z[i, j]) / pi[j]. One matrix inverse
    replaces n per-target linear solves.
    """
    if isinstance(P, StochasticMatrix):
        entries, nodes = P.entries, P.nodes
    else:
        entries = np.asarray(P, dtype=float)
        nodes = tuple(str(i) for i in range(entries.shape[0]))
    n = entries.shape[0]
    pi = stationary_distribution(entries)
    try:
        Z = np.linalg.inv(np.eye(n) - entries + np.outer(np.ones(n), pi))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"fundamental matrix inverse failed: {exc}") from None
    H = (np.diag(Z)[None, :] - Z) / pi[None, :]
    np.fill_diagonal(H, 0.0)
    return HittingTimeMatrix(H, nodes)


def _mcl_seed_matrix(g: AffinityGraph, order: Sequence[str]) -> np.ndarray:
    """Column-stochastic flow matrix with self-loops of max(1, max incident)."""
    W = _weight_matrix(g, order)
    incident_max = np.maximum(W.max(axis=0), W.max(axis=1))
    M = W.T.copy()
    np.fill_diagonal(M, np.maximum(incident_max, 1.0))
    return M / M.sum(axis=0)


def mcl_flow(
    M: np.ndarray, e: int = 2, r: float = 2.0, prune: float = 1e-6
) -> Iterator[np.ndarray]:
    """Yield successive matrices of the expansion/inflation iteration.

    Each step: raise the column-stochastic matrix to the e-th power, apply
    the entrywise r-th power, zero entries below prune, renormalize
    columns. The caller decides when to stop.
    """
    while True:
        M = np.linalg.matrix_power(M, e)
        M = M**r
        M[M < prune] = 0.0
        sums = M.sum(axis=0)
        # a column can only vanish entirely for n > 1/prune; restore uniform
        dead = sums == 0.0
        if dead.any():
            M[:, dead] = 1.0 / M.shape[0]
            sums = M.sum(axis=0)
        M = M / sums
        yield M


def _clusters_from_limit(
    M: np.ndarray, order: Sequence[str]
) -> tuple[list[frozenset[str]], np.ndarray]:
    """Read clusters off the limit matrix's attractor rows.

    Attractors are nodes with positive diagonal mass; each attractor row
    defines the member set of nodes flowing to it. Identical member sets
    (one attractor system) collapse to a single cluster; a node's
    attraction to a cluster is its total mass on that cluster's rows.
    """
    n = M.shape[0]
    attractors = [i for i in range(n) if M[i, i] > 0.0]
    if not attractors:
        # degenerate non-converged flow: fall back to one cluster of all
        return [frozenset(order)], np.ones((1, n))
    by_members: dict[frozenset[int], list[int]] = {}
    for a in attractors:
        members = frozenset(np.flatnonzero(M[a] > 0.0).tolist())
        by_members.setdefault(members, []).append(a)
    ordered = sorted(by_members.items(), key=lambda kv: min(kv[0]))
    clusters = [
        frozenset(order[i] for i in members) for members, _ in ordered
    ]
    attraction = np.vstack(
        [M[rows].sum(axis=0) for _, rows in ordered]
    )
    return clusters, attraction


def mcl(
    g: AffinityGraph,
    e: int = 2,
    r: float = 2.0,
    prune: float = 1e-6,
    max_iter: int = MCL_MAX_ITER,
) -> Clustering:
    """Flow-simulation clustering by expansion and inflation.

    Runs until the matrix moves less than 1e-8 in max norm or max_iter
    passes; a non-converged run still returns its partial clusters with
    converged=False.
    """
    if e < 2:
        raise ValueError(f"expansion power must be >= 2, got {e}")
    if r <= 1.0:
        raise ValueError(f"inflation power must be > 1, got {r}")
    if not g.nodes:
        raise EmptyGraph("clustering needs at least one node")
    order = tuple(g.sorted_nodes())
    M = _mcl_seed_matrix(g, order)
    converged = False
    iterations = 0
    for M_next in mcl_flow(M, e, r, prune):
        iterations += 1
        if np.max(np.abs(M_next - M)) < MCL_TOL:
            M = M_next
            converged = True
            break
        M = M_next
        if iterations >= max_iter:
            break
    clusters, attraction = _clusters_from_limit(M, order)
    return Clustering(
        clusters=tuple(clusters),
        method="mcl",
        params={"e": e, "r": r, "prune": prune},
        overlapping=True,
        nodes=order,
        iterations=iterations,
        converged=converged,
        attraction=attraction,
    )


def _init_destinations(g: AffinityGraph, H: np.ndarray, order: Sequence[str], k: int) -> list[int]:
    """Deterministic greedy coverage: max weighted in-degree first, then
    repeatedly the node whose addition most lowers the total assignment
    cost sum_i min_d H(i, d).

    A farthest-point spread was tried first but is unstable here: hitting
    times to low-traffic nodes are uniformly large, so it keeps electing
    peripheral nodes and can leave a dense region without a destination.
    """
    in_weight = {u: 0.0 for u in order}
    for (_, v), w in g.edges.items():
        in_weight[v] += w
    # ties on weight break toward the smaller node id
    candidates = sorted(range(len(order)), key=lambda i: order[i])
    best_weight = max(in_weight.values())
    first = next(i for i in candidates if in_weight[order[i]] == best_weight)
    destinations = [first]
    while len(destinations) < k:
        current = H[:, destinations].min(axis=1)
        totals = np.minimum(H, current[:, None]).sum(axis=0)
        totals[destinations] = np.inf
        destinations.append(int(np.argmin(totals)))
    return sorted(destinations, key=lambda i: order[i])


def k_destinations(
    g: AffinityGraph,
    k: int,
    max_iter: int = 100,
    tau: float = DEFAULT_TELEPORT,
) -> Clustering:
    """Disjoint clustering by minimal hitting time to destination nodes.

    Alternates (a) assigning each node to the destination with the smallest
    hitting time (ties to the lexicographically smallest destination id)
    and (b) re-centering each cluster on the member minimizing the sum of
    hitting times from the cluster to it, until assignments stop changing.
    """
    if not g.nodes:
        raise EmptyGraph("clustering needs at least one node")
    order = tuple(g.sorted_nodes())
    n = len(order)
    if not 1 <= k <= n:
        raise KOutOfRange(f"k must be in 1..{n}, got {k}")
    H = hitting_times(random_walk_matrix(g, tau)).entries
    destinations = _init_destinations(g, H, order, k)
    assignment = np.full(n, -1, dtype=int)
    trace: list[float] = []
    converged = False
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        # destinations sorted by id, so argmin's first hit is the tie rule
        cost = H[:, destinations]
        new_assignment = np.argmin(cost, axis=1)
        trace.append(float(cost[np.arange(n), new_assignment].sum()))
        if np.array_equal(new_assignment, assignment):
            converged = True
            break
        assignment = new_assignment
        new_destinations = []
        for c in range(k):
            members = np.flatnonzero(assignment == c)
            totals = H[np.ix_(members, members)].sum(axis=0)
            best = min(
                range(len(members)),
                key=lambda m: (totals[m], order[members[m]]),
            )
            new_destinations.append(int(members[best]))
        destinations = sorted(new_destinations, key=lambda i: order[i])
    clusters = tuple(
        frozenset(order[i] for i in np.flatnonzero(assignment == c))
        for c in range(k)
    )
    return Clustering(
        clusters=clusters,
        method="k-destinations",
        params={"k": k, "tau": tau},
        overlapping=False,
        nodes=order,
        iterations=iterations,
        converged=converged,
        destinations=tuple(order[d] for d in destinations),
        objective_trace=tuple(trace),
    )


def _entropy_from_counts(counts: np.ndarray, n: int) -> float:
    """Entropy in nats; counts are summed in sorted order so identical
    count multisets produce bitwise-identical values."""
    p = np.sort(counts[counts > 0]) / n
    return float(-(p * np.log(p)).sum())


def _as_labels(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise LengthMismatch(f"label vector must be 1-d, got shape {arr.shape}")
    return arr


def nmi(x, y) -> float:
    """Normalized mutual information I(x, y) / sqrt(H(x) H(y)).

    Computed as (H(x) + H(y) - H(x, y)) / sqrt(H(x) H(y)) with natural-log
    entropies from empirical counts, clipped into [0, 1]. If both
    labelings are constant the score is 1; if exactly one is constant the
    score is 0.
    """
    x, y = _as_labels(x), _as_labels(y)
    if len(x) != len(y) or len(x) == 0:
        raise LengthMismatch(f"lengths {len(x)} vs {len(y)}")
    n = len(x)
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    hx = _entropy_from_counts(np.bincount(xi), n)
    hy = _entropy_from_counts(np.bincount(yi), n)
    if hx == 0.0 and hy == 0.0:
        return 1.0
    if hx == 0.0 or hy == 0.0:
        return 0.0
    joint = np.bincount(xi * (yi.max() + 1) + yi)
    hxy = _entropy_from_counts(joint, n)
    mi = max(hx + hy - hxy, 0.0)
    return float(min(mi / np.sqrt(hx * hy), 1.0))


def clustering_error(pred, truth) -> float:
    """Minimal misassignment rate over all cluster-label permutations.

    Solved as an optimal assignment on the confusion matrix; label sets of
    different sizes are padded with empty clusters.
    """
    pred, truth = _as_labels(pred), _as_labels(truth)
    if len(pred) != len(truth) or len(pred) == 0:
        raise LengthMismatch(f"lengths {len(pred)} vs {len(truth)}")
    n = len(pred)
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    size = max(pi.max(), ti.max()) + 1
    confusion = np.zeros((size, size), dtype=np.int64)
    np.add.at(confusion, (pi, ti), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    matched = int(confusion[rows, cols].sum())
    return 1.0 - matched / n


def labels_from_clustering(c: Clustering) -> np.ndarray:
    """Cluster index per node, aligned with c.nodes.

    Overlapping clusterings resolve each node to the cluster with the
    largest attraction value (ties and missing attraction data fall back
    to the smallest containing cluster index).
    """
    index = {u: i for i, u in enumerate(c.nodes)}
    labels = np.zeros(len(c.nodes), dtype=int)
    if c.overlapping and c.attraction is not None:
        return np.argmax(c.attraction, axis=0)
    assigned = np.full(len(c.nodes), False)
    for ci, members in enumerate(c.clusters):
        for u in members:
            i = index[u]
            if not assigned[i]:
                labels[i] = ci
                assigned[i] = True
    return labels


def serialize_clustering(c: Clustering) -> str:
    """Rows of node_id / cluster_index under a metadata comment header."""
    params = " ".join(f"{k}={v}" for k, v in sorted(c.params.items()))
    lines = [
        f"# method={c.method}",
        f"# params: {params}",
        f"# iterations={c.iterations}",
        f"# converged={'true' if c.converged else 'false'}",
        "node_id\tcluster_index",
    ]
    rows = sorted(
        (u, ci) for ci, members in enumerate(c.clusters) for u in members
    )
    lines.extend(f"{u}\t{ci}" for u, ci in rows)
    return "\n".join(lines) + "\n"
