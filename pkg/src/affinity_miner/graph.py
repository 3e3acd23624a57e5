"""Personality-labeled weighted directed affinity graph.

Edges below the affinity threshold are discarded, as are edges whose
endpoints lack a profile; nodes with no surviving incident edge are dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Mapping

from .errors import EmptyGraph, MalformedRecord
from .ingest import ALL_TYPES, MbtiType, UserProfile, parse_mbti

log = logging.getLogger(__name__)

DEFAULT_EDGE_THRESHOLD = 1e-5

EDGE_TSV_HEADER = "source\ttarget\tweight\tsource_type\ttarget_type"


@dataclass(frozen=True)
class AffinityGraph:
    """nodes maps user_id -> type label; edges map (u, v) -> weight."""

    nodes: dict[str, MbtiType]
    edges: dict[tuple[str, str], float]
    threshold: float = field(default=DEFAULT_EDGE_THRESHOLD)

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)

    def undirected_neighbors(self) -> dict[str, set[str]]:
        """Adjacency with direction collapsed; reciprocal edges count once."""
        neigh: dict[str, set[str]] = {u: set() for u in self.nodes}
        for u, v in self.edges:
            neigh[u].add(v)
            neigh[v].add(u)
        return neigh


@dataclass(frozen=True)
class TypePairTable:
    """Percentages over the 136 unordered type pairs (same-type included)."""

    entries: dict[tuple[MbtiType, MbtiType], float]

    def __post_init__(self):
        if len(self.entries) != 136:
            raise ValueError(f"expected 136 entries, got {len(self.entries)}")


def all_type_pairs() -> list[tuple[MbtiType, MbtiType]]:
    """The 136 unordered pairs of the 16 types, in sorted code order."""
    return list(combinations_with_replacement(ALL_TYPES, 2))


def _pair_key(p: MbtiType, q: MbtiType) -> tuple[MbtiType, MbtiType]:
    return (p, q) if p.value <= q.value else (q, p)


def build_affinity_graph(
    scores: Mapping[tuple[str, str], object],
    profiles: Iterable[UserProfile],
    threshold: float = DEFAULT_EDGE_THRESHOLD,
) -> AffinityGraph:
    """Keep edges with weight >= threshold whose endpoints both have profiles.

    Score values may be AffinityScore objects or plain floats. Pairs with a
    missing profile are dropped and counted in a log diagnostic; isolated
    nodes are dropped.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    labels = {p.user_id: p.mbti for p in profiles}
    edges: dict[tuple[str, str], float] = {}
    missing_profile = 0
    for (u, v), score in scores.items():
        w = float(getattr(score, "value", score))
        if w < threshold:
            continue
        if u not in labels or v not in labels:
            missing_profile += 1
            continue
        edges[(u, v)] = w
    if missing_profile:
        log.info("dropped %d scored pairs lacking a profile", missing_profile)
    nodes = {u for edge in edges for u in edge}
    return AffinityGraph(
        nodes={u: labels[u] for u in sorted(nodes)},
        edges=dict(sorted(edges.items())),
        threshold=threshold,
    )


def type_pair_percentages(g: AffinityGraph) -> TypePairTable:
    """Share of edges per unordered label pair, as percentages of all edges."""
    if not g.edges:
        raise EmptyGraph("type-pair percentages need at least one edge")
    counts = {pair: 0 for pair in all_type_pairs()}
    for u, v in g.edges:
        counts[_pair_key(g.nodes[u], g.nodes[v])] += 1
    total = len(g.edges)
    return TypePairTable(
        {pair: 100.0 * c / total for pair, c in counts.items()}
    )


def export_graph(g: AffinityGraph, format: str = "edge-tsv") -> bytes:
    """Serialize the graph; edge-tsv round-trips exactly (17 digit weights)."""
    if format == "edge-tsv":
        lines = [EDGE_TSV_HEADER]
        for (u, v), w in sorted(g.edges.items()):
            lines.append(f"{u}\t{v}\t{w:.17g}\t{g.nodes[u]}\t{g.nodes[v]}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "dot":
        lines = ["digraph affinity {"]
        for u in g.sorted_nodes():
            lines.append(f'  "{u}" [label="{g.nodes[u]}"];')
        for (u, v), w in sorted(g.edges.items()):
            lines.append(f'  "{u}" -> "{v}" [weight={w:.17g}];')
        lines.append("}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unknown export format: {format!r}")


def parse_graph_tsv(
    data: bytes | str, threshold: float = DEFAULT_EDGE_THRESHOLD
) -> AffinityGraph:
    """Inverse of export_graph(.., "edge-tsv")."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != EDGE_TSV_HEADER:
        raise MalformedRecord("missing or bad edge-tsv header", line=1)
    nodes: dict[str, MbtiType] = {}
    edges: dict[tuple[str, str], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 5:
            raise MalformedRecord(
                f"expected 5 fields, got {len(parts)}", line=lineno
            )
        u, v, weight_text, u_type, v_type = parts
        edges[(u, v)] = float(weight_text)
        nodes[u] = parse_mbti(u_type)
        nodes[v] = parse_mbti(v_type)
    return AffinityGraph(
        nodes=dict(sorted(nodes.items())),
        edges=dict(sorted(edges.items())),
        threshold=threshold,
    )
