"""Network construction: z-score normalization and similarity edges.

Every pair of entities inside one layer is joined by an edge weighted with
the reciprocal of their normalized score difference, so close scores mean
heavy edges. The same transformation couples an entity's copies across
layers. Identical normalized scores would divide by zero, so the difference
is clamped below at ``EPSILON``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .model import (
    DegenerateLayerError,
    InsufficientDataError,
    MultiLayerNetwork,
    NodeRef,
    ScoreTable,
    edge_key,
)

EPSILON = 1e-9


@dataclass(frozen=True)
class LayerNormalization:
    """Z-scored column of one layer plus the moments used to compute it."""

    layer: str
    mean: float
    std: float
    values: Mapping[str, float]


def normalize_layer(table: ScoreTable, layer: str) -> LayerNormalization:
    """Z-score the present cells of ``layer`` (population standard deviation).

    Raises :class:`InsufficientDataError` for fewer than two present scores
    and :class:`DegenerateLayerError` for a constant column.
    """
    entities, raw = table.layer_values(layer)
    if len(raw) < 2:
        raise InsufficientDataError(
            f"layer {layer!r} has {len(raw)} present scores, needs at least 2"
        )
    arr = np.asarray(raw, dtype=float)
    mean = float(arr.mean())
    std = float(arr.std())
    if std <= 0.0:
        raise DegenerateLayerError(f"layer {layer!r} is constant (std = 0)")
    z = (arr - mean) / std
    return LayerNormalization(layer, mean, std, dict(zip(entities, z.tolist())))


def intra_layer_weight(s_i: float, s_j: float, eps: float = EPSILON) -> float:
    """Edge weight 1/|s_i - s_j|, clamped to 1/eps for near-identical scores."""
    return 1.0 / max(abs(s_i - s_j), eps)


def inter_layer_weight(s_a: float, s_b: float, eps: float = EPSILON) -> float:
    """Coupling weight between one entity's normalized scores in two layers."""
    return 1.0 / max(abs(s_a - s_b), eps)


def build_layer_graph(table: ScoreTable, layer: str) -> MultiLayerNetwork:
    """Complete weighted graph over the entities present in ``layer``."""
    norm = normalize_layer(table, layer)
    entities = [e for e in table.entities if e in norm.values]
    z = np.array([norm.values[e] for e in entities])
    diff = np.abs(z[:, None] - z[None, :])
    weights = 1.0 / np.maximum(diff, EPSILON)

    nodes = frozenset(NodeRef(e, layer) for e in entities)
    intra: dict[tuple[NodeRef, NodeRef], float] = {}
    n = len(entities)
    for i in range(n):
        a = NodeRef(entities[i], layer)
        for j in range(i + 1, n):
            b = NodeRef(entities[j], layer)
            intra[edge_key(a, b)] = float(weights[i, j])
    return MultiLayerNetwork((layer,), nodes, intra, {})


def extend_mln(
    mln: MultiLayerNetwork, table: ScoreTable, layer: str
) -> MultiLayerNetwork:
    """New network = ``mln`` plus the complete graph of ``layer`` plus coupling
    edges between every shared entity and its copies in all existing layers.
    """
    if layer in mln.layers:
        raise ValueError(f"layer {layer!r} already in network")
    addition = build_layer_graph(table, layer)
    new_norm = normalize_layer(table, layer)

    nodes = frozenset(mln.nodes | addition.nodes)
    intra = dict(mln.intra_edges)
    intra.update(addition.intra_edges)

    inter = dict(mln.inter_edges)
    for existing in mln.layers:
        old_norm = normalize_layer(table, existing)
        for entity, z_new in new_norm.values.items():
            z_old = old_norm.values.get(entity)
            if z_old is None:
                continue
            a = NodeRef(entity, existing)
            b = NodeRef(entity, layer)
            inter[edge_key(a, b)] = inter_layer_weight(z_old, z_new)
    return MultiLayerNetwork(mln.layers + (layer,), nodes, intra, inter)


def build_network(
    table: ScoreTable, layers: Iterable[str] | None = None
) -> MultiLayerNetwork:
    """Complete multi-layer network over ``layers`` (defaults to all layers)."""
    chosen = tuple(layers) if layers is not None else table.layers
    if not chosen:
        raise ValueError("need at least one layer")

    norms = {layer: normalize_layer(table, layer) for layer in chosen}
    mln = build_layer_graph(table, chosen[0])
    nodes = set(mln.nodes)
    intra = dict(mln.intra_edges)
    inter: dict[tuple[NodeRef, NodeRef], float] = {}

    for idx in range(1, len(chosen)):
        layer = chosen[idx]
        addition = build_layer_graph(table, layer)
        nodes |= addition.nodes
        intra.update(addition.intra_edges)
        for prev in chosen[:idx]:
            prev_values = norms[prev].values
            for entity, z_new in norms[layer].values.items():
                z_old = prev_values.get(entity)
                if z_old is None:
                    continue
                a = NodeRef(entity, prev)
                b = NodeRef(entity, layer)
                inter[edge_key(a, b)] = inter_layer_weight(z_old, z_new)
    return MultiLayerNetwork(chosen, frozenset(nodes), intra, inter)


def expected_intra_edge_count(table: ScoreTable, layer: str) -> int:
    """C(n, 2) for the entities present in ``layer``; pre-pruning count."""
    present = sum(1 for e in table.entities if (e, layer) in table.scores)
    return math.comb(present, 2)
