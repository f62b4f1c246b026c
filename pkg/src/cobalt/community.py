"""Leiden community detection with multislice modularity as the objective.

The multi-layer network is flattened to a supra-graph whose vertices are
node-layer copies. Intra-layer edges are judged against a per-layer
configuration null model; coupling edges between an entity's copies reward
co-assignment directly and carry no null term:

    Q = sum over co-assigned vertex pairs of
        [ (A_ij - gamma * k_i k_j / 2m_layer) * same_layer + C_ij ] / 2mu

with 2mu twice the total edge weight (intra plus coupling).

The optimizer follows the Leiden scheme: fast local moving with a work
queue, a refinement phase that rebuilds each community from singletons and
accepts positive-gain merges with probability proportional to
exp(gain / theta), then aggregation of the refined partition. Passes repeat
until neither moving nor refinement changes anything. Communities of the
returned partition always induce connected subgraphs; any community left
disconnected by the move phase is split, which can only raise Q.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import MultiLayerNetwork, NodeRef, Partition

_GAIN_TOL = 1e-12


@dataclass(frozen=True)
class LeidenConfig:
    """Hyperparameters of one detection run.

    gamma: resolution of the per-layer null model.
    theta: refinement randomness; 0 makes refinement greedy.
    seed: drives vertex visit order and refinement sampling.
    max_passes: hard cap on move/refine/aggregate passes.
    """

    gamma: float = 1.0
    theta: float = 0.01
    seed: int = 0
    max_passes: int = 20

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError(f"resolution must be positive, got {self.gamma}")
        if self.theta < 0:
            raise ValueError(f"theta must be non-negative, got {self.theta}")
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be at least 1, got {self.max_passes}")


class SupraGraph:
    """Flattened view of a multi-layer network for community detection."""

    def __init__(self, mln: MultiLayerNetwork):
        layer_index = {layer: i for i, layer in enumerate(mln.layers)}
        self.layers: tuple[str, ...] = mln.layers
        self.vertices: list[NodeRef] = sorted(
            mln.nodes, key=lambda n: (layer_index[n.layer], n.entity)
        )
        self.index: dict[NodeRef, int] = {n: i for i, n in enumerate(self.vertices)}
        self.layer_of = np.array(
            [layer_index[n.layer] for n in self.vertices], dtype=np.int64
        )

        n = len(self.vertices)
        # canonical edge order: adjacency (and so float summation order in
        # the optimizer) must not depend on how the edge dicts were built
        self.intra: list[dict[int, float]] = [dict() for _ in range(n)]
        self.coupling: list[dict[int, float]] = [dict() for _ in range(n)]
        for (a, b) in sorted(mln.intra_edges):
            w = mln.intra_edges[(a, b)]
            i, j = self.index[a], self.index[b]
            self.intra[i][j] = w
            self.intra[j][i] = w
        for (a, b) in sorted(mln.inter_edges):
            w = mln.inter_edges[(a, b)]
            i, j = self.index[a], self.index[b]
            self.coupling[i][j] = w
            self.coupling[j][i] = w

        self.strength = np.array(
            [sum(nbrs.values()) for nbrs in self.intra], dtype=float
        )
        self.layer_weight = np.zeros(len(mln.layers), dtype=float)
        for v in range(n):
            self.layer_weight[self.layer_of[v]] += self.strength[v]
        # exact sums keep the normalization independent of edge-dict order
        self.total_weight = math.fsum(mln.intra_edges.values()) + math.fsum(
            mln.inter_edges.values()
        )

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)


def multislice_modularity(
    supra: SupraGraph,
    partition: Partition | Mapping[NodeRef, int],
    gamma: float = 1.0,
) -> float:
    """Quality of ``partition`` on the flattened network.

    Raises on an edgeless graph (the normalization is undefined) and when the
    partition does not cover every vertex.
    """
    assignment = partition.assignment if isinstance(partition, Partition) else partition
    if supra.vertex_count == 0:
        raise ValueError("empty graph")
    if supra.total_weight <= 0.0:
        raise ValueError("graph has no edges; modularity undefined")
    try:
        comm = np.array([assignment[v] for v in supra.vertices], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"partition does not cover vertex {exc.args[0]}") from exc

    link = 0.0
    for i in range(supra.vertex_count):
        ci = comm[i]
        for j, w in supra.intra[i].items():
            if i < j and comm[j] == ci:
                link += w
        for j, w in supra.coupling[i].items():
            if i < j and comm[j] == ci:
                link += w

    null = 0.0
    group_strength: dict[tuple[int, int], float] = {}
    for i in range(supra.vertex_count):
        key = (int(comm[i]), int(supra.layer_of[i]))
        group_strength[key] = group_strength.get(key, 0.0) + supra.strength[i]
    for (_, layer), k_sum in group_strength.items():
        two_m = supra.layer_weight[layer]
        if two_m > 0.0:
            null += k_sum * k_sum / two_m

    return (2.0 * link - gamma * null) / (2.0 * supra.total_weight)


def canonicalize(partition: Partition) -> Partition:
    """Relabel communities to dense ids ordered by first appearance."""
    relabel: dict[int, int] = {}
    assignment: dict[NodeRef, int] = {}
    for node, label in partition.assignment.items():
        if label not in relabel:
            relabel[label] = len(relabel)
        assignment[node] = relabel[label]
    return Partition(assignment, partition.quality)


@dataclass(frozen=True)
class LeidenResult:
    """Partition, its quality, and the per-pass quality log."""

    partition: Partition
    quality: float
    history: tuple[float, ...]


class _Level:
    """One aggregation level: super-vertices with merged adjacency."""

    __slots__ = ("n", "adj", "strengths", "members")

    def __init__(
        self,
        n: int,
        adj: list[dict[int, float]],
        strengths: list[dict[int, float]],
        members: list[list[int]],
    ):
        self.n = n
        self.adj = adj
        self.strengths = strengths
        self.members = members


def _level_zero(supra: SupraGraph) -> _Level:
    n = supra.vertex_count
    adj: list[dict[int, float]] = []
    for v in range(n):
        merged = dict(supra.intra[v])
        for u, w in supra.coupling[v].items():
            merged[u] = merged.get(u, 0.0) + w
        adj.append(merged)
    strengths = [
        {int(supra.layer_of[v]): float(supra.strength[v])}
        for v in range(n)
    ]
    members = [[v] for v in range(n)]
    return _Level(n, adj, strengths, members)


def _null_score(
    v_strengths: dict[int, float],
    comm_strengths: dict[int, float],
    inv_layer_weight: np.ndarray,
) -> float:
    """gamma-free part of the null interaction between a vertex and a community."""
    total = 0.0
    for layer, k in v_strengths.items():
        other = comm_strengths.get(layer)
        if other:
            total += k * other * inv_layer_weight[layer]
    return total


def _local_move(
    level: _Level,
    comm: list[int],
    comm_strengths: dict[int, dict[int, float]],
    next_id: list[int],
    gamma: float,
    inv_layer_weight: np.ndarray,
    rng: np.random.Generator,
) -> int:
    """Queue-driven local moving; returns the number of accepted moves."""
    order = rng.permutation(level.n)
    queue = deque(int(v) for v in order)
    queued = [True] * level.n
    moves = 0

    while queue:
        v = queue.popleft()
        queued[v] = False
        current = comm[v]
        v_str = level.strengths[v]

        weight_to: dict[int, float] = {}
        for u, w in level.adj[v].items():
            cu = comm[u]
            weight_to[cu] = weight_to.get(cu, 0.0) + w

        cur_strengths = comm_strengths[current]
        self_null = sum(
            k * k * inv_layer_weight[layer] for layer, k in v_str.items()
        )
        stay_score = weight_to.get(current, 0.0) - gamma * (
            _null_score(v_str, cur_strengths, inv_layer_weight) - self_null
        )

        best_comm = current
        best_score = stay_score
        for cand in sorted(weight_to):
            if cand == current:
                continue
            score = weight_to[cand] - gamma * _null_score(
                v_str, comm_strengths[cand], inv_layer_weight
            )
            if score > best_score + _GAIN_TOL:
                best_comm = cand
                best_score = score
        # a fresh singleton community scores zero; take it when leaving wins
        if 0.0 > best_score + _GAIN_TOL:
            best_comm = next_id[0]
            next_id[0] += 1
            comm_strengths[best_comm] = {}

        if best_comm == current:
            continue

        for layer, k in v_str.items():
            cur_strengths[layer] = cur_strengths.get(layer, 0.0) - k
        dest = comm_strengths[best_comm]
        for layer, k in v_str.items():
            dest[layer] = dest.get(layer, 0.0) + k
        comm[v] = best_comm
        moves += 1
        for u in level.adj[v]:
            if comm[u] != best_comm and not queued[u]:
                queue.append(u)
                queued[u] = True
    return moves


def _refine(
    level: _Level,
    comm: list[int],
    gamma: float,
    theta: float,
    mu: float,
    inv_layer_weight: np.ndarray,
    rng: np.random.Generator,
) -> list[int]:
    """Rebuild every community from singletons with stochastic merges.

    Only vertices still alone in their refined community may move, and only
    into refined communities of the same parent community they are linked to.
    Candidates with positive gain are sampled with probability proportional
    to exp(gain / theta); theta = 0 degenerates to the greedy choice.
    """
    refined = list(range(level.n))
    ref_strengths: dict[int, dict[int, float]] = {
        v: dict(level.strengths[v]) for v in range(level.n)
    }
    ref_size = [1] * level.n

    for v in (int(x) for x in rng.permutation(level.n)):
        if ref_size[refined[v]] > 1:
            continue
        parent = comm[v]
        v_str = level.strengths[v]
        weight_to: dict[int, float] = {}
        for u, w in level.adj[v].items():
            if comm[u] == parent and refined[u] != refined[v]:
                ru = refined[u]
                weight_to[ru] = weight_to.get(ru, 0.0) + w
        if not weight_to:
            continue

        candidates: list[int] = []
        gains: list[float] = []
        for cand in sorted(weight_to):
            raw = weight_to[cand] - gamma * _null_score(
                v_str, ref_strengths[cand], inv_layer_weight
            )
            if raw > _GAIN_TOL:
                candidates.append(cand)
                gains.append(raw / mu)
        if not candidates:
            continue

        if theta <= 0.0:
            chosen = candidates[int(np.argmax(gains))]
        else:
            logits = np.array(gains) / theta
            weights = np.exp(logits - logits.max())
            probs = weights / weights.sum()
            chosen = candidates[int(rng.choice(len(candidates), p=probs))]

        old = refined[v]
        del ref_strengths[old]
        ref_size[old] = 0
        dest = ref_strengths[chosen]
        for layer, k in v_str.items():
            dest[layer] = dest.get(layer, 0.0) + k
        ref_size[chosen] += 1
        refined[v] = chosen
    return refined


def _aggregate(
    level: _Level, refined: list[int], comm: list[int]
) -> tuple[_Level, list[int]]:
    """Merge refined communities into super-vertices; project communities."""
    dense: dict[int, int] = {}
    for v in range(level.n):
        if refined[v] not in dense:
            dense[refined[v]] = len(dense)
    n_new = len(dense)

    adj: list[dict[int, float]] = [dict() for _ in range(n_new)]
    strengths: list[dict[int, float]] = [dict() for _ in range(n_new)]
    members: list[list[int]] = [[] for _ in range(n_new)]
    new_comm = [0] * n_new

    for v in range(level.n):
        sv = dense[refined[v]]
        members[sv].extend(level.members[v])
        new_comm[sv] = comm[v]
        tgt = strengths[sv]
        for layer, k in level.strengths[v].items():
            tgt[layer] = tgt.get(layer, 0.0) + k
        row = adj[sv]
        for u, w in level.adj[v].items():
            su = dense[refined[u]]
            if su != sv:
                row[su] = row.get(su, 0.0) + w
    return _Level(n_new, adj, strengths, members), new_comm


def _split_disconnected(
    supra: SupraGraph, assignment: dict[NodeRef, int]
) -> dict[NodeRef, int]:
    """Split communities into supra-graph connected components.

    Splitting removes no within-community edges, so the link term is intact
    and the per-layer null term can only shrink; Q never decreases.
    """
    groups: dict[int, list[int]] = {}
    for node, label in assignment.items():
        groups.setdefault(label, []).append(supra.index[node])

    result: dict[NodeRef, int] = {}
    fresh = 0
    for label in sorted(groups):
        vertices = groups[label]
        in_group = set(vertices)
        unseen = set(vertices)
        for start in vertices:
            if start not in unseen:
                continue
            component = [start]
            unseen.discard(start)
            stack = [start]
            while stack:
                x = stack.pop()
                for nbrs in (supra.intra[x], supra.coupling[x]):
                    for y in nbrs:
                        if y in unseen and y in in_group:
                            unseen.discard(y)
                            component.append(y)
                            stack.append(y)
            for v in component:
                result[supra.vertices[v]] = fresh
            fresh += 1
    return {v: result[v] for v in supra.vertices}


def leiden(supra: SupraGraph, cfg: LeidenConfig = LeidenConfig()) -> LeidenResult:
    """Detect communities; deterministic for a fixed (graph, config) pair.

    The returned quality always equals ``multislice_modularity`` of the
    returned partition, every community induces a connected subgraph, and
    the per-pass history is non-decreasing.
    """
    if supra.vertex_count == 0:
        raise ValueError("graph has no vertices")
    if supra.total_weight <= 0.0:
        assignment = {v: i for i, v in enumerate(supra.vertices)}
        partition = canonicalize(Partition(assignment, 0.0))
        return LeidenResult(partition, 0.0, (0.0,))

    rng = np.random.default_rng(cfg.seed)
    mu = supra.total_weight
    inv_layer_weight = np.zeros_like(supra.layer_weight)
    nonzero = supra.layer_weight > 0.0
    inv_layer_weight[nonzero] = 1.0 / supra.layer_weight[nonzero]

    level = _level_zero(supra)
    comm = list(range(level.n))
    comm_strengths: dict[int, dict[int, float]] = {
        v: dict(level.strengths[v]) for v in range(level.n)
    }
    next_id = [level.n]
    history: list[float] = []

    for _ in range(cfg.max_passes):
        moves = _local_move(
            level, comm, comm_strengths, next_id, cfg.gamma, inv_layer_weight, rng
        )
        flat = _flatten(supra, level, comm)
        history.append(multislice_modularity(supra, flat, cfg.gamma))

        refined = _refine(
            level, comm, cfg.gamma, cfg.theta, mu, inv_layer_weight, rng
        )
        n_refined = len(set(refined))
        if moves == 0 and n_refined == level.n:
            break
        level, comm = _aggregate(level, refined, comm)
        comm_strengths = {}
        for v in range(level.n):
            tgt = comm_strengths.setdefault(comm[v], {})
            for layer, k in level.strengths[v].items():
                tgt[layer] = tgt.get(layer, 0.0) + k
        next_id = [max(comm) + 1]

    assignment = _flatten(supra, level, comm)
    assignment = _split_disconnected(supra, assignment)
    quality = multislice_modularity(supra, assignment, cfg.gamma)
    history.append(quality)
    partition = canonicalize(Partition(assignment, quality))
    return LeidenResult(partition, quality, tuple(history))


def _flatten(
    supra: SupraGraph, level: _Level, comm: Sequence[int]
) -> dict[NodeRef, int]:
    assignment: dict[NodeRef, int] = {}
    for v in range(level.n):
        label = comm[v]
        for orig in level.members[v]:
            assignment[supra.vertices[orig]] = label
    return {v: assignment[v] for v in supra.vertices}
