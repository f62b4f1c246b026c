"""Two-way purity and F-measure between community partitions.

Partitions may cover different node sets; a ground-truth community whose
members do not appear in the other partition at all simply contributes zero
precision and zero recall while still counting toward the macro average.
Matching is by maximum overlap, never by community label, because labels are
arbitrary across independent detection runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping


class DisjointPartitionsError(ValueError):
    """The two partitions share no elements, similarity is undefined."""


def _canonical_communities(partition: Mapping[Hashable, int]) -> list[set]:
    """Member sets in canonical order: first appearance over sorted elements.

    Sorting elements first makes the order independent of both mapping
    insertion order and the community labels themselves.
    """
    order: dict[int, int] = {}
    groups: dict[int, set] = {}
    for element in sorted(partition):
        label = partition[element]
        if label not in order:
            order[label] = len(order)
            groups[label] = set()
        groups[label].add(element)
    return [groups[label] for label in sorted(order, key=order.get)]


@dataclass(frozen=True)
class OverlapMatrix:
    """Shared-element counts between the communities of two partitions."""

    counts: tuple[tuple[int, ...], ...]
    row_communities: tuple[frozenset, ...]
    col_communities: tuple[frozenset, ...]


def restrict_to_shared(
    p_a: Mapping[Hashable, int], p_b: Mapping[Hashable, int]
) -> tuple[dict, dict, set]:
    """Both partitions restricted to their common elements.

    Communities emptied by the restriction are dropped.
    """
    shared = set(p_a) & set(p_b)
    return (
        {e: c for e, c in p_a.items() if e in shared},
        {e: c for e, c in p_b.items() if e in shared},
        shared,
    )


def overlap_matrix(
    p_a: Mapping[Hashable, int], p_b: Mapping[Hashable, int]
) -> OverlapMatrix:
    """Overlap counts over the shared elements of the two partitions."""
    ra, rb, _ = restrict_to_shared(p_a, p_b)
    rows = _canonical_communities(ra)
    cols = _canonical_communities(rb)
    counts = tuple(
        tuple(len(r & c) for c in cols) for r in rows
    )
    return OverlapMatrix(
        counts,
        tuple(frozenset(r) for r in rows),
        tuple(frozenset(c) for c in cols),
    )


def _require_shared(p_gt: Mapping, p_sys: Mapping) -> None:
    if not p_gt or not p_sys:
        raise DisjointPartitionsError("empty partition")
    if not set(p_gt) & set(p_sys):
        raise DisjointPartitionsError("partitions share no elements")


def one_way_f(
    p_gt: Mapping[Hashable, int], p_sys: Mapping[Hashable, int]
) -> tuple[float, float, float]:
    """(macro precision, macro recall, F) with ``p_gt`` as ground truth.

    Each ground-truth community is matched to the system community with the
    largest overlap (ties broken toward the smaller canonical id). Precision
    is overlap over the matched community's size, recall is overlap over the
    ground-truth community's size; both are zero when nothing overlaps.
    Macro averages are unweighted over ground-truth communities.
    """
    _require_shared(p_gt, p_sys)
    gt_groups = _canonical_communities(p_gt)
    sys_groups = _canonical_communities(p_sys)

    precisions: list[float] = []
    recalls: list[float] = []
    for g in gt_groups:
        best_overlap = 0
        best_size = 0
        for s in sys_groups:
            overlap = len(g & s)
            if overlap > best_overlap:
                best_overlap = overlap
                best_size = len(s)
        if best_overlap == 0:
            precisions.append(0.0)
            recalls.append(0.0)
        else:
            precisions.append(best_overlap / best_size)
            recalls.append(best_overlap / len(g))

    macro_p = sum(precisions) / len(precisions)
    macro_r = sum(recalls) / len(recalls)
    return macro_p, macro_r, _harmonic(macro_p, macro_r)


def bidirectional_f(
    p_a: Mapping[Hashable, int], p_b: Mapping[Hashable, int]
) -> float:
    """Harmonic mean of the two directed F-measures; symmetric in a and b."""
    f_ab = one_way_f(p_a, p_b)[2]
    f_ba = one_way_f(p_b, p_a)[2]
    return _harmonic(f_ab, f_ba)


def one_way_purity(
    p_gt: Mapping[Hashable, int], p_sys: Mapping[Hashable, int]
) -> float:
    """Fraction of system elements landing in their best ground-truth match."""
    _require_shared(p_gt, p_sys)
    gt_groups = _canonical_communities(p_gt)
    sys_groups = _canonical_communities(p_sys)
    matched = sum(
        max(len(s & g) for g in gt_groups) for s in sys_groups
    )
    return matched / len(p_sys)


def bidirectional_purity(
    p_a: Mapping[Hashable, int], p_b: Mapping[Hashable, int]
) -> float:
    """Harmonic mean of the two directed purities."""
    return _harmonic(one_way_purity(p_a, p_b), one_way_purity(p_b, p_a))


def _harmonic(x: float, y: float) -> float:
    if x <= 0.0 or y <= 0.0:
        return 0.0
    return 2.0 * x * y / (x + y)
