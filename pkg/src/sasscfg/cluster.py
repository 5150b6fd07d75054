"""Feature vectors and Ward-linkage agglomerative clustering.

The merge loop runs on plain Python arithmetic rather than numpy so that
exact inputs (ints, Fractions) produce exact merge distances — useful for
validating against a recompute-from-scratch oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .cfg import Cfg
from .errors import BadK, DimMismatch
from .profile import AnnotatedCfg
from .sass import MixVector


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-order grouping features for one kernel.

    Layout: k instruction-class fractions, normalized node count,
    normalized edge count, then optional distance-to-reference scores.
    ``norms`` records the (node, edge) denominators used.
    """

    kernel_id: str
    values: tuple[float, ...]
    norms: tuple[int, int] = (1, 1)

    def __post_init__(self) -> None:
        for v in self.values:
            if not math.isfinite(float(v)):
                raise ValueError(f"non-finite feature value {v!r} for {self.kernel_id}")


def corpus_norms(cfgs: Iterable[Cfg]) -> tuple[int, int]:
    """Corpus-wide (max node count, max edge count), floored at 1."""
    cfgs = list(cfgs)
    max_nodes = max((c.n_blocks for c in cfgs), default=0)
    max_edges = max((len(c.edges) for c in cfgs), default=0)
    return max(1, max_nodes), max(1, max_edges)


def feature_vector(
    acfg: AnnotatedCfg,
    mix: MixVector,
    norms: tuple[int, int],
    refs: Sequence[float] | None = None,
) -> FeatureVector:
    fractions = mix.fraction_vector()
    max_nodes, max_edges = norms
    values = (
        *fractions,
        acfg.cfg.n_blocks / max_nodes,
        len(acfg.cfg.edges) / max_edges,
        *(refs or ()),
    )
    return FeatureVector(kernel_id=acfg.cfg.kernel_id, values=values, norms=(max_nodes, max_edges))


@dataclass(frozen=True)
class Linkage:
    """Merge history: leaf clusters are ids 0..n-1, merged ones n..2n-2.

    Each merge row is (cluster_a, cluster_b, merge_distance, merged_size)
    with cluster_a < cluster_b.
    """

    merges: tuple[tuple[int, int, float, int], ...]
    n_leaves: int

    def __post_init__(self) -> None:
        if len(self.merges) != self.n_leaves - 1:
            raise ValueError(f"expected {self.n_leaves - 1} merges, got {len(self.merges)}")
        used: set[int] = set()
        for a, b, dist, size in self.merges:
            if dist < 0:
                raise ValueError(f"negative merge distance {dist}")
            if a in used or b in used:
                raise ValueError(f"cluster {a if a in used else b} merged twice")
            used.update((a, b))


def ward_linkage(vectors: Sequence[FeatureVector]) -> Linkage:
    """Agglomerate by Ward's minimum-variance criterion.

    Initial pair distances are squared Euclidean; merged-cluster distances
    follow the Lance-Williams recurrence
    d(k+l, j) = ((n_j+n_k) d(k,j) + (n_j+n_l) d(l,j) - n_j d(k,l)) / (n_j+n_k+n_l).
    Distance ties choose the smallest (id_a, id_b) pair.
    """
    n = len(vectors)
    if n < 2:
        raise ValueError("clustering needs at least 2 vectors")
    dim = len(vectors[0].values)
    for v in vectors:
        if len(v.values) != dim:
            raise DimMismatch(f"feature length {len(v.values)} != {dim} for {v.kernel_id}")

    dist: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = sum(
                (x - y) ** 2 for x, y in zip(vectors[i].values, vectors[j].values)
            )
    sizes: dict[int, int] = {i: 1 for i in range(n)}

    merges: list[tuple[int, int, float, int]] = []
    for next_id in range(n, 2 * n - 1):
        (k, l), d_kl = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        n_k, n_l = sizes.pop(k), sizes.pop(l)
        sizes[next_id] = n_k + n_l
        merges.append((k, l, d_kl, n_k + n_l))

        for j in list(sizes):
            if j == next_id:
                continue
            d_kj = dist.pop((min(j, k), max(j, k)))
            d_lj = dist.pop((min(j, l), max(j, l)))
            n_j = sizes[j]
            dist[(j, next_id)] = (
                (n_j + n_k) * d_kj + (n_j + n_l) * d_lj - n_j * d_kl
            ) / (n_j + n_k + n_l)
        del dist[(k, l)]

    return Linkage(merges=tuple(merges), n_leaves=n)


def cut_clusters(linkage: Linkage, k: int, ids: Sequence[str]) -> dict[str, int]:
    """Stop after n-k merges and index the surviving clusters.

    Index 0 goes to the cluster containing the smallest leaf id, and so on.
    """
    n = linkage.n_leaves
    if not 1 <= k <= n:
        raise BadK(f"cluster count {k} outside 1..{n}")
    if len(ids) != n:
        raise DimMismatch(f"{len(ids)} ids for {n} leaves")

    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for step, (a, b, _dist, _size) in enumerate(linkage.merges[: n - k]):
        members[n + step] = members.pop(a) + members.pop(b)

    clusters = sorted(members.values(), key=min)
    return {ids[leaf]: index for index, leaves in enumerate(clusters) for leaf in leaves}


def _heights(linkage: Linkage) -> dict[int, float]:
    # Dendrogram height of each cluster; a merge sits at half its distance.
    heights: dict[int, float] = {i: 0.0 for i in range(linkage.n_leaves)}
    for step, (_a, _b, dist, _size) in enumerate(linkage.merges):
        heights[linkage.n_leaves + step] = dist / 2
    return heights


def to_newick(linkage: Linkage, ids: Sequence[str]) -> str:
    """Newick tree; branch lengths are parent height minus child height."""
    n = linkage.n_leaves
    heights = _heights(linkage)
    children = {n + step: (a, b) for step, (a, b, _d, _s) in enumerate(linkage.merges)}

    def render(node: int, parent_height: float) -> str:
        length = f"{float(parent_height - heights[node]):g}"
        if node < n:
            return f"{ids[node]}:{length}"
        a, b = children[node]
        inner = f"({render(a, heights[node])},{render(b, heights[node])})"
        return f"{inner}:{length}"

    root = 2 * n - 2
    a, b = children[root]
    return f"({render(a, heights[root])},{render(b, heights[root])});"


def export_dendrogram(linkage: Linkage, ids: Sequence[str]) -> str:
    """Indented text rendering of the merge tree, leaves by kernel_id."""
    n = linkage.n_leaves
    heights = _heights(linkage)
    children = {n + step: (a, b) for step, (a, b, _d, _s) in enumerate(linkage.merges)}

    lines: list[str] = []

    def walk(node: int, depth: int) -> None:
        pad = "  " * depth
        if node < n:
            lines.append(f"{pad}- {ids[node]}")
            return
        lines.append(f"{pad}+ h={float(heights[node]):g}")
        a, b = children[node]
        walk(a, depth + 1)
        walk(b, depth + 1)

    walk(2 * n - 2, 0)
    return "\n".join(lines) + "\n"


def export_linkage_csv(linkage: Linkage) -> str:
    lines = ["a,b,distance,size"]
    for a, b, dist, size in linkage.merges:
        lines.append(f"{a},{b},{float(dist):.6g},{size}")
    return "\n".join(lines) + "\n"


def export_clusters_csv(assignment: dict[str, int]) -> str:
    lines = ["kernel_id,cluster"]
    for kernel_id in sorted(assignment):
        lines.append(f"{kernel_id},{assignment[kernel_id]}")
    return "\n".join(lines) + "\n"
