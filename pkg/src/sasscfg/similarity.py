"""Pairwise distance measures over transition matrices.

All six measures operate on the row-major flattenings of two equal-size
matrices; callers normalize sizes first (see ``normalize_pair``).  The
IsoRank alignment is a damped power iteration over the Kronecker product of
the two row-renormalized matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BadOrder, DegenerateInput, DimMismatch, DuplicateKernel, SasscfgError
from .matrix import TransitionMatrix, normalize_pair


class MeasureId(str, Enum):
    EUC = "euc"
    ISO = "iso"
    MAN = "man"
    MIN = "min"
    JAC = "jac"
    COS = "cos"


def _flatten_pair(a: TransitionMatrix, b: TransitionMatrix) -> tuple[np.ndarray, np.ndarray]:
    if a.n != b.n:
        raise DimMismatch(f"matrix dimensions differ: {a.n} vs {b.n}")
    return a.entries.ravel(), b.entries.ravel()


def euclidean(a: TransitionMatrix, b: TransitionMatrix) -> float:
    x, y = _flatten_pair(a, b)
    return float(np.sqrt(np.sum(np.abs(x - y) ** 2)))


def manhattan(a: TransitionMatrix, b: TransitionMatrix) -> float:
    x, y = _flatten_pair(a, b)
    return float(np.sum(np.abs(x - y)))


def minkowski(a: TransitionMatrix, b: TransitionMatrix, p: float = 3.0) -> float:
    if p < 1:
        raise BadOrder(f"order p must be >= 1, got {p}")
    x, y = _flatten_pair(a, b)
    return float(np.sum(np.abs(x - y) ** p) ** (1.0 / p))


def jaccard(a: TransitionMatrix, b: TransitionMatrix) -> float:
    x, y = _flatten_pair(a, b)
    denom = float(np.sum(x * x) + np.sum(y * y) - np.sum(x * y))
    if denom == 0.0:
        raise DegenerateInput("jaccard undefined for two all-zero matrices")
    return float(np.sum((x - y) ** 2)) / denom


def cosine(a: TransitionMatrix, b: TransitionMatrix) -> float:
    x, y = _flatten_pair(a, b)
    nx = float(np.sqrt(np.sum(x * x)))
    ny = float(np.sqrt(np.sum(y * y)))
    if nx == 0.0 or ny == 0.0:
        raise DegenerateInput("cosine undefined for an all-zero matrix")
    return 1.0 - float(np.sum(x * y)) / (nx * ny)


@dataclass(frozen=True)
class AlignmentResult:
    """Node-pair alignment between two equal-size graphs.

    ``matrix[i, j]`` is the stationary probability mass on the pair
    (node i of the first graph, node j of the second); the whole matrix
    sums to 1.  ``matching`` maps each row to its greedily chosen column.
    """

    matrix: np.ndarray
    matching: tuple[int, ...]
    matched_weight: float
    iterations: int
    converged: bool


def _row_normalized(entries: np.ndarray) -> np.ndarray:
    """Row-stochastic copy; all-zero rows become uniform rows."""
    n = entries.shape[0]
    out = np.array(entries, dtype=float)
    sums = out.sum(axis=1)
    zero = sums == 0
    out[zero] = 1.0 / n
    out[~zero] = out[~zero] / sums[~zero, None]
    return out


def _greedy_matching(matrix: np.ndarray) -> tuple[int, ...]:
    """Repeatedly take the largest remaining entry; ties go to the lowest
    (row, column) in row-major order."""
    n = matrix.shape[0]
    work = matrix.copy()
    match: dict[int, int] = {}
    for _ in range(n):
        flat = int(np.argmax(work))
        row, col = divmod(flat, n)
        match[row] = col
        work[row, :] = -1.0
        work[:, col] = -1.0
    return tuple(match[i] for i in range(n))


def isorank_align(
    a: TransitionMatrix,
    b: TransitionMatrix,
    alpha: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 1000,
    start: np.ndarray | None = None,
) -> AlignmentResult:
    """Align two graphs by damped power iteration on their Kronecker product.

    Iterates x <- alpha * K^T x + (1 - alpha) * h where K is the Kronecker
    product of the row-renormalized transition matrices and h is uniform.
    The vector is renormalized to sum 1 every step; iteration stops when
    the L1 change drops below tol.  Non-convergence is reported via the
    ``converged`` flag, never raised.
    """
    if a.n != b.n:
        raise DimMismatch(f"matrix dimensions differ: {a.n} vs {b.n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    n = a.n

    kron_t = np.kron(_row_normalized(a.entries), _row_normalized(b.entries)).T
    uniform = np.full(n * n, 1.0 / (n * n))
    x = uniform.copy() if start is None else np.asarray(start, dtype=float) / np.sum(start)

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        fresh = alpha * (kron_t @ x) + (1.0 - alpha) * uniform
        fresh /= fresh.sum()
        delta = float(np.abs(fresh - x).sum())
        x = fresh
        if delta < tol:
            converged = True
            break

    matrix = x.reshape(n, n)
    matching = _greedy_matching(matrix)
    weight = float(sum(matrix[i, matching[i]] for i in range(n)))
    return AlignmentResult(
        matrix=matrix,
        matching=matching,
        matched_weight=weight,
        iterations=iterations,
        converged=converged,
    )


def isorank_distance(alignment: AlignmentResult) -> float:
    """Scalar distance in [1, 2] from an alignment's matched weight.

    Concentration rescales the matched weight between its uniform floor
    (1/n) and its perfect ceiling (1); distance 1 means fully concentrated,
    2 means indistinguishable from uniform.
    """
    n = alignment.matrix.shape[0]
    if n == 1:
        concentration = 1.0
    else:
        concentration = (alignment.matched_weight - 1.0 / n) / (1.0 - 1.0 / n)
        concentration = min(1.0, max(0.0, concentration))
    return 1.0 + (1.0 - concentration)


def measure_distance(
    a: TransitionMatrix,
    b: TransitionMatrix,
    measure: MeasureId,
    *,
    p: float = 3.0,
    alpha: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 1000,
) -> float:
    """Size-normalize a pair and apply one measure."""
    a, b = normalize_pair(a, b)
    if measure is MeasureId.ISO:
        return isorank_distance(isorank_align(a, b, alpha=alpha, tol=tol, max_iter=max_iter))
    if measure is MeasureId.EUC:
        return euclidean(a, b)
    if measure is MeasureId.MAN:
        return manhattan(a, b)
    if measure is MeasureId.MIN:
        return minkowski(a, b, p=p)
    if measure is MeasureId.JAC:
        return jaccard(a, b)
    if measure is MeasureId.COS:
        return cosine(a, b)
    raise ValueError(f"unknown measure {measure!r}")


@dataclass(frozen=True)
class PairwiseMatrix:
    measure: MeasureId
    kernel_ids: tuple[str, ...]
    scores: np.ndarray
    scaled: bool = False


def pairwise(
    matrices: list[TransitionMatrix],
    measure: MeasureId,
    *,
    p: float = 3.0,
    alpha: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 1000,
) -> PairwiseMatrix:
    """All-pairs scores over a kernel set, ordered by kernel_id.

    Sizes are normalized per pair before measuring.  IsoRank is evaluated
    in both directions (and on the diagonal); the five other measures are
    symmetric with a definitional zero diagonal.  A pair whose measure
    fails is recorded as NaN rather than aborting the matrix.
    """
    if len(matrices) < 2:
        raise ValueError("pairwise comparison needs at least 2 kernels")
    ordered = sorted(matrices, key=lambda m: m.kernel_id)
    ids = tuple(m.kernel_id for m in ordered)
    if len(set(ids)) != len(ids):
        raise DuplicateKernel("duplicate kernel_id in pairwise input")

    n = len(ordered)
    scores = np.zeros((n, n))

    def measure_pair(mi: TransitionMatrix, mj: TransitionMatrix) -> float:
        return measure_distance(mi, mj, measure, p=p, alpha=alpha, tol=tol, max_iter=max_iter)

    if measure is MeasureId.ISO:
        for i in range(n):
            for j in range(n):
                try:
                    scores[i, j] = measure_pair(ordered[i], ordered[j])
                except SasscfgError:
                    scores[i, j] = np.nan
    else:
        for i in range(n):
            for j in range(i + 1, n):
                try:
                    value = measure_pair(ordered[i], ordered[j])
                except SasscfgError:
                    value = np.nan
                scores[i, j] = value
                scores[j, i] = value

    return PairwiseMatrix(measure=measure, kernel_ids=ids, scores=scores, scaled=False)


def minmax_scale(pm: PairwiseMatrix) -> PairwiseMatrix:
    """Affinely rescale scores to [0, 1].

    Scaling parameters come from the finite off-diagonal entries; the
    definitional zero diagonal of the symmetric measures is left untouched.
    IsoRank's diagonal holds real self-alignment scores, so there it takes
    part in the scaling like any other entry.
    """
    n = pm.scores.shape[0]
    include_diagonal = pm.measure is MeasureId.ISO
    mask = np.isfinite(pm.scores)
    if not include_diagonal:
        mask &= ~np.eye(n, dtype=bool)
    values = pm.scores[mask]
    if values.size == 0:
        raise DegenerateInput("no finite entries to scale")

    low = float(values.min())
    high = float(values.max())
    scaled = pm.scores.copy()
    if high == low:
        scaled[mask] = 0.0
    else:
        scaled[mask] = (pm.scores[mask] - low) / (high - low)
    return PairwiseMatrix(measure=pm.measure, kernel_ids=pm.kernel_ids, scores=scaled, scaled=True)


def export_heatmap_csv(pm: PairwiseMatrix) -> str:
    """CSV with kernel_id header row/column; entries use 6 decimal places."""
    lines = ["," + ",".join(pm.kernel_ids)]
    for kernel_id, row in zip(pm.kernel_ids, pm.scores):
        cells = ["nan" if not np.isfinite(x) else f"{x:.6f}" for x in row]
        lines.append(kernel_id + "," + ",".join(cells))
    return "\n".join(lines) + "\n"
