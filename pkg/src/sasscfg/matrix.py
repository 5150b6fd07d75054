"""Transition-probability matrices and bilinear size normalization.

Matrices cover only real blocks (virtual START/STOP edges are dropped) in
the graph's canonical order.  Two normalizations are supported:
``row_stochastic`` divides each row by its row sum, ``global`` divides every
entry by the grand total of within-graph transition counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadTarget, EmptyGraph
from .profile import AnnotatedCfg

ROW_STOCHASTIC = "row_stochastic"
GLOBAL = "global"
RAW_COUNTS = "raw_counts"
INTERPOLATED = "interpolated"


@dataclass(frozen=True)
class TransitionMatrix:
    kernel_id: str
    entries: np.ndarray
    ordering: tuple[int, ...]
    mode: str

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"entries must be square, got shape {entries.shape}")
        if (entries < 0).any():
            raise ValueError("entries must be nonnegative")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def transition_matrix(acfg: AnnotatedCfg, mode: str = ROW_STOCHASTIC) -> TransitionMatrix:
    """Build the block-to-block transition matrix of an annotated CFG."""
    cfg = acfg.cfg
    if cfg.n_blocks == 0:
        raise EmptyGraph(f"{cfg.kernel_id}: no real blocks")
    if mode not in (ROW_STOCHASTIC, GLOBAL, RAW_COUNTS):
        raise ValueError(f"unknown mode {mode!r}")

    order = cfg.canonical_order()
    index = {block_id: i for i, block_id in enumerate(order)}
    n = len(order)
    counts = np.zeros((n, n))
    for (src, dst), count in acfg.edge_counts.items():
        if src in index and dst in index:
            counts[index[src], index[dst]] += count

    if mode == ROW_STOCHASTIC:
        row_sums = counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            entries = np.where(row_sums > 0, counts / np.where(row_sums > 0, row_sums, 1.0), 0.0)
    elif mode == GLOBAL:
        total = counts.sum()
        entries = counts / total if total > 0 else counts
    else:
        entries = counts

    return TransitionMatrix(kernel_id=cfg.kernel_id, entries=entries, ordering=order, mode=mode)


def interpolate_to(m: TransitionMatrix, target_n: int) -> TransitionMatrix:
    """Rescale a matrix to target_n x target_n by bilinear interpolation.

    Source cell (r, c) maps onto the target grid with scale factor
    (n-1)/(target_n-1); each target entry blends its four surrounding
    source entries.  Corner entries are preserved exactly and output values
    stay inside [min(src), max(src)].  The result is a geometric rescale:
    no normalization is reapplied.
    """
    if target_n < m.n:
        raise BadTarget(f"target dimension {target_n} < source dimension {m.n}")
    if target_n == m.n:
        return m
    if m.n == 1:
        entries = np.full((target_n, target_n), float(m.entries[0, 0]))
        return TransitionMatrix(m.kernel_id, entries, m.ordering, INTERPOLATED)

    n = m.n
    # Multiply before dividing so grid-aligned positions come out exact.
    pos = (np.arange(target_n) * (n - 1)) / (target_n - 1)
    lo = np.minimum(np.floor(pos).astype(int), n - 2)
    frac = pos - lo

    src = m.entries
    v00 = src[np.ix_(lo, lo)]
    v01 = src[np.ix_(lo, lo + 1)]
    v10 = src[np.ix_(lo + 1, lo)]
    v11 = src[np.ix_(lo + 1, lo + 1)]
    fr = frac[:, None]
    fc = frac[None, :]
    entries = (1 - fr) * ((1 - fc) * v00 + fc * v01) + fr * ((1 - fc) * v10 + fc * v11)

    return TransitionMatrix(m.kernel_id, entries, m.ordering, INTERPOLATED)


def normalize_pair(a: TransitionMatrix, b: TransitionMatrix) -> tuple[TransitionMatrix, TransitionMatrix]:
    """Bring two matrices to a common dimension by upscaling the smaller."""
    if a.n == b.n:
        return a, b
    target = max(a.n, b.n)
    return interpolate_to(a, target), interpolate_to(b, target)


def export_text(m: TransitionMatrix) -> str:
    """Plain-text matrix export: header line, then one row per line."""
    lines = [f"n {m.n} mode {m.mode}"]
    for row in m.entries:
        lines.append(" ".join(format(x, ".6g") for x in row))
    return "\n".join(lines) + "\n"
