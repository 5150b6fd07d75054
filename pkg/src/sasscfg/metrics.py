"""Scalar kernel characterization: goodness, efficiency, mix error."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BadTime
from .sass import CLASSES, InstrClass, MixVector

# Static operation intensity sums counts over a configurable class set J.
# The floating-point and memory classes are the default reading.
DEFAULT_GOODNESS_CLASSES: frozenset[InstrClass] = frozenset(
    {InstrClass.FP32, InstrClass.FP64, InstrClass.MEM}
)

# Compute-throughput classes: both float precisions plus integer, SIMD
# video ops, and type conversions.
EFFICIENCY_CLASSES: tuple[InstrClass, ...] = (
    InstrClass.FP32,
    InstrClass.FP64,
    InstrClass.INT,
    InstrClass.SIMD,
    InstrClass.CONV,
)

_NS_PER_S = 1_000_000_000


def goodness(
    mix: MixVector,
    calls_n: int = 1,
    J: frozenset[InstrClass] | set[InstrClass] = DEFAULT_GOODNESS_CLASSES,
) -> float:
    """Operation-intensity score: sum of class counts over J, times calls_n."""
    return float(sum(mix.count(c) for c in J)) * calls_n


def efficiency(mix: MixVector, time_exec_ns: int, calls_n: int = 1) -> float:
    """Compute operations per second of execution, scaled by launch count."""
    if time_exec_ns <= 0:
        raise BadTime(f"execution time must be positive, got {time_exec_ns} ns")
    ops = sum(mix.count(c) for c in EFFICIENCY_CLASSES)
    return ops / (time_exec_ns / _NS_PER_S) * calls_n


def mix_error(static_mix: MixVector, dynamic_mix: MixVector) -> float:
    """Mean squared error between the two mixes' class-fraction vectors.

    Two empty mixes compare equal (error 0).  Always averaged over all
    k=10 classes, so disjoint one-hot mixes peak at 2/k.
    """
    fs = static_mix.fraction_vector()
    fd = dynamic_mix.fraction_vector()
    return sum((a - b) ** 2 for a, b in zip(fs, fd)) / len(CLASSES)


@dataclass(frozen=True)
class MetricReport:
    kernel_id: str
    goodness: float
    efficiency: float | None
    mix_error: float | None
    op_class_set_J: frozenset[InstrClass] = field(default=DEFAULT_GOODNESS_CLASSES)

    def __post_init__(self) -> None:
        if self.goodness < 0:
            raise ValueError("goodness cannot be negative")
        if self.mix_error is not None and not 0.0 <= self.mix_error <= 1.0:
            raise ValueError(f"mix_error out of [0, 1]: {self.mix_error}")


def _format_j(J: frozenset[InstrClass]) -> str:
    return "+".join(sorted(c.name for c in J))


def export_metrics_csv(reports: list[MetricReport]) -> str:
    """One row per kernel; absent efficiency/mix_error render as blank."""
    lines = ["kernel_id,goodness,efficiency,mix_error,J"]
    for r in sorted(reports, key=lambda r: r.kernel_id):
        eff = "" if r.efficiency is None else f"{r.efficiency:.6g}"
        err = "" if r.mix_error is None else f"{r.mix_error:.6g}"
        lines.append(f"{r.kernel_id},{r.goodness:.6g},{eff},{err},{_format_j(r.op_class_set_J)}")
    return "\n".join(lines) + "\n"


def export_scatter_csv(
    rows: list[tuple[MetricReport, str, int]],
) -> str:
    """Plot-ready goodness-vs-efficiency data.

    Each row pairs a report with its arch tag (point group) and total
    static instruction count (bubble size).  Kernels without a profiled
    execution time carry a blank efficiency column.
    """
    lines = ["kernel_id,arch,goodness,efficiency,total_ops"]
    for report, arch, total_ops in sorted(rows, key=lambda t: t[0].kernel_id):
        eff = "" if report.efficiency is None else f"{report.efficiency:.6g}"
        lines.append(f"{report.kernel_id},{arch},{report.goodness:.6g},{eff},{total_ops}")
    return "\n".join(lines) + "\n"
