"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class SasscfgError(Exception):
    """Base class for all toolkit errors."""


class ListingSyntaxError(SasscfgError):
    """A disassembly listing line that does not match the grammar."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class ProfileSyntaxError(SasscfgError):
    """A profile file line that does not match the record grammar."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class UnresolvedLabel(SasscfgError):
    """A branch target label with no definition in the listing."""


class DuplicateKernel(SasscfgError):
    """The same kernel_id appeared twice in a corpus or profile file."""


class EmptyGraph(SasscfgError):
    """An operation that needs at least one real basic block got none."""


class BadTarget(SasscfgError):
    """Interpolation target dimension smaller than the source dimension."""


class DimMismatch(SasscfgError):
    """Two matrices or vectors that must have equal dimensions do not."""


class BadOrder(SasscfgError):
    """Minkowski order p < 1."""


class DegenerateInput(SasscfgError):
    """Input outside a measure's domain (zero vector, all-zero matrix, ...)."""


class BadTime(SasscfgError):
    """Non-positive execution time."""


class BadK(SasscfgError):
    """Requested flat cluster count outside 1..n."""


class CorpusError(SasscfgError):
    """Manifest or corpus-level inconsistency (missing file, bad entry, ...)."""
