"""Corpus manifests and run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import CorpusError
from .metrics import DEFAULT_GOODNESS_CLASSES
from .sass import InstrClass


@dataclass(frozen=True)
class CorpusEntry:
    kernel_id: str
    listing_path: Path
    profile_path: Path | None
    arch: str


@dataclass(frozen=True)
class Corpus:
    entries: tuple[CorpusEntry, ...]
    root: Path

    def __post_init__(self) -> None:
        ids = [e.kernel_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise CorpusError("duplicate kernel_id in corpus")


def load_manifest(path: str | Path) -> Corpus:
    """Read a manifest: one "kernel_id listing [profile] arch" line each.

    Paths are taken relative to the manifest's directory.  Blank lines and
    '#' comments are skipped.  Every referenced file must exist.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CorpusError(f"cannot read manifest {path}: {exc}") from exc
    root = path.parent

    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) == 3:
            kernel_id, listing, arch = tokens
            profile = None
        elif len(tokens) == 4:
            kernel_id, listing, profile, arch = tokens
        else:
            raise CorpusError(f"{path}:{line_no}: expected 3 or 4 fields, got {len(tokens)}")
        if kernel_id in seen:
            raise CorpusError(f"{path}:{line_no}: duplicate kernel_id {kernel_id!r}")
        seen.add(kernel_id)

        listing_path = root / listing
        if not listing_path.is_file():
            raise CorpusError(f"{path}:{line_no}: listing not readable: {listing_path}")
        profile_path = None
        if profile is not None:
            profile_path = root / profile
            if not profile_path.is_file():
                raise CorpusError(f"{path}:{line_no}: profile not readable: {profile_path}")
        entries.append(
            CorpusEntry(
                kernel_id=kernel_id,
                listing_path=listing_path,
                profile_path=profile_path,
                arch=arch,
            )
        )
    return Corpus(entries=tuple(entries), root=root)


@dataclass(frozen=True)
class RunConfig:
    measure: str = "all"
    p: float = 3.0
    alpha: float = 0.85
    tol: float = 1e-9
    max_iter: int = 1000
    mode: str = "row"
    j: frozenset[InstrClass] = field(default=DEFAULT_GOODNESS_CLASSES)
    k: int = 2
    reference: str | None = None
    out: Path = Path(".")

    def __post_init__(self) -> None:
        if self.measure not in {"euc", "iso", "man", "min", "jac", "cos", "all"}:
            raise CorpusError(f"unknown measure {self.measure!r}")
        if self.mode not in {"row", "global"}:
            raise CorpusError(f"unknown mode {self.mode!r}")
        if self.p < 1:
            raise CorpusError(f"minkowski order must be >= 1, got {self.p}")
        if not 0.0 < self.alpha < 1.0:
            raise CorpusError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.tol <= 0:
            raise CorpusError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise CorpusError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.k < 1:
            raise CorpusError(f"k must be >= 1, got {self.k}")


def parse_j_classes(spec_text: str) -> frozenset[InstrClass]:
    """Parse a '+'- or ','-separated class list like "FP32+MEM"."""
    names = [t for t in spec_text.replace(",", "+").split("+") if t]
    classes = set()
    for name in names:
        try:
            classes.add(InstrClass(name.strip().upper()))
        except ValueError as exc:
            raise CorpusError(f"unknown instruction class {name!r}") from exc
    return frozenset(classes)


_CONFIG_PARSERS = {
    "measure": str,
    "p": float,
    "alpha": float,
    "tol": float,
    "max_iter": int,
    "mode": str,
    "j": parse_j_classes,
    "k": int,
    "reference": str,
    "out": Path,
}


def load_config_file(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Apply key=value lines from a config file over ``base``.

    Keys mirror the command-line flags (dashes and underscores both
    accepted); '#' starts a comment.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CorpusError(f"cannot read config {path}: {exc}") from exc

    valid = {f.name for f in fields(RunConfig)}
    overrides: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CorpusError(f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in valid:
            raise CorpusError(f"{path}:{line_no}: unknown key {key!r}")
        try:
            overrides[key] = _CONFIG_PARSERS[key](value)
        except (ValueError, CorpusError) as exc:
            raise CorpusError(f"{path}:{line_no}: bad value for {key}: {exc}") from exc

    return replace(base or RunConfig(), **overrides)
