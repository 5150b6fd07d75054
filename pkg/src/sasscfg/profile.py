"""Offline profile ingestion and attribution onto CFG blocks and edges.

Profile files are line-oriented text.  Each kernel section starts with a
``kernel <kernel_id>`` header followed by any of:

    sample <hex_offset> <count>
    edge <src> <dst> <count>
    time_ns <integer>
    calls <integer>
    dynmix <CLASS>=<count> ...

``#`` comment lines and blank lines are ignored.  Edge endpoints are block
labels (``.L_41``), canonical block indices (``B3`` or ``3``), or the
virtual names ``START``/``STOP``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cfg import Cfg
from .errors import DuplicateKernel, ProfileSyntaxError
from .sass import InstrClass, MixVector


@dataclass(frozen=True)
class KernelProfile:
    kernel_id: str
    samples: dict[int, int] = field(default_factory=dict)
    edge_counts: dict[tuple[str, str], int] | None = None
    time_exec_ns: int | None = None
    calls_n: int = 1
    dynamic_mix: MixVector | None = None

    def __post_init__(self):
        if any(c < 0 for c in self.samples.values()):
            raise ValueError("negative sample count")
        if self.edge_counts and any(c < 0 for c in self.edge_counts.values()):
            raise ValueError("negative edge count")
        if self.time_exec_ns is not None and self.time_exec_ns <= 0:
            raise ValueError("time_exec_ns must be positive when present")
        if self.calls_n < 1:
            raise ValueError("calls_n must be >= 1")


OBSERVED = "observed"
FLOW_BALANCE = "flow_balance"
UNIFORM_STATIC = "uniform_static"


@dataclass(frozen=True)
class AnnotatedCfg:
    """A CFG plus per-block visit counts and per-edge transition counts.

    ``edge_counts`` is keyed by (src, dst) node-id pairs; parallel edges of
    different kinds between the same pair are folded together, which is the
    granularity every downstream matrix uses.
    """

    cfg: Cfg
    block_counts: dict[int, int]
    edge_counts: dict[tuple[int, int], float]
    estimation_mode: str
    orphan_samples: dict[int, int] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


def parse_profiles(text: str) -> dict[str, KernelProfile]:
    """Parse a profile file, possibly holding several kernel sections."""
    profiles: dict[str, KernelProfile] = {}
    state: dict | None = None

    def flush():
        if state is None:
            return
        profiles[state["kernel_id"]] = KernelProfile(
            kernel_id=state["kernel_id"],
            samples=state["samples"],
            edge_counts=state["edges"] if state["edges"] else None,
            time_exec_ns=state["time_ns"],
            calls_n=state["calls"],
            dynamic_mix=state["dynmix"],
        )

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        record = fields[0]

        if record == "kernel":
            if len(fields) != 2:
                raise ProfileSyntaxError(line_no, "kernel header needs exactly one id")
            flush()
            if fields[1] in profiles:
                raise DuplicateKernel(f"line {line_no}: kernel {fields[1]} appears twice")
            state = {
                "kernel_id": fields[1],
                "samples": {},
                "edges": {},
                "time_ns": None,
                "calls": 1,
                "dynmix": None,
            }
            continue

        if state is None:
            raise ProfileSyntaxError(line_no, f"{record} record before any kernel header")

        try:
            if record == "sample":
                if len(fields) != 3:
                    raise ProfileSyntaxError(line_no, "sample needs <hex_offset> <count>")
                offset = int(fields[1], 16)
                state["samples"][offset] = state["samples"].get(offset, 0) + int(fields[2])
            elif record == "edge":
                if len(fields) != 4:
                    raise ProfileSyntaxError(line_no, "edge needs <src> <dst> <count>")
                key = (fields[1], fields[2])
                state["edges"][key] = state["edges"].get(key, 0) + int(fields[3])
            elif record == "time_ns":
                state["time_ns"] = int(fields[1])
            elif record == "calls":
                state["calls"] = int(fields[1])
            elif record == "dynmix":
                if state["dynmix"] is not None:
                    raise ProfileSyntaxError(line_no, "duplicate dynmix record")
                counts: dict[InstrClass, int] = {}
                for item in fields[1:]:
                    name, _, value = item.partition("=")
                    counts[InstrClass(name)] = int(value)
                state["dynmix"] = MixVector(counts)
            else:
                raise ProfileSyntaxError(line_no, f"unknown record type {record!r}")
        except (ValueError, KeyError) as exc:
            raise ProfileSyntaxError(line_no, f"malformed {record} record: {exc}") from exc

    flush()
    return profiles


def _resolve_endpoint(cfg: Cfg, token: str) -> int | None:
    if token == "START":
        return cfg.start_node
    if token == "STOP":
        return cfg.stop_node
    if token.startswith("."):
        block = cfg.block_by_label(token)
        return block.id if block is not None else None
    body = token[1:] if token.startswith("B") else token
    try:
        block_id = int(body)
    except ValueError:
        return None
    return block_id if 0 <= block_id < cfg.n_blocks else None


def _pair_successors(cfg: Cfg) -> dict[int, list[int]]:
    succ: dict[int, list[int]] = {b.id: [] for b in cfg.blocks}
    succ[cfg.start_node] = []
    for edge in cfg.edges:
        if edge.src != cfg.stop_node and edge.dst not in succ[edge.src]:
            succ[edge.src].append(edge.dst)
    for node in succ:
        succ[node].sort()
    return succ


def attribute_profile(cfg: Cfg, profile: KernelProfile | None = None) -> AnnotatedCfg:
    """Attach sampled counts to blocks and derive per-edge counts.

    Edge counts come from observed records when the profile has them, else
    from flow balance over sampled block counts, else from uniform static
    weights.  Sample offsets that land outside every block are kept aside
    as orphans and excluded from block totals.
    """
    if profile is None:
        profile = KernelProfile(kernel_id=cfg.kernel_id)
    if profile.kernel_id != cfg.kernel_id:
        raise ValueError(f"profile {profile.kernel_id!r} does not match cfg {cfg.kernel_id!r}")

    warnings: list[str] = []
    block_counts = {b.id: 0 for b in cfg.blocks}
    orphans: dict[int, int] = {}
    for offset, count in sorted(profile.samples.items()):
        block = cfg.block_containing(offset)
        if block is None:
            orphans[offset] = orphans.get(offset, 0) + count
            warnings.append(f"orphan sample at 0x{offset:x} (count {count})")
        else:
            block_counts[block.id] += count

    pair_kinds = {(e.src, e.dst) for e in cfg.edges}
    edge_counts: dict[tuple[int, int], float] = {}

    if profile.edge_counts:
        mode = OBSERVED
        for (src_tok, dst_tok), count in profile.edge_counts.items():
            src = _resolve_endpoint(cfg, src_tok)
            dst = _resolve_endpoint(cfg, dst_tok)
            if src is None or dst is None:
                warnings.append(f"edge record {src_tok}->{dst_tok} has an unknown endpoint, skipped")
                continue
            if (src, dst) not in pair_kinds:
                warnings.append(f"edge record {src_tok}->{dst_tok} matches no CFG edge, skipped")
                continue
            edge_counts[(src, dst)] = edge_counts.get((src, dst), 0.0) + count
        for pair in pair_kinds:
            edge_counts.setdefault(pair, 0.0)
    elif any(count > 0 for count in block_counts.values()):
        mode = FLOW_BALANCE
        succ = _pair_successors(cfg)
        for block in cfg.blocks:
            total = block_counts[block.id]
            targets = succ[block.id]
            if not targets:
                continue
            weights = [block_counts.get(t, 0) for t in targets]
            weight_sum = sum(weights)
            for target, weight in zip(targets, weights):
                share = weight / weight_sum if weight_sum > 0 else 1.0 / len(targets)
                edge_counts[(block.id, target)] = total * share
        if cfg.blocks:
            edge_counts[(cfg.start_node, 0)] = float(block_counts[0])
    else:
        mode = UNIFORM_STATIC
        succ = _pair_successors(cfg)
        for node, targets in succ.items():
            for target in targets:
                edge_counts[(node, target)] = 1.0 / len(targets)

    return AnnotatedCfg(
        cfg=cfg,
        block_counts=block_counts,
        edge_counts=edge_counts,
        estimation_mode=mode,
        orphan_samples=orphans,
        warnings=tuple(warnings),
    )


def dynamic_mix(acfg: AnnotatedCfg, profile: KernelProfile | None) -> MixVector | None:
    """Observed dynamic mix, or the block-count-weighted static estimate.

    Returns None when neither an observed mix nor any nonzero block count
    is available.
    """
    if profile is not None and profile.dynamic_mix is not None:
        return profile.dynamic_mix
    if not any(count > 0 for count in acfg.block_counts.values()):
        return None
    counts: dict[InstrClass, int] = {}
    for block in acfg.cfg.blocks:
        weight = acfg.block_counts[block.id]
        if weight == 0:
            continue
        for cls, n in block.mix.counts.items():
            counts[cls] = counts.get(cls, 0) + weight * n
    return MixVector(counts)
