"""Basic-block partitioning and control flow graph construction.

Blocks are maximal straight-line runs: new blocks start at the first
instruction, at every label definition, at every branch target, and right
after any control-class instruction.  The graph always carries one virtual
START node (id -1) and one virtual STOP node (id = number of real blocks).
"""

from __future__ import annotations

from bisect import bisect_right
from collections.abc import Iterator
from dataclasses import dataclass

from .errors import EmptyGraph
from .sass import Instruction, InstrClass, Listing, MixVector, classify_opcode, mix_of_instructions

ENTRY = "entry"
FALLTHROUGH = "fallthrough"
TAKEN = "taken"
EXIT = "exit"

#: Control opcodes that transfer to a label when taken.
_BRANCH_OPS = ("BRA", "JMP")
#: Control opcodes that terminate the kernel.
_EXIT_OPS = ("EXIT", "RET")
#: Indirect branches: we cannot resolve their targets statically.
_INDIRECT_OPS = ("BRX",)


@dataclass(frozen=True)
class BasicBlock:
    id: int
    label: str | None
    start_offset: int
    end_offset: int
    instr_indices: range
    mix: MixVector


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str

    def sort_key(self) -> tuple[int, int, str]:
        return (self.src, self.dst, self.kind)


@dataclass(frozen=True)
class Cfg:
    kernel_id: str
    arch: str
    blocks: tuple[BasicBlock, ...]
    start_node: int
    stop_node: int
    edges: tuple[Edge, ...]
    warnings: tuple[str, ...] = ()
    unreachable: frozenset[int] = frozenset()

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def block_by_label(self, label: str) -> BasicBlock | None:
        for block in self.blocks:
            if block.label == label:
                return block
        return None

    def block_containing(self, offset: int) -> BasicBlock | None:
        """The block whose [start_offset, end_offset] range contains offset."""
        starts = [b.start_offset for b in self.blocks]
        idx = bisect_right(starts, offset) - 1
        if idx < 0:
            return None
        block = self.blocks[idx]
        if block.start_offset <= offset <= block.end_offset:
            return block
        return None

    def successors(self, node: int) -> list[Edge]:
        return [e for e in self.edges if e.src == node]

    def canonical_order(self) -> tuple[int, ...]:
        """Reverse post-order from START; unreachable blocks appended in
        listing order.  This is the row/column ordering of every matrix
        derived from this graph."""
        succ: dict[int, list[int]] = {self.start_node: []}
        for block in self.blocks:
            succ[block.id] = []
        for edge in self.edges:
            if edge.dst == self.stop_node or edge.src == self.stop_node:
                continue
            if edge.dst not in succ[edge.src]:
                succ[edge.src].append(edge.dst)
        for node in succ:
            succ[node].sort(key=lambda i: self.blocks[i].start_offset)

        postorder: list[int] = []
        seen = {self.start_node}
        stack: list[tuple[int, Iterator[int]]] = [(self.start_node, iter(succ[self.start_node]))]
        while stack:
            node, children = stack[-1]
            child = next(children, None)
            if child is None:
                stack.pop()
                if node != self.start_node:
                    postorder.append(node)
            elif child not in seen:
                seen.add(child)
                stack.append((child, iter(succ[child])))

        order = list(reversed(postorder))
        rest = sorted(set(b.id for b in self.blocks) - set(order))
        return tuple(order) + tuple(rest)


def find_leaders(listing: Listing) -> set[int]:
    """Offsets at which basic blocks begin."""
    instructions = listing.instructions
    if not instructions:
        return set()

    leaders = {instructions[0].offset}
    label_offsets = listing.label_offsets()
    leaders.update(label_offsets.values())

    for idx, instr in enumerate(instructions):
        if instr.branch_target is not None:
            leaders.add(label_offsets[instr.branch_target])
        if classify_opcode(instr.opcode, instr.modifiers) is InstrClass.CTRL:
            if idx + 1 < len(instructions):
                leaders.add(instructions[idx + 1].offset)
    return leaders


def _terminator_edges(
    cfg_blocks: list[BasicBlock],
    block: BasicBlock,
    last: Instruction,
    label_to_block: dict[str, int],
    stop: int,
    warnings: list[str],
) -> list[Edge]:
    """Outgoing edges implied by a block's final instruction."""

    def fallthrough() -> Edge:
        if block.id + 1 < len(cfg_blocks):
            return Edge(block.id, block.id + 1, FALLTHROUGH)
        return Edge(block.id, stop, EXIT)

    op = last.opcode.upper()
    if classify_opcode(last.opcode, last.modifiers) is not InstrClass.CTRL:
        return [fallthrough()]

    if op.startswith(_EXIT_OPS):
        edges = [Edge(block.id, stop, EXIT)]
        if last.predicate is not None:
            edges.append(fallthrough())
        return edges

    if op.startswith(_INDIRECT_OPS):
        warnings.append(
            f"block {block.id}: indirect branch {last.opcode} at 0x{last.offset:x}, no taken edge emitted"
        )
        return [fallthrough()] if last.predicate is not None else []

    if op.startswith(_BRANCH_OPS):
        if last.branch_target is None:
            warnings.append(
                f"block {block.id}: branch without label target at 0x{last.offset:x}, no taken edge emitted"
            )
            return [fallthrough()] if last.predicate is not None else []
        edges = [Edge(block.id, label_to_block[last.branch_target], TAKEN)]
        if last.predicate is not None:
            edges.append(fallthrough())
        return edges

    # Remaining control ops (CAL, SSY, SYNC, BAR, ...) do not divert the
    # fallthrough path; they only end the block.
    return [fallthrough()]


def build_cfg(listing: Listing, arch: str = "") -> Cfg:
    """Partition a listing into blocks and connect them with control edges."""
    instructions = listing.instructions
    warnings: list[str] = []

    if not instructions:
        return Cfg(
            kernel_id=listing.kernel_id,
            arch=arch,
            blocks=(),
            start_node=-1,
            stop_node=0,
            edges=(),
            warnings=("empty listing",),
        )

    leader_offsets = sorted(find_leaders(listing))
    offset_to_index = {instr.offset: i for i, instr in enumerate(instructions)}
    boundaries = [offset_to_index[off] for off in leader_offsets] + [len(instructions)]

    labels_by_offset = {off: label for label, off in listing.label_offsets().items()}
    blocks: list[BasicBlock] = []
    for block_id, (lo, hi) in enumerate(zip(boundaries, boundaries[1:])):
        chunk = instructions[lo:hi]
        blocks.append(
            BasicBlock(
                id=block_id,
                label=labels_by_offset.get(chunk[0].offset),
                start_offset=chunk[0].offset,
                end_offset=chunk[-1].offset,
                instr_indices=range(lo, hi),
                mix=mix_of_instructions(chunk),
            )
        )

    stop = len(blocks)
    label_to_block = {b.label: b.id for b in blocks if b.label is not None}

    edges: list[Edge] = [Edge(-1, 0, ENTRY)]
    seen = {edges[0].sort_key()}
    for block in blocks:
        last = instructions[block.instr_indices[-1]]
        for edge in _terminator_edges(blocks, block, last, label_to_block, stop, warnings):
            key = edge.sort_key()
            if key not in seen:
                seen.add(key)
                edges.append(edge)
    edges.sort(key=Edge.sort_key)

    reachable = {-1}
    frontier = [-1]
    succ: dict[int, list[int]] = {}
    for edge in edges:
        succ.setdefault(edge.src, []).append(edge.dst)
    while frontier:
        node = frontier.pop()
        for nxt in succ.get(node, ()):
            if nxt not in reachable:
                reachable.add(nxt)
                frontier.append(nxt)
    unreachable = frozenset(b.id for b in blocks if b.id not in reachable)
    for block_id in sorted(unreachable):
        warnings.append(f"block {block_id} is unreachable from START")

    return Cfg(
        kernel_id=listing.kernel_id,
        arch=arch,
        blocks=tuple(blocks),
        start_node=-1,
        stop_node=stop,
        edges=tuple(edges),
        warnings=tuple(warnings),
        unreachable=unreachable,
    )


def node_name(cfg: Cfg, node: int) -> str:
    """Stable display name: START/STOP, label without its dot, or B<id>."""
    if node == cfg.start_node:
        return "START"
    if node == cfg.stop_node:
        return "STOP"
    block = cfg.blocks[node]
    if block.label is not None:
        return block.label.lstrip(".")
    return f"B{block.id}"


def export_dot(graph) -> str:
    """Deterministic DOT text for a Cfg or an AnnotatedCfg.

    Nodes are emitted sorted by id and edges sorted by (src, dst, kind), so
    repeated exports of the same graph are byte-identical.  The annotated
    variant adds count attributes from the attached profile data.
    """
    annotated = graph if hasattr(graph, "cfg") else None
    cfg: Cfg = annotated.cfg if annotated is not None else graph

    lines = [f'digraph "{cfg.kernel_id}" {{']
    lines.append('  "START" [shape=circle];')
    lines.append('  "STOP" [shape=doublecircle];')
    for block in cfg.blocks:
        attrs = [f'range="0x{block.start_offset:x}-0x{block.end_offset:x}"']
        if annotated is not None:
            attrs.append(f"count={annotated.block_counts[block.id]}")
        if block.id in cfg.unreachable:
            attrs.append("unreachable=true")
        lines.append(f'  "{node_name(cfg, block.id)}" [{", ".join(attrs)}];')
    for edge in sorted(cfg.edges, key=Edge.sort_key):
        attrs = [f"kind={edge.kind}"]
        if annotated is not None and (edge.src, edge.dst) in annotated.edge_counts:
            count = annotated.edge_counts[(edge.src, edge.dst)]
            attrs.append(f"count={count:.6g}")
        lines.append(
            f'  "{node_name(cfg, edge.src)}" -> "{node_name(cfg, edge.dst)}" [{", ".join(attrs)}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
