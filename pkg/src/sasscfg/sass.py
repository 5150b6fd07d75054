"""Parsing of SASS-style textual disassembly and opcode classification.

The accepted grammar is one construct per line:

    label-line    ::= "." ident ":"
    instr-line    ::= "/*" hexdigits "*/" [pred] opcode {"." mod} [operands] ";"
    pred          ::= "@" ["!"] "P" digits
    operand-label ::= "`" "(" "." ident ")"

Blank lines and comment lines (``//`` or ``#``) are skipped.  Labels attach
to the instruction that follows them and are stored with their leading dot
(e.g. ``.L_41``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import ListingSyntaxError, UnresolvedLabel


class InstrClass(Enum):
    FP32 = "FP32"
    FP64 = "FP64"
    INT = "INT"
    CONV = "CONV"
    SIMD = "SIMD"
    MEM = "MEM"
    CTRL = "CTRL"
    PRED = "PRED"
    MOVE = "MOVE"
    MISC = "MISC"


#: Fixed class order used for fraction vectors, features, and CSV columns.
CLASSES: tuple[InstrClass, ...] = tuple(InstrClass)


@dataclass(frozen=True)
class Predicate:
    """Guard predicate of an instruction (``@P0`` / ``@!P2``)."""

    register: int
    negated: bool = False

    def render(self) -> str:
        return f"@{'!' if self.negated else ''}P{self.register}"


@dataclass(frozen=True)
class Instruction:
    offset: int
    opcode: str
    modifiers: tuple[str, ...] = ()
    operands: tuple[str, ...] = ()
    predicate: Predicate | None = None
    branch_target: str | None = None
    raw: str = ""

    def render(self) -> str:
        """Re-render the instruction in canonical textual form.

        Token content matches the source line modulo whitespace for inputs
        using the standard lowercase, zero-padded offset style.
        """
        parts = [f"/*{self.offset:04x}*/"]
        if self.predicate is not None:
            parts.append(self.predicate.render())
        op = self.opcode
        if self.modifiers:
            op += "." + ".".join(self.modifiers)
        parts.append(op)
        if self.operands:
            parts.append(",".join(self.operands))
        return " ".join(parts) + ";"


@dataclass(frozen=True)
class Listing:
    """A parsed kernel listing: ordered (label, instruction) lines."""

    kernel_id: str
    lines: tuple[tuple[str | None, Instruction], ...]

    @property
    def instructions(self) -> tuple[Instruction, ...]:
        return tuple(instr for _, instr in self.lines)

    def label_offsets(self) -> dict[str, int]:
        """Map of defined labels to the offset of the instruction they name."""
        return {label: instr.offset for label, instr in self.lines if label is not None}

    def __len__(self) -> int:
        return len(self.lines)


_LABEL_RE = re.compile(r"^\.(?P<name>[A-Za-z_][A-Za-z0-9_$]*):$")
_INSTR_RE = re.compile(
    r"^/\*(?P<offset>[0-9a-fA-F]+)\*/\s*"
    r"(?:@(?P<neg>!?)P(?P<preg>\d+)\s+)?"
    r"(?P<body>\S.*?)?\s*;$"
)
_TARGET_RE = re.compile(r"^`\(\.(?P<name>[A-Za-z_][A-Za-z0-9_$]*)\)$")
_OPTOKEN_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*(\.[A-Za-z0-9_]+)*$")


def _split_operands(text: str) -> list[str]:
    """Split an operand list on top-level commas (brackets nest)."""
    parts: list[str] = []
    depth = 0
    current = ""
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(current.strip())
            current = ""
        else:
            current += ch
    if current.strip():
        parts.append(current.strip())
    return parts


def _parse_instr_line(line: str, line_no: int) -> Instruction:
    m = _INSTR_RE.match(line)
    if m is None:
        if line.startswith("/*") and not line.endswith(";"):
            raise ListingSyntaxError(line_no, "unterminated instruction (missing ';')")
        if line.startswith("/*"):
            prefix = line[2:].split("*/", 1)
            if len(prefix) < 2 or not re.fullmatch(r"[0-9a-fA-F]+", prefix[0]):
                raise ListingSyntaxError(line_no, "malformed offset")
        raise ListingSyntaxError(line_no, f"unrecognized syntax: {line!r}")

    offset = int(m.group("offset"), 16)
    predicate = None
    if m.group("preg") is not None:
        predicate = Predicate(register=int(m.group("preg")), negated=m.group("neg") == "!")

    body = (m.group("body") or "").strip()
    if not body:
        raise ListingSyntaxError(line_no, "missing opcode")
    op_token, _, operand_text = body.partition(" ")
    if not _OPTOKEN_RE.match(op_token):
        raise ListingSyntaxError(line_no, f"malformed opcode token {op_token!r}")
    opcode, *modifiers = op_token.split(".")

    operands = tuple(_split_operands(operand_text)) if operand_text.strip() else ()

    branch_target = None
    if classify_opcode(opcode, modifiers) is InstrClass.CTRL:
        for operand in operands:
            tm = _TARGET_RE.match(operand)
            if tm:
                branch_target = "." + tm.group("name")
                break

    return Instruction(
        offset=offset,
        opcode=opcode,
        modifiers=tuple(modifiers),
        operands=operands,
        predicate=predicate,
        branch_target=branch_target,
        raw=line,
    )


def parse_listing(text: str, kernel_id: str) -> Listing:
    """Parse a SASS-like listing into a :class:`Listing`.

    Raises :class:`ListingSyntaxError` for malformed lines, duplicate
    labels, or non-increasing offsets, and :class:`UnresolvedLabel` if a
    branch references an undefined label.
    """
    lines: list[tuple[str | None, Instruction]] = []
    pending_label: str | None = None
    pending_line_no = 0
    defined: dict[str, int] = {}
    target_uses: list[tuple[str, int]] = []
    prev_offset = -1

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("//") or line.startswith("#"):
            continue

        lm = _LABEL_RE.match(line)
        if lm:
            label = "." + lm.group("name")
            if label in defined:
                raise ListingSyntaxError(line_no, f"duplicate label {label}")
            if pending_label is not None:
                raise ListingSyntaxError(line_no, f"label {label} follows another label with no instruction between")
            defined[label] = line_no
            pending_label = label
            pending_line_no = line_no
            continue

        instr = _parse_instr_line(line, line_no)
        if instr.offset <= prev_offset:
            raise ListingSyntaxError(line_no, f"offset 0x{instr.offset:x} not strictly increasing")
        prev_offset = instr.offset
        if instr.branch_target is not None:
            target_uses.append((instr.branch_target, line_no))
        lines.append((pending_label, instr))
        pending_label = None

    if pending_label is not None:
        raise ListingSyntaxError(pending_line_no, f"label {pending_label} has no following instruction")

    for target, line_no in target_uses:
        if target not in defined:
            raise UnresolvedLabel(f"line {line_no}: branch target {target} is not defined")

    return Listing(kernel_id=kernel_id, lines=tuple(lines))


# Classification rule table.  Prefix-based, first match wins; specific
# mnemonic families are checked before the broad datatype-prefix rules so
# that e.g. F2I lands in CONV rather than FP32.
_CONV_PREFIXES = ("F2I", "I2F", "F2F", "I2I")
_CTRL_PREFIXES = ("BRA", "BRX", "JMP", "JCAL", "CAL", "RET", "EXIT", "SSY", "SYNC", "BAR")
_MEM_PREFIXES = ("LD", "ST", "ATOM", "RED", "MEMBAR")
_MOVE_PREFIXES = ("MOV", "SHFL", "SEL")
_FP32_PREFIXES = ("MUFU", "RRO", "F")
_INT_PREFIXES = (
    "IADD", "ISUB", "IMUL", "IMAD", "IMNMX", "ISCADD", "ISAD", "ISET", "ICMP",
    "IABS", "INEG", "LOP", "SHL", "SHR", "SHF", "XMAD", "BFE", "BFI", "FLO",
    "POPC", "LEA",
)


def classify_opcode(opcode: str, modifiers: list[str] | tuple[str, ...] = ()) -> InstrClass:
    """Map an opcode mnemonic (plus modifiers) to its instruction class.

    Total function: unknown opcodes fall through to MISC.
    """
    op = opcode.upper()
    mods = {m.upper() for m in modifiers}

    if op.startswith(_CONV_PREFIXES):
        return InstrClass.CONV
    if op.startswith(_CTRL_PREFIXES):
        return InstrClass.CTRL
    if op.startswith(_MEM_PREFIXES):
        return InstrClass.MEM
    if op.endswith("SETP") and len(op) > 4:
        head = op[0]
        if head == "I":
            return InstrClass.INT
        if head == "F":
            return InstrClass.FP32
        if head == "D":
            return InstrClass.FP64
        if head in ("P", "C"):
            return InstrClass.PRED
    if op.startswith(_MOVE_PREFIXES):
        return InstrClass.MOVE
    if op.startswith("D") or "F64" in mods:
        return InstrClass.FP64
    if op.startswith("V"):
        return InstrClass.SIMD
    if op.startswith(_FP32_PREFIXES) or "F32" in mods:
        return InstrClass.FP32
    if op.startswith(_INT_PREFIXES):
        return InstrClass.INT
    return InstrClass.MISC


@dataclass(frozen=True)
class MixVector:
    """Per-class instruction counts with fraction accessors."""

    counts: dict[InstrClass, int] = field(default_factory=dict)

    def __post_init__(self):
        for cls, count in self.counts.items():
            if count < 0:
                raise ValueError(f"negative count for {cls.value}: {count}")

    def count(self, cls: InstrClass) -> int:
        return self.counts.get(cls, 0)

    def total(self) -> int:
        return sum(self.counts.values())

    def as_fractions(self) -> dict[InstrClass, float]:
        """Class fractions summing to 1; all zero when the mix is empty."""
        total = self.total()
        if total == 0:
            return {cls: 0.0 for cls in CLASSES}
        return {cls: self.counts.get(cls, 0) / total for cls in CLASSES}

    def fraction_vector(self) -> tuple[float, ...]:
        fractions = self.as_fractions()
        return tuple(fractions[cls] for cls in CLASSES)


def static_mix(listing: Listing) -> MixVector:
    """Count instruction classes over a whole listing."""
    counts: dict[InstrClass, int] = {}
    for instr in listing.instructions:
        cls = classify_opcode(instr.opcode, instr.modifiers)
        counts[cls] = counts.get(cls, 0) + 1
    return MixVector(counts)


def mix_of_instructions(instructions: list[Instruction] | tuple[Instruction, ...]) -> MixVector:
    """Count instruction classes over an instruction slice (one basic block)."""
    counts: dict[InstrClass, int] = {}
    for instr in instructions:
        cls = classify_opcode(instr.opcode, instr.modifiers)
        counts[cls] = counts.get(cls, 0) + 1
    return MixVector(counts)
