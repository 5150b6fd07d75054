"""Shared test inputs: canonical listing snippets and randomized generators."""

from __future__ import annotations

import random

from sasscfg.cfg import Cfg, build_cfg
from sasscfg.profile import AnnotatedCfg, KernelProfile, attribute_profile
from sasscfg.sass import parse_listing

# A double-precision guard region: predicated branch out, straight-line
# fallthrough region, unconditional branch past the reload path.
BRANCHY_SNIPPET = """\
.L_41:
   /*04a0*/ DSETP.LE.AND P0,PT,|R6|,+INF,PT;
   /*04a8*/ @P0 BRA `(.L_43);
   /*04b0*/ LOP32I.OR R5, R7, 0x80000;
   /*04b8*/ MOV R4, R6;

   /*04c8*/ BRA `(.L_42);
"""

# The snippet alone references labels it does not define; this tail closes
# the graph so the branch targets resolve.
BRANCHY_TAIL = """\
.L_42:
   /*04d0*/ MOV R4, R6;
.L_43:
   /*04d8*/ EXIT;
"""

BRANCHY_LISTING = BRANCHY_SNIPPET + BRANCHY_TAIL

#: Offsets of the five instructions in the snippet proper (not the tail).
SNIPPET_OFFSETS = (0x4A0, 0x4A8, 0x4B0, 0x4B8, 0x4C8)


_PLAIN_OPS = (
    "FADD R0, R1, R2",
    "FMUL R3, R3, R4",
    "DADD R6, R6, R7",
    "IADD R0, R0, 0x1",
    "IMAD R2, R2, R3, R4",
    "LDG.E R4, [R2]",
    "STG.E [R2], R4",
    "MOV R5, R6",
    "S2R R0, SR_TID.X",
    "F2I.S32.F32 R2, R3",
    "VADD.U32 R1, R1, R2",
    "SHR.U32 R4, R4, 0x1",
)


def make_random_listing(rng: random.Random, max_blocks: int = 6) -> str:
    """A structurally valid random listing.

    Every block start carries a label so branch targets always resolve;
    terminators are drawn from conditional/unconditional branches,
    predicated exits, and plain fallthrough.  The final block always exits.
    """
    n_blocks = rng.randint(1, max_blocks)
    offset = 0x8
    lines = []
    for block in range(n_blocks):
        lines.append(f".L_{block}:")
        for _ in range(rng.randint(1, 4)):
            lines.append(f"        /*{offset:04x}*/ {rng.choice(_PLAIN_OPS)} ;")
            offset += 8
        last = block == n_blocks - 1
        kind = "exit" if last else rng.choice(["bra", "cond_bra", "pred_exit", "fall", "exit"])
        target = rng.randrange(n_blocks)
        if kind == "bra":
            lines.append(f"        /*{offset:04x}*/ BRA `(.L_{target}) ;")
        elif kind == "cond_bra":
            lines.append(f"        /*{offset:04x}*/ @P{rng.randrange(4)} BRA `(.L_{target}) ;")
        elif kind == "pred_exit":
            lines.append(f"        /*{offset:04x}*/ @!P{rng.randrange(4)} EXIT ;")
        elif kind == "exit":
            lines.append(f"        /*{offset:04x}*/ EXIT ;")
        if kind in ("bra", "cond_bra", "pred_exit", "exit"):
            offset += 8
    return "\n".join(lines) + "\n"


def random_cfg(rng: random.Random, kernel_id: str = "rand.synth.k.k") -> Cfg:
    return build_cfg(parse_listing(make_random_listing(rng), kernel_id), arch="synth")


def random_acfg(rng: random.Random, kernel_id: str = "rand.synth.k.k") -> AnnotatedCfg:
    """Random CFG with random sampled block counts (sometimes none)."""
    cfg = random_cfg(rng, kernel_id)
    samples: dict[int, int] = {}
    if rng.random() < 0.8:
        for block in cfg.blocks:
            count = rng.randrange(0, 200)
            if count:
                samples[block.start_offset] = count
    profile = KernelProfile(kernel_id=kernel_id, samples=samples)
    return attribute_profile(cfg, profile)
