"""Generators for the three benchmark families and their specifications.

Each generator returns ``(model_text, formula_text)``.  The automata are
reconstructions: only the timing constants, the observable mode names and
the specifications are fixed by the benchmark descriptions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

FAMILIES = ("pathos", "leader", "csma")
CSMA_VARIANTS = ("A", "B", "C")


@dataclass(frozen=True)
class BenchSpec:
    family: str
    n: int
    variant: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.family == "csma":
            if self.variant not in CSMA_VARIANTS:
                raise ValueError(f"csma needs a variant in {CSMA_VARIANTS}")
        elif self.variant is not None:
            raise ValueError("variant only applies to csma")

    @property
    def name(self) -> str:
        v = f"_{self.variant}" if self.variant else ""
        return f"{self.family}{v}_{self.n}"

    def generate(self) -> tuple:
        if self.family == "pathos":
            return gen_pathos(self.n)
        if self.family == "leader":
            return gen_leader(self.n)
        return gen_csma(self.n, self.variant)


def gen_pathos(n: int) -> tuple:
    """Fixed-priority periodic scheduling with period ``n``.

    Each process owns a clock that restarts when the period begins.  The
    scheduler dispatches process ``i`` when that clock reads ``i - 1``; the
    process then runs until it reads ``i``.  A new period starts once every
    process is idle again.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    lines = [f"channel run{i} binary;" for i in range(1, n + 1)]
    lines.append("channel release broadcast;")
    lines.append("")
    lines.append("process S {")
    for k in range(1, n + 1):
        lines.append(f"  mode sched{k} inv x{k} <= {k - 1};")
    lines.append(f"  mode slack inv x{n} <= {n};")
    for k in range(1, n + 1):
        nxt = f"sched{k + 1}" if k < n else "slack"
        lines.append(f"  trans sched{k} -> {nxt} when x{k} = {k - 1} sync run{k}!;")
    all_idle = " and ".join(f"idle{i}" for i in range(1, n + 1))
    lines.append(f"  trans slack -> sched1 when x{n} = {n} and {all_idle} sync release!;")
    lines.append("  init sched1;")
    lines.append("}")
    for i in range(1, n + 1):
        lines.append("")
        lines.append(f"process P{i} {{")
        lines.append(f"  clock x{i};")
        lines.append(f"  mode idle{i};")
        lines.append(f"  mode pending{i};")
        lines.append(f"  mode running{i} inv x{i} <= {i};")
        lines.append(f"  trans idle{i} -> pending{i} sync release? reset {{x{i}}};")
        lines.append(f"  trans pending{i} -> running{i} sync run{i}?;")
        lines.append(f"  trans running{i} -> idle{i} when x{i} = {i};")
        lines.append(f"  init pending{i};")
        lines.append("}")
    lines.append("")
    lines.append("system " + ", ".join(["S"] + [f"P{i}" for i in range(1, n + 1)]) + ";")
    lines.append("initial " + " and ".join(f"x{i} = 0" for i in range(1, n + 1)) + ";")
    formula = f"forall always (pending{n} -> forall eventually running{n})"
    return "\n".join(lines) + "\n", formula


def gen_leader(n: int) -> tuple:
    """Parent election by broadcast requests; 0 encodes a null parent.

    A candidate without a parent broadcasts a request every 1 to 2 time
    units; every larger-numbered candidate still without a parent adopts
    the requester as parent.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    lines = [f"channel req{i} broadcast;" for i in range(1, n + 1)]
    for i in range(1, n + 1):
        lines.append("")
        lines.append(f"process L{i} {{")
        lines.append(f"  clock c{i};")
        lines.append(f"  int parent{i} [0..{n}] = 0;")
        lines.append(f"  mode cand{i} inv c{i} <= 2;")
        lines.append(f"  mode done{i};")
        lines.append(f"  trans cand{i} -> cand{i} when parent{i} = 0 and c{i} >= 1 "
                     f"sync req{i}! reset {{c{i}}};")
        for j in range(1, i):
            lines.append(f"  trans cand{i} -> done{i} when parent{i} = 0 sync req{j}? "
                         f"do {{parent{i} := {j}}};")
        lines.append(f"  init cand{i};")
        lines.append("}")
    lines.append("")
    lines.append("system " + ", ".join(f"L{i}" for i in range(1, n + 1)) + ";")
    lines.append("initial " + " and ".join(f"c{i} = 0" for i in range(1, n + 1)) + ";")
    parts = ["parent1 = 0"] + [f"parent{i} != 0 and parent{i} < {i}" for i in range(2, n + 1)]
    formula = "forall eventually (" + " and ".join(parts) + ")"
    return "\n".join(lines) + "\n", formula


CSMA_FORMULAS = {
    "A": "forall always ((transm1 and transm2) -> freeze x . forall eventually (x < 26 and bus_idle))",
    "B": "forall always ((transm1 and x1 >= 52) -> forall eventually wait1)",
    "C": "forall always (bus_idle -> forall always (bus_collision -> forall eventually bus_idle))",
}


def gen_csma(n: int, variant: str) -> tuple:
    """Bus plus ``n`` senders with collision detection and retry.

    Constants: 26 (signal propagation), 52 (collision window), 808
    (frame transmission).  While a frame is on the bus the bus may keep
    signalling ``busy`` without letting time pass.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if variant not in CSMA_FORMULAS:
        raise ValueError(f"unknown csma variant {variant!r}")
    lines = ["channel begin binary;", "channel end binary;",
             "channel busy broadcast;", "channel cd broadcast;", ""]
    lines += [
        "process Bus {",
        "  clock y;",
        "  mode bus_idle;",
        "  mode bus_active;",
        "  mode bus_collision inv y < 26;",
        "  trans bus_idle -> bus_active sync begin? reset {y};",
        "  trans bus_active -> bus_idle sync end? reset {y};",
        "  trans bus_active -> bus_active when y >= 26 sync busy!;",
        "  trans bus_active -> bus_collision when y < 26 sync begin? reset {y};",
        "  trans bus_collision -> bus_idle when y < 26 sync cd! reset {y};",
        "  init bus_idle;",
        "}",
    ]
    for i in range(1, n + 1):
        x = f"x{i}"
        lines += [
            "",
            f"process S{i} {{",
            f"  clock {x};",
            f"  mode wait{i};",
            f"  mode transm{i} inv {x} <= 808;",
            f"  mode retry{i} inv {x} < 52;",
            f"  trans wait{i} -> transm{i} sync begin! reset {{{x}}};",
            f"  trans wait{i} -> retry{i} sync busy? reset {{{x}}};",
            f"  trans wait{i} -> retry{i} sync cd? reset {{{x}}};",
            f"  trans transm{i} -> wait{i} when {x} = 808 sync end! reset {{{x}}};",
            f"  trans transm{i} -> retry{i} sync cd? reset {{{x}}};",
            f"  trans retry{i} -> transm{i} when {x} < 52 sync begin! reset {{{x}}};",
            f"  trans retry{i} -> retry{i} sync busy? reset {{{x}}};",
            f"  trans retry{i} -> retry{i} sync cd? reset {{{x}}};",
            f"  init wait{i};",
            "}",
        ]
    lines.append("")
    lines.append("system " + ", ".join(["Bus"] + [f"S{i}" for i in range(1, n + 1)]) + ";")
    lines.append("initial y = 0 and " + " and ".join(f"x{i} = 0" for i in range(1, n + 1)) + ";")
    return "\n".join(lines) + "\n", CSMA_FORMULAS[variant]


def write_benchmark(spec: BenchSpec, out_dir: str) -> tuple:
    """Write ``<name>.model`` and ``<name>.tctl``; returns both paths."""
    model, formula = spec.generate()
    os.makedirs(out_dir, exist_ok=True)
    mpath = os.path.join(out_dir, spec.name + ".model")
    fpath = os.path.join(out_dir, spec.name + ".tctl")
    with open(mpath, "w", encoding="utf-8") as fh:
        fh.write(model)
    with open(fpath, "w", encoding="utf-8") as fh:
        fh.write(formula + "\n")
    return mpath, fpath
