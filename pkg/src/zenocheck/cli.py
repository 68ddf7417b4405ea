"""Command-line front-end: ``check``, ``sweep`` and ``gen`` (plus a hidden ``oracle``).

Exit codes are fixed per outcome class, see :data:`EXIT`.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources

from .bench import CSMA_VARIANTS, FAMILIES, BenchSpec, write_benchmark
from .engine import CheckConfig, ConfigError, UnsafeAbstraction, model_check
from .model import ModelError, load_system
from .syntax import ParseError
from .tctl import parse_formula

EXIT = {
    "true": 0,
    "false": 1,
    "maybe": 2,
    "io": 3,
    "parse": 4,
    "unsafe": 5,
    "inconsistent": 6,  # a sweep produced different verdicts for different d
    "refused": 7,  # the oracle exceeded its region budget
}

ABS_FLAGS = {"none": "none", "game": "game", "game-discrete": "game_discrete",
             "game-magnitude": "game_magnitude"}

SWEEP_COLUMNS = ("d", "cmp", "verdict", "outer_iters", "inner_iters", "peak_zones", "ms")


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class RunReport:
    verdict: str
    model: str
    formula: str
    config: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    approximated: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def report_schema() -> dict:
    """The JSON schema every ``check --json`` report validates against."""
    text = resources.files("zenocheck").joinpath("report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


# ---------------------------------------------------------------------------
# Loading


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise CliError("io", f"cannot read {path}: {e.strerror or e}") from None


def load_inputs(model_path: str, formula_path: str, universe: str = "reachable"):
    mtext, ftext = _read(model_path), _read(formula_path)
    try:
        system = load_system(mtext, universe)
    except (ParseError, ModelError) as e:
        raise CliError("parse", f"{model_path}:{e}") from None
    try:
        phi = parse_formula(ftext, system.syms)
    except (ParseError, ModelError) as e:
        raise CliError("parse", f"{formula_path}:{e}") from None
    return system, phi


def config_from_args(args) -> CheckConfig:
    try:
        return CheckConfig(d_value=args.d, d_strict=args.d_strict, edgf=not args.no_edgf,
                           non_zeno=not args.no_non_zeno, abstraction=ABS_FLAGS[args.abs])
    except ConfigError as e:
        raise CliError("parse", str(e)) from None


def run_check(system, phi, cfg: CheckConfig, model_id: str, formula_id: str) -> RunReport:
    try:
        ans = model_check(system, phi, cfg)
    except UnsafeAbstraction as e:
        raise CliError("unsafe", str(e)) from None
    st = ans.stats
    stats = {"outer_iters": st.outer_iters, "inner_iters": st.inner_iters,
             "peak_zones": st.peak_zones, "gfp_calls": st.gfp_calls,
             "early_exits": st.early_exits, "ms": round(st.elapsed_ms, 3),
             "c_global": st.c_global, "d": st.d_value}
    conf = {"d": cfg.d_value if cfg.d_value is not None else st.d_value,
            "cmp": ">" if cfg.d_strict else ">=", "edgf": cfg.edgf,
            "non_zeno": cfg.non_zeno, "abstraction": cfg.abstraction}
    return RunReport(ans.verdict.value, model_id, formula_id, conf, stats, ans.approximated)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check(args) -> int:
    system, phi = load_inputs(args.model, args.formula)
    rep = run_check(system, phi, config_from_args(args), args.model, args.formula)
    if args.json:
        print(rep.to_json())
    else:
        print(f"answer: {rep.verdict}")
        if args.stats:
            for k, v in rep.stats.items():
                print(f"{k}: {v}")
    return EXIT[rep.verdict]


def _parse_int_list(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError("parse", f"not a list of integers: {text!r}") from None


def _sweep_row(job):
    model_path, formula_path, cfg = job
    system, phi = load_inputs(model_path, formula_path)
    rep = run_check(system, phi, cfg, model_path, formula_path)
    return {"d": cfg.d_value, "cmp": ">" if cfg.d_strict else ">=", "verdict": rep.verdict,
            "outer_iters": rep.stats["outer_iters"], "inner_iters": rep.stats["inner_iters"],
            "peak_zones": rep.stats["peak_zones"], "ms": rep.stats["ms"]}


def cmd_sweep(args) -> int:
    ds = _parse_int_list(args.d_list)
    if not ds:
        raise CliError("parse", "empty d list")
    if min(ds) < 1:
        raise CliError("parse", "d must be at least 1")
    cmps = [c.strip() for c in args.cmp.split(",") if c.strip()]
    for c in cmps:
        if c not in (">=", ">"):
            raise CliError("parse", f"comparator must be '>=' or '>', got {c!r}")
    load_inputs(args.model, args.formula)  # fail early on bad input
    base = config_from_args(args)
    jobs = [(args.model, args.formula, replace(base, d_value=d, d_strict=(c == ">")))
            for d in sorted(set(ds)) for c in sorted(set(cmps), reverse=True)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    verdicts = {r["verdict"] for r in rows}
    if len(verdicts) > 1:
        print(f"error: verdict depends on d: {sorted(verdicts)}", file=sys.stderr)
        return EXIT["inconsistent"]
    return EXIT[verdicts.pop()]


def cmd_gen(args) -> int:
    try:
        spec = BenchSpec(args.family, args.n, args.variant)
    except ValueError as e:
        raise CliError("parse", str(e)) from None
    for p in write_benchmark(spec, args.output):
        print(p)
    return 0


def cmd_oracle(args) -> int:
    from .oracle import OracleRefusal, oracle_check
    system, phi = load_inputs(args.model, args.formula)
    try:
        ans = oracle_check(system.net, phi, args.budget)
    except OracleRefusal as e:
        raise CliError("refused", str(e)) from None
    print(f"answer: {ans.verdict.value}")
    if args.stats:
        print(f"regions: {ans.stats.peak_zones}")
    return EXIT[ans.verdict.value]


# ---------------------------------------------------------------------------
# Parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse's own status 2 would read as a "maybe" verdict
        self.print_usage(sys.stderr)
        self.exit(EXIT["parse"], f"{self.prog}: error: {message}\n")


def _engine_flags(p):
    p.add_argument("--d", type=int, default=None, help="divergence step (default min(80, C+1))")
    p.add_argument("--d-strict", action="store_true", help="use ZC > d instead of ZC >= d")
    p.add_argument("--no-edgf", action="store_true", help="disable early decision on the gfp")
    p.add_argument("--no-non-zeno", action="store_true",
                   help="quantify over all runs, including Zeno ones")
    p.add_argument("--abs", choices=tuple(ABS_FLAGS), default="none",
                   help="reachability over-approximation (universal formulas only)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="zenocheck", description="Symbolic TCTL model checking of timed automata networks.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="{check,sweep,gen}",
                            parser_class=_Parser)

    p = sub.add_parser("check", help="check a formula against a model")
    p.add_argument("model")
    p.add_argument("formula", help="file holding one TCTL formula")
    _engine_flags(p)
    p.add_argument("--json", action="store_true", help="print the report as one JSON object")
    p.add_argument("--stats", action="store_true", help="print iteration and zone counts")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="run one check per (d, comparator) pair and emit CSV")
    p.add_argument("model")
    p.add_argument("formula")
    _engine_flags(p)
    p.add_argument("--d-list", default="1,2", help="comma-separated d values")
    p.add_argument("--cmp", default=">=,>", help="comma-separated comparators among '>=' and '>'")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="write a benchmark model and its specification")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--variant", choices=CSMA_VARIANTS, default=None)
    p.add_argument("-o", "--output", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle")  # debugging aid, kept out of the usage line
    p.add_argument("model")
    p.add_argument("formula")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--stats", action="store_true")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT[e.kind]


if __name__ == "__main__":
    sys.exit(main())
