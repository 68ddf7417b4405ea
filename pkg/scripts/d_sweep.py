"""Sweep the divergence constant d over generated benchmarks; write one CSV each.

    python scripts/d_sweep.py -o sweeps/ --d-list 1,2,3,5,9
"""

import argparse
import os
import tempfile

from zenocheck.bench import BenchSpec, write_benchmark
from zenocheck.cli import main as cli

SPECS = [BenchSpec("pathos", 2), BenchSpec("leader", 2),
         BenchSpec("csma", 2, "A"), BenchSpec("csma", 2, "B"), BenchSpec("csma", 2, "C")]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-o", "--out", default="sweeps")
    ap.add_argument("--d-list", default="1,2,3,5,9")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    status = 0
    with tempfile.TemporaryDirectory() as tmp:
        for spec in SPECS:
            model, formula = write_benchmark(spec, tmp)
            out = os.path.join(args.out, f"{spec.name}.csv")
            code = cli(["sweep", model, formula, "--d-list", args.d_list,
                        "--jobs", str(args.jobs), "-o", out])
            print(f"{spec.name}: exit {code} -> {out}")
            status = max(status, code if code == 6 else 0)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
