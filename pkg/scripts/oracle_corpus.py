"""Compare the symbolic engine with the region-graph oracle on random instances.

    python scripts/oracle_corpus.py --count 500 --seed 1 --max-const 3
"""

import argparse
import random
import time

from zenocheck.engine import CheckConfig, model_check
from zenocheck.model import load_system
from zenocheck.oracle import OracleRefusal, oracle_check, random_instance
from zenocheck.tctl import parse_formula


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=300)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--max-const", type=int, default=2)
    ap.add_argument("--show", action="store_true", help="print every disagreeing instance")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    agree = refused = 0
    bad = []
    t0 = time.perf_counter()
    for _ in range(args.count):
        m, f = random_instance(rng, args.max_const)
        system = load_system(m)
        phi = parse_formula(f, system.syms)
        try:
            o = oracle_check(system.net, phi).verdict
        except OracleRefusal:
            refused += 1
            continue
        e = model_check(system, phi, CheckConfig()).verdict
        if o == e:
            agree += 1
        else:
            bad.append((m, f, o.value, e.value))
    secs = time.perf_counter() - t0
    print(f"{agree} agree, {len(bad)} disagree, {refused} refused in {secs:.1f}s")
    for m, f, o, e in bad if args.show else bad[:3]:
        print(f"--- oracle {o}, engine {e}: {f}\n{m}")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
