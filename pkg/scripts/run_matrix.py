"""Run the benchmark matrix and print verdicts with iteration and zone counts.

    python scripts/run_matrix.py               # engine configurations
    python scripts/run_matrix.py --abstractions # abstraction operators
"""

import argparse

from zenocheck.bench import BenchSpec
from zenocheck.engine import CheckConfig, model_check
from zenocheck.model import load_system
from zenocheck.tctl import parse_formula

ENGINE_SPECS = ([BenchSpec("pathos", n) for n in (2, 3, 4)]
                + [BenchSpec("leader", n) for n in (2, 3, 4)]
                + [BenchSpec("csma", n, v) for v in "ABC" for n in (2, 3)])
ENGINE_CONFIGS = {
    "zeno+edgf": dict(non_zeno=False, edgf=True),
    "zeno": dict(non_zeno=False, edgf=False),
    "nz+edgf": dict(non_zeno=True, edgf=True),
    "nz": dict(non_zeno=True, edgf=False),
}
ABS_SPECS = [BenchSpec("pathos", 3), BenchSpec("csma", 3, "A"), BenchSpec("leader", 2),
             BenchSpec("leader", 3)]
ABS_CONFIGS = {name: dict(abstraction=name)
               for name in ("none", "game", "game_discrete", "game_magnitude")}


def run(specs, configs):
    print(f"{'instance':<12} {'config':<15} {'verdict':<7} {'outer':>5} {'inner':>6} "
          f"{'zones':>6} {'ms':>9}")
    for spec in specs:
        m, f = spec.generate()
        system = load_system(m)
        phi = parse_formula(f, system.syms)
        for label, kw in configs.items():
            a = model_check(system, phi, CheckConfig(**kw))
            s = a.stats
            print(f"{spec.name:<12} {label:<15} {a.verdict.value:<7} {s.outer_iters:>5} "
                  f"{s.inner_iters:>6} {s.peak_zones:>6} {s.elapsed_ms:>9.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--abstractions", action="store_true")
    args = ap.parse_args()
    if args.abstractions:
        run(ABS_SPECS, ABS_CONFIGS)
    else:
        run(ENGINE_SPECS, ENGINE_CONFIGS)


if __name__ == "__main__":
    main()
