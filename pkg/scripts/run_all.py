"""Run every registered experiment and print a one-line verdict for each.

    python3 scripts/run_all.py [--out results] [--seed 0] [--only NAME ...]
"""

import argparse
import json
import sys
import time

from heatlp.cli import error_object, make_config, run_experiment
from heatlp.experiments import REGISTRY


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", nargs="*")
    args = ap.parse_args()
    names = args.only or sorted(REGISTRY, key=lambda n: (REGISTRY[n].criterion or 99, n))
    worst = 0
    for name in names:
        t0 = time.perf_counter()
        try:
            summary, code = run_experiment(make_config(name, seed=args.seed, out=args.out))
            failed = [k for k, c in summary["checks"].items() if not c["pass"]]
            note = "" if not failed else " failing: " + ", ".join(failed)
        except (ValueError, ArithmeticError, NotImplementedError) as exc:
            err, code = error_object(exc)
            note = " " + json.dumps(err)
        crit = REGISTRY[name].criterion
        tag = f"#{crit}" if crit else "extra"
        status = "PASS" if code == 0 else "FAIL"
        print(f"{status} {tag:6s} {name:26s} {time.perf_counter() - t0:7.1f}s{note}", flush=True)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
