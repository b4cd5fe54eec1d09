"""Print the diagnostics behind the criteria that do not pass at their stated tolerance.

    python3 scripts/diagnose_red.py
"""

import math

import numpy as np

from heatlp.cli import make_config, run_experiment
from heatlp.kernels import SemigroupId, heat_kernel, hermite_series_kernel


def series_truncation():
    xs = np.linspace(-3, 3, 13)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    print("Mehler kernel vs eigen-expansion, max relative error by truncation K")
    print(f"{'t':>6} {'K=60':>10} {'K=200':>10} {'K=600':>10}   first neglected mode at K=60")
    for t in (0.05, 0.2, 1.0, 2.0):
        closed = heat_kernel(SemigroupId.hermite(1), t, X, Y)
        errs = [np.max(np.abs(hermite_series_kernel(1, t, X, Y, K) - closed) / closed * (closed > 1e-3))
                for K in (60, 200, 600)]
        print(f"{t:6g} " + " ".join(f"{e:10.2e}" for e in errs) + f"   e^(-123 t) = {math.exp(-123 * t):.1e}")
    print("(errors above are restricted to kernel values > 1e-3)\n")


def report(name, keys):
    summary, _ = run_experiment(make_config(name, out="results/diagnostics"))
    print(name)
    for k in keys:
        print(f"  {k} = {summary['metrics'].get(k, summary['info'].get(k))}")
    print()


if __name__ == "__main__":
    series_truncation()
    report("hille_hardy_vs_series", ["constant_factor", "constant_factor_spread", "max_rel_err_converged_series"])
    report("markov_defect", ["ratio_quadrature_to_closed_form", "max_rel_err_without_2pi", "max_value"])
    report("composition", ["max_magnitude_rel_err", "failing_pairs", "note"])
    report("monotonicity", ["max_excess", "max_ratio", "gamma_ratio_bound", "gamma_ratio_bound_holds"])
