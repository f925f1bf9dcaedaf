"""Spread of the synaptic response across a mismatched population, per parameter."""

import argparse

from memsim.dpi import DpiParams
from memsim.engine import MismatchSpec, draw_population, empirical_cv, population_epsp
from memsim.output import csv_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=124)
    ap.add_argument("--cv", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rows = []
    for param in ("I_w", "I_tau", "I_th", "C", "kappa"):
        pop = draw_population(DpiParams(), MismatchSpec(param, args.cv, args.n), args.seed)
        _, mean, std = population_epsp(pop, [1e-3], 0.05, 1e-5)
        k = mean.argmax()
        cv = empirical_cv([getattr(p, param) for p in pop])
        rows.append((param, cv, mean[k], std[k], std[k] / mean[k]))
    print(csv_text(("param", "param_cv", "peak_mean_A", "peak_std_A", "peak_cv"), rows), end="")


if __name__ == "__main__":
    main()
