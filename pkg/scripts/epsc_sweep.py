"""Peak EPSC of a hybrid bank against branch resistance, for several weight biases."""

import argparse

import numpy as np

from memsim.crossbar import HybridSynapseBank, epsc_vs_resistance
from memsim.dpi import DpiParams
from memsim.output import csv_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--i-w", default="0.5e-9,1e-9,2e-9", help="comma-separated weight currents, A")
    ap.add_argument("--points", type=int, default=25)
    args = ap.parse_args()

    r = np.linspace(1e3, 7e3, args.points)
    rows = []
    for i_w in (float(x) for x in args.i_w.split(",")):
        bank = HybridSynapseBank.from_conductances([1e-3], dpi_params=DpiParams(I_w=i_w))
        rows += [(i_w, ohm, peak) for ohm, peak in epsc_vs_resistance(bank, r)]
    print(csv_text(("I_w_A", "r_ohm", "peak_A"), rows), end="")


if __name__ == "__main__":
    main()
