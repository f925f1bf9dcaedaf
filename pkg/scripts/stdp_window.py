"""Learning window for a few tail amplitudes of the spike waveform."""

import argparse

from memsim.device import MemristorParams
from memsim.neuron import SpikeWaveform
from memsim.output import csv_text
from memsim.stdp import StdpProbe, stdp_curve, zero_crossings


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tails", default="-0.4,-0.6,-0.8", help="comma-separated tail voltages, V")
    args = ap.parse_args()

    mp = MemristorParams()
    rows = []
    for v_tail in (float(x) for x in args.tails.split(",")):
        wave = SpikeWaveform.biphasic(v_tail=v_tail)
        curve = stdp_curve(StdpProbe(wave, wave), mp)
        rows += [(v_tail, dT, xi) for dT, xi in curve]
        print(f"# v_tail={v_tail:+.2f} V  zero crossings={zero_crossings(curve[:, 1])}")
    print(csv_text(("v_tail_V", "delta_t_s", "xi_S"), rows), end="")


if __name__ == "__main__":
    main()
