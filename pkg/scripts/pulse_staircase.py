"""Depress then potentiate one device with identical pulses, reading after each."""

import argparse

from memsim.device import MemristorParams, MemristorState, apply_pulse_train
from memsim.output import csv_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amp", type=float, default=3.0, help="pulse magnitude, V")
    ap.add_argument("--width", type=float, default=1e-6)
    ap.add_argument("--n", type=int, default=8, help="pulses per polarity")
    args = ap.parse_args()

    p = MemristorParams()
    s, down = apply_pulse_train(MemristorState(p.g_max), p, -args.amp, args.width, args.n)
    _, up = apply_pulse_train(s, p, args.amp, args.width, args.n)
    rows = [(k + 1, "reset", r) for k, r in enumerate(down)]
    rows += [(args.n + k + 1, "set", r) for k, r in enumerate(up)]
    print(csv_text(("pulse", "polarity", "r_read_ohm"), rows), end="")


if __name__ == "__main__":
    main()
