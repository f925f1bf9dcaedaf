"""Latency and link utilization of the routing mesh as offered load grows."""

import argparse

from memsim.mesh import BoardSpec, route_events, uniform_traffic
from memsim.output import csv_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-events", type=int, default=100_000)
    ap.add_argument("--loads", default="0.02,0.05,0.1,0.2,0.5,0.9")
    ap.add_argument("--pattern", choices=("neighbor", "uniform"), default="neighbor")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = BoardSpec()
    rows = []
    for load in (float(x) for x in args.loads.split(",")):
        s = route_events(spec, uniform_traffic(spec, args.n_events, load, args.seed, args.pattern))
        rows.append((load, s.delivered, s.mean_latency_s, s.max_latency_s, s.max_link_util, s.max_queue))
    header = ("load_fraction", "delivered", "mean_latency_s", "max_latency_s", "max_link_util", "max_queue")
    print(csv_text(header, rows), end="")


if __name__ == "__main__":
    main()
