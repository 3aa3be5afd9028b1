#!/usr/bin/env python3
"""Sweep the initial customer base of an imitator-only market.

Emits CSV rows of T10/T50 and the inflection gradient against u0,
illustrating how strongly the latency of a network-effect market
depends on the seeded share.
"""

import argparse

from marketdyn import feedback
from marketdyn.scenario import format_value


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t50", type=float, default=5.0)
    parser.add_argument("--points", type=int, default=25)
    args = parser.parse_args()

    print("u0,gamma,T10_over_T50,gradient_at_inflection")
    for i in range(args.points):
        u0 = 0.0005 * 2.0 ** (i / 3.0)
        if u0 >= 0.1:
            break
        model = feedback.FeedbackModel.calibrated(
            feedback.kernel("linear"), args.t50, u0)
        metrics = feedback.latency_metrics(model)
        row = (u0, model.rate, metrics.t10 / metrics.t50, metrics.gradient_at_infl)
        print(",".join(format_value(v) for v in row))


if __name__ == "__main__":
    main()
