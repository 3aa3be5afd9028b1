#!/usr/bin/env python3
"""Recompute the latency reference tables and print them side by side."""

from marketdyn import tables


def main() -> None:
    print(tables.render_latency_u0(t50=5.0))
    print(tables.render_latency_kernels(t50=5.0))


if __name__ == "__main__":
    main()
