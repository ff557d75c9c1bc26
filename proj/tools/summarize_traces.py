#!/usr/bin/env python3
"""Summarize correlation-trace CSV files emitted by `fmoqc run`.

For each file, prints the configuration and, per measure, the peak value,
the time of the peak, and the final value relative to the peak.
"""

import argparse
import math
import sys

COLUMNS = ("MI", "discord", "ree_single", "ree_full")


def parse_trace(path):
    header = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition(": ")
                header[key] = value
            elif line.startswith("t_ps"):
                continue
            else:
                fields = line.split(",")
                rows.append((float(fields[0]), [float(v) for v in fields[1:5]]))
    return header, rows


def summarize(path):
    header, rows = parse_trace(path)
    print(path)
    print(f"  cut {header.get('cut', '?')}  temp {header.get('temp', '?')} K"
          f"  init {header.get('init', '?')}  points {len(rows)}")
    for index, name in enumerate(COLUMNS):
        series = [(t, values[index]) for t, values in rows
                  if not math.isnan(values[index])]
        if not series:
            continue
        peak_t, peak = max(series, key=lambda item: item[1])
        tail_t, tail = series[-1]
        rel = tail / peak if peak > 0 else float("nan")
        print(f"  {name:<10} peak {peak:.6g} bits at {peak_t:.4g} ps;"
              f" {tail:.3g} at {tail_t:.4g} ps ({rel:.1%} of peak)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("traces", nargs="+", help="trace CSV files")
    args = parser.parse_args()
    for i, path in enumerate(args.traces):
        if i:
            print()
        try:
            summarize(path)
        except (OSError, ValueError) as err:
            print(f"{path}: {err}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
