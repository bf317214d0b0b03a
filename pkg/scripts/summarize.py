#!/usr/bin/env python3
"""Print a sweep CSV as a compact table, one column per metric/series pair.

    python3 scripts/summarize.py results/fig8.csv
"""

import sys
from collections import defaultdict

from d2d_underlay.experiments import read_csv


def main(path):
    rows = read_csv(path)
    cols = []
    table = defaultdict(dict)
    for r in rows:
        key = r.metric if r.series is None else f"{r.metric}@{r.series:g}"
        if key not in cols:
            cols.append(key)
        table[r.axis][key] = r.value
    width = max(12, *(len(c) for c in cols))
    print("axis".ljust(8) + "".join(c.rjust(width + 2) for c in cols))
    for axis in sorted(table):
        print(f"{axis:<8g}" + "".join(f"{table[axis].get(c, float('nan')):>{width + 2}.5g}" for c in cols))


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
