"""Best-approximation table of liouville(base, factorial) as CSV.

    python scripts/liouville_table.py [--base 10] [--qmax 1000000] [--out table.csv]

Prints, per record, the height, the certified residual bounds and the
exponent log(1/residual)/log(height).
"""

import argparse
import math
import sys

from liouvmat.diophantine import enumerate_best_pairs
from liouvmat.matrix import ExprMatrix


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--base", type=int, default=10)
    ap.add_argument("--qmax", type=int, default=10 ** 6)
    ap.add_argument("--out", default=None)
    a = ap.parse_args(argv)
    table = enumerate_best_pairs(ExprMatrix([[f"liouville({a.base}, factorial)"]]), a.qmax)
    text = table.to_csv()
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for r in table.rows:
        if r.height >= 2:
            w = -math.log(r.upper) / math.log(r.height)
            print(f"# h={r.height:>8}  residual<={float(r.upper):.3e}  w={w:.3f}", file=sys.stderr)


if __name__ == "__main__":
    main()
