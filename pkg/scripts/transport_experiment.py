"""Transport every record pair of a matrix through a rational operation.

    python scripts/transport_experiment.py [--qmax 1000]

Defaults to the 2x2 Liouville block [[sqrt(2), L], [0, 0]] (L the
four-term truncation of liouville(2, factorial)) and the shift A + I/3.
Prints source and image exponents per record and the predicted floor.
"""

import argparse
from fractions import Fraction

from liouvmat.construct import thm1_matrix
from liouvmat.demos import default_liouville_b
from liouvmat.invariance import RationalOp, verify_preservation
from liouvmat.matrix import ExactMatrix, ExprMatrix


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qmax", type=int, default=1000)
    ap.add_argument("--matrix", default=None, help='JSON rows, e.g. [["sqrt(2)", "1/3"]]')
    a = ap.parse_args(argv)
    if a.matrix:
        import json
        A = ExprMatrix(json.loads(a.matrix))
    else:
        A = thm1_matrix("sqrt(2)", default_liouville_b())
    third = Fraction(1, 3)
    op = RationalOp.add(ExactMatrix([[third if i == j else 0 for j in range(A.n)] for i in range(A.m)]))
    rep = verify_preservation(op, A, a.qmax)
    c = rep.constants
    print(f"residual factor {c.residual_factor}, height factor {c.height_factor}")
    print(f"{'height':>8} {'w':>7} {'w_image':>8} {'floor':>7}  within")
    for r in rep.rows:
        if r.w_source is None:
            continue
        print(f"{r.source.height:>8} {r.w_source:7.3f} {r.w_image:8.3f} {r.w_floor:7.3f}  {r.within}")
    print(f"source estimate {rep.source_omega:.4f}, image max {rep.image_omega:.4f}, "
          f"all within bound: {rep.all_within}, exponents above floor: {rep.exponents_ok}")


if __name__ == "__main__":
    main()
