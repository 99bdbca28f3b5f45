"""Write one JSON artifact per CLI run into a directory.

    python scripts/artifacts.py OUTDIR [--seed N]

Each file records the argv, the exit code and the parsed JSON output, so
two runs with the same seed can be compared byte for byte.
"""

import argparse
import io
import json
from pathlib import Path
import sys

from liouvmat.cli import main

M22 = '[["sqrt(2)", "1/3"], ["0", "sqrt(5)"]]'
R22 = '[["1/2", "1/3"], ["1/5", "1/7"]]'


def runs(seed):
    s = ["--seed", str(seed)]
    return {
        "approx_golden": ["approx", '[["(1+sqrt(5))/2"]]', "--qmax", "200"],
        "approx_2x2": ["approx", M22, "--qmax", "60"],
        "approx_oracle": ["approx", M22, "--qmax", "60", "--oracle"],
        "nearest": ["nearest", '[["liouville(10, factorial)"]]', "--q", "1000000"],
        "goodness": ["goodness", '[["sqrt(2)", "sqrt(2)"]]', "--qmax", "5"],
        "exponent": ["exponent", '[["liouville(10, factorial)"]]', "--qmax", "100000"],
        "dirichlet": ["dirichlet", M22, "--qmax", "50"],
        "eval": ["eval", "cbrt(2) + sqrt(3)"],
        "truncate": ["truncate", "--K", "4"],
        "construct_thm1": ["construct", "thm1"],
        "construct_erdos": ["construct", "erdos", '[["sqrt(2)"]]'],
        "hauser": ["hauser", M22, "--qmax", "30"],
        "mordell": ["mordell", "--N", "6", "--bound", "50"],
        "series_exp": ["series", "exp", R22],
        "moebius": ["moebius", "1,1,0,2", R22],
        "degeneracy": ["degeneracy", "poly:[1,2,3]"],
        "blockimage": ["blockimage", "poly:[0,0,1]", "--a", "cbrt(2)"],
        "sect9": ["sect9", "--J", "8"],
        "transport": ["transport", M22, '[{"kind": "add", "T": [["1/3", "0"], ["0", "1/3"]]}]', "--qmax", "30"],
        "identity_sample": ["identity", "sample", "X1*X2*X3 - X3*X2*X1", "--trials", "10"] + s,
        "demo_ier": ["demo", "ier", "--trials", "5"] + s,
        "demo_analog": ["demo", "analog", "--qmax", "300"] + s,
        "demo_erdos": ["demo", "erdos"],
        "demo_hall": ["demo", "hall", "--trials", "50"] + s,
        "demo_amitsur": ["demo", "amitsur", "--trials", "10"] + s,
        "demo_sect9": ["demo", "sect9"],
    }


def write_artifacts(outdir, seed=0):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    codes = {}
    for name, argv in runs(seed).items():
        buf = io.StringIO()
        code = main(argv, buf)
        text = buf.getvalue()
        try:
            body = json.loads(text)
        except json.JSONDecodeError:
            body = text
        doc = {"argv": argv, "exit_code": code, "output": body}
        (outdir / f"{name}.json").write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
        codes[name] = code
    return codes


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir")
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    codes = write_artifacts(a.outdir, a.seed)
    for name, code in codes.items():
        print(f"{code}  {name}")
    sys.exit(0)
