"""Run every end-to-end demo and print its checks.

    python scripts/run_demos.py [--json] [name ...]
"""

import argparse
import json

from liouvmat.demos import DEMOS


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", default=sorted(DEMOS))
    ap.add_argument("--json", action="store_true")
    a = ap.parse_args(argv)
    for name in a.names:
        rep = DEMOS[name]()
        if a.json:
            print(json.dumps(rep.to_json(), sort_keys=True))
            continue
        print(f"== {name}: {'PASS' if rep.passed else 'FAIL'}")
        for label, ok, detail in rep.checks:
            print(f"   {'ok  ' if ok else 'FAIL'} {label}  {detail}".rstrip())


if __name__ == "__main__":
    main()
