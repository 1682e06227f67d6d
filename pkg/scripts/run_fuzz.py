"""Run a differential fuzz campaign and write the JSON report.

Example: python scripts/run_fuzz.py --seed 0 --count 500 --out fuzz-0.json
"""

import argparse
import time

from pdgsem.fuzz import fuzz_campaign
from pdgsem.generate import GenParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--max-nodes", type=int, default=12)
    ap.add_argument("--loop-bias", type=float, default=0.35)
    ap.add_argument("--retargets", type=int, default=2)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    params = GenParams(max_nodes=args.max_nodes, loop_bias=args.loop_bias, retargets=args.retargets)
    t0 = time.perf_counter()
    rep = fuzz_campaign(args.seed, args.count, params)
    for line in rep.summary_lines():
        print(line)
    print(f"elapsed: {time.perf_counter() - t0:.1f}s")
    for p in rep.programs:
        if p.cond23 or p.mismatches or p.alarm or p.guided_ok is False:
            tags = [t for t, on in (("cond2/3", p.cond23), ("mismatch", p.mismatches),
                                    ("alarm", p.alarm), ("guided", p.guided_ok is False)) if on]
            print(f"  #{p.index} seed={p.seed}: {', '.join(tags)}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json() + "\n")


if __name__ == "__main__":
    main()
