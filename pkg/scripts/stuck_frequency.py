"""Measure how often CFG-derived PDGs reach a stuck state.

A stuck state is quiescent with the return node never executed.  For
each seed the script explores every interleaving of every terminating
program and prints the share of programs with at least one stuck state,
split by whether the PDG is deterministic.
"""

import argparse

from pdgsem.fuzz import fuzz_campaign


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--count", type=int, default=500)
    args = ap.parse_args()
    print("seed  terminating  stuck  stuck_dpdg  stuck_with_guided_failure")
    for seed in args.seeds:
        rep = fuzz_campaign(seed, args.count)
        term = [p for p in rep.programs if p.cfg_verdict == "terminated"]
        stuck = [p for p in term if p.stuck]
        det = sum(1 for p in stuck if p.deterministic)
        guided = sum(1 for p in stuck if p.guided_ok is False)
        print(f"{seed:4d}  {len(term):11d}  {len(stuck):5d}  {det:10d}  {guided:25d}")


if __name__ == "__main__":
    main()
