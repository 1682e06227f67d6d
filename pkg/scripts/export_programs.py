"""Write every named fixture to programs/<name>.ir with its store in a
sibling .init file."""

import argparse
from pathlib import Path

from pdgsem.fixtures import CATALOG
from pdgsem.ir import print_cfg


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "programs"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, fx in sorted(CATALOG.items()):
        (out / f"{name.lower()}.ir").write_text(print_cfg(fx.cfg))
        (out / f"{name.lower()}.init").write_text(fx.init + "\n")
        print(f"wrote {name.lower()}.ir")


if __name__ == "__main__":
    main()
