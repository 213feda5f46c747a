"""Run every shipped preset through the command-line workflows.

    python scripts/reproduce_figures.py [--out runs] [--threads 4] [--only fig2a fig9]

Each preset lands in ``<out>/<name>/`` as CSV plus a JSON sidecar.  The
evolve preset also runs the discretized-continuum check.
"""

import argparse
import sys
from pathlib import Path

from autoion.cli import run
from autoion.presets import PRESETS

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", nargs="*", default=sorted(PRESETS))
    args = ap.parse_args(argv)
    status = 0
    for name in args.only:
        mode = PRESETS[name]["mode"]
        extra = ["--oracle"] if mode == "evolve" else []
        print(f"== {name} ({mode})", flush=True)
        code = run([mode, "--config", str(CONFIGS / f"{name}.json"), "--out", str(Path(args.out) / name),
                    "--threads", str(args.threads), *extra])
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
