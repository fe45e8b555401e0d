"""Run every config in scripts/configs (or the ones named) through the CLI.

    python scripts/run_experiments.py [--q Q] [name ...]
"""
import argparse
import sys
from pathlib import Path

from deltanls.cli import main

HERE = Path(__file__).parent / "configs"


def run():
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*")
    ap.add_argument("--q")
    args = ap.parse_args()
    names = args.names or sorted(p.stem for p in HERE.glob("*.yaml"))
    codes = {}
    for name in names:
        argv = ["--config", str(HERE / f"{name}.yaml")]
        if args.q is not None:
            argv += ["--q", args.q, "--out", f"runs/{name}_q{args.q}"]
        codes[name] = main(argv)
    for name, code in codes.items():
        print(f"{name:12s} exit {code}")
    return max(codes.values(), default=0)


if __name__ == "__main__":
    sys.exit(run())
