"""Run every figure preset and write the CSVs under results/<preset>/.

    python3 scripts/run_presets.py [--trials N] [--seed S] [--jobs J] [--out DIR]
"""

import argparse
import time

from mmwave_asep import cli


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--trials", type=int, default=cli.McSettings.trials)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", default="results")
    parser.add_argument("presets", nargs="*", default=list(cli.PRESETS))
    args = parser.parse_args()
    for name in args.presets:
        t0 = time.perf_counter()
        cli.main(["preset", name, "--out", f"{args.out}/{name}", "--trials", str(args.trials),
                  "--seed", str(args.seed), "--jobs", str(args.jobs)])
        print(f"# {name}: {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
