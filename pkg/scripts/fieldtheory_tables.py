"""Field-mediated coupling tables (J, K, |D|) and the near-field residual, as CSV."""
import argparse

from gmesim.cli import format_fieldtheory, run_fieldtheory
from gmesim.config import FieldGrid, load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="INI file with a [fieldtheory] section")
    args = ap.parse_args()
    grid = load_config(args.config, {"infinite_shots": True}).grid if args.config else FieldGrid(
        eta=(0.0, 1e-3, 0.1, 1.0, 10.0)
    )
    print(format_fieldtheory(run_fieldtheory(grid), "csv", grid), end="")


if __name__ == "__main__":
    main()
