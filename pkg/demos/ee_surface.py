"""Energy efficiency over the two user densities.

Evaluates Q on a coarse (lambda_nc, lambda_c) grid with the surface settings
of the reference config and prints it as a table in bits/s/Hz/W, followed by
the shape summary (monotone rise, number of maxima, plateau flatness).

    python3 demos/ee_surface.py
"""

from pathlib import Path

import numpy as np

from relay_ee import load_config
from relay_ee.studies import run_ee_surface

REFERENCE = Path(__file__).resolve().parents[1] / "configs" / "reference.toml"


def main():
    cfg = load_config(REFERENCE, ["surface.lambda_nc.points=7", "surface.lambda_c.points=6"])
    t = run_ee_surface(cfg)
    lnc, lc, q = t.column("lambda_nc"), t.column("lambda_c"), t.column("q_bits")
    xs, ys = np.unique(lnc), np.unique(lc)
    grid = q.reshape(len(xs), len(ys))

    print("Q (bits/s/Hz/W); rows lambda_nc, columns lambda_c")
    print(" " * 9 + "".join(f"{y:>9.0e}" for y in ys))
    for x, row in zip(xs, grid):
        print(f"{x:>9.0e}" + "".join(f"{v:9.4f}" for v in row))

    print()
    for k, v in t.summary.items():
        print(f"{k:>32}: {v}")


if __name__ == "__main__":
    main()
