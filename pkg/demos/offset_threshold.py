"""How large may a relay's fixed power offset be before relays stop paying off?

Sweeps the offset scale eta for three relay transmit powers and compares Q
with the relay-free network that keeps all subchannels at the BS.  The
threshold is where the two curves cross.

    python3 demos/offset_threshold.py
"""

from pathlib import Path

import numpy as np

from relay_ee import load_config
from relay_ee.studies import run_threshold_study

REFERENCE = Path(__file__).resolve().parents[1] / "configs" / "reference.toml"


def main():
    cfg = load_config(REFERENCE, ["threshold.eta.points=11"])
    t = run_threshold_study(cfg, analytic=True, mc=False)
    p, eta, q = t.column("p_r_dbm"), t.column("eta"), t.column("q_relay")
    base = t.column("q_baseline")[0]
    powers = np.unique(p)

    print(f"relay-free baseline Q = {base:.4f} nats/s/Hz/W")
    print(f"{'eta':>6}" + "".join(f"{f'{v:g} dBm':>12}" for v in powers))
    for e in np.unique(eta):
        print(f"{e:6.2f}" + "".join(f"{q[(p == v) & (eta == e)][0]:12.4f}" for v in powers))

    print()
    for k, v in t.summary.items():
        if k.startswith(("eta_th", "b_r_th")):
            print(f"{k:>20}: {v}")


if __name__ == "__main__":
    main()
