"""Walk through the downlink SINR distributions of the reference network.

Computes the analytic CDFs of the three links (BS to non-cooperative user,
BS to relay, relay to cooperative user), simulates the same network, and
prints both side by side together with the mean rates.

    python3 demos/sinr_cdfs.py [n_realizations]
"""

import sys
from pathlib import Path

import numpy as np

from relay_ee import McConfig, coop_rate, load_config, mean_rate_noncoop, simulate
from relay_ee.coop import rs_link_cdf
from relay_ee.montecarlo import estimate_rates_and_ee
from relay_ee.sinr import bs_ccdf, bs_link

REFERENCE = Path(__file__).resolve().parents[1] / "configs" / "reference.toml"


def main(n=4000):
    cfg = load_config(REFERENCE)
    p = cfg.params
    print(f"subchannels: M_b1={p.m_b1}, M_b2={p.m_b2}, M_r={p.m_r}; relays/cell={p.n_relays_per_cell:g}")

    mc = McConfig(n_realizations=n, seed=cfg.mc.seed)
    s = simulate(p, mc)
    b1, b2 = bs_link(p, "b1"), bs_link(p, "b2")

    print(f"\n{'T (dB)':>7} | {'noncoop':>15} | {'BS->RS':>15} | {'RS->UE':>15}")
    print(f"{'':>7} | {'analytic    mc':>15} | {'analytic    mc':>15} | {'analytic    mc':>15}")
    for t_db in range(-10, 41, 5):
        t = 10 ** (t_db / 10)
        cols = [(1 - bs_ccdf(b1, t), np.mean(s.gamma_nc <= t)),
                (1 - bs_ccdf(b2, t), np.mean(s.gamma_1 <= t)),
                (rs_link_cdf(t, p), np.mean(s.gamma_2 <= t))]
        print(f"{t_db:7d} | " + " | ".join(f"{a:7.4f} {m:7.4f}" for a, m in cols))

    # the relayed user also has a direct BS path; its SINR is approximated by the BS->RS one
    cr = coop_rate(p)
    rep = estimate_rates_and_ee(p, cfg.power_model, mc, s)
    print("\nmean rates (nats/s/Hz)     analytic        mc +/- se")
    rows = [("non-cooperative", mean_rate_noncoop(p).value, rep.tau_nc),
            ("decode probability", cr.p_decode, rep.p_decode),
            ("relay -> user", cr.tau_2, rep.tau_2),
            ("cooperative", cr.tau_c, rep.tau_c)]
    for name, a, m in rows:
        print(f"  {name:<22} {a:9.4f}   {m.value:9.4f} +/- {m.se:.4f}")
    print(f"  cooperative, true BS->UE SINR in MC: {rep.tau_c_true.value:.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4000)
