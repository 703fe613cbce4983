import math

import numpy as np
import pytest
from scipy import stats

from relay_ee.coop import coop_rate, rs_link_cdf
from relay_ee.energy import PowerModel
from relay_ee.montecarlo import (McConfig, _bs_process, estimate_rates_and_ee, estimate_sinr_cdf, mean_estimate,
                                 radial_ppp, sample_realization, simulate, single_interferer_sir)
from relay_ee.params import reference_params
from relay_ee.studies import ks_distance, two_sample_sup


def test_config_invariants(ref_params):
    with pytest.raises(ValueError):
        McConfig(n_realizations=0)
    with pytest.raises(ValueError):
        McConfig(window_radius=500.0).bs_window(ref_params)
    with pytest.raises(ValueError):
        McConfig(guard="torus")
    assert McConfig().bs_window(ref_params) == pytest.approx(30 / math.sqrt(math.pi * 1e-5))


def test_realization_reproducible(ref_params):
    mc = McConfig(seed=3)
    a, b = sample_realization(ref_params, mc, 17), sample_realization(ref_params, mc, 17)
    assert np.array_equal(a.bs_points, b.bs_points) and a.gamma_0 == b.gamma_0
    c = sample_realization(ref_params, McConfig(seed=4), 17)
    assert c.gamma_nc != a.gamma_nc


def test_realization_structure(ref_params):
    r = sample_realization(ref_params, McConfig(seed=1), 0)
    d = np.hypot(r.bs_points[:, 0], r.bs_points[:, 1])
    assert np.all(np.diff(d) >= 0) and r.bs_active[0]
    assert np.hypot(*r.ue_offset) <= ref_params.r_relay
    assert r.decoded == (r.gamma_1 >= ref_params.t_th)
    assert min(r.gamma_nc, r.gamma_0, r.gamma_1, r.gamma_2) > 0


def test_worker_invariance(ref_params):
    a = simulate(ref_params, McConfig(n_realizations=120, seed=5, workers=1))
    b = simulate(ref_params, McConfig(n_realizations=120, seed=5, workers=2))
    for name in ("gamma_nc", "gamma_1", "gamma_0", "gamma_2", "u_nc", "u_c"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_resampling_counted(ref_params):
    rng = np.random.default_rng(0)
    rs = [_bs_process(rng, ref_params, 30.0)[3] for _ in range(50)]
    # expected pi * 1e-5 * 900 = 0.028 points per window: nearly every draw is resampled
    assert sum(rs) > 50


def test_radial_ppp_sorted_and_bounded():
    rng = np.random.default_rng(2)
    r, th, mk = radial_ppp(rng, 1e-3, 300.0, n_marks=2)
    assert np.all(np.diff(r) >= 0) and r[-1] <= 300.0 and mk.shape == (len(r), 2)
    assert radial_ppp(rng, 0.0, 300.0)[0].size == 0


def test_nearest_distance_law(ref_samples, ref_params):
    r = ref_samples.r_serving
    est = mean_estimate(r)
    assert est.within(1 / (2 * math.sqrt(ref_params.lambda_b)))
    lam = ref_params.lambda_b
    assert ks_distance(np.sort(r), lambda x: 1 - np.exp(-lam * math.pi * x * x)) < 0.02


def test_relay_ue_distance(ref_samples):
    assert mean_estimate(ref_samples.r_rs_ue).within(2 * 20 / 3)


def test_thinned_relay_count(ref_samples, ref_params, ref_mc):
    from relay_ee.cell_load import busy_probabilities
    lam = busy_probabilities(ref_params).lambda_r
    w = ref_mc.rs_window(ref_params)
    assert mean_estimate(ref_samples.n_rs_active).within(lam * math.pi * w * w)


def test_window_counts_poisson_chi2(ref_samples, ref_params, ref_mc):
    n = ref_samples.n_bs[:1000]
    mean = ref_params.lambda_b * math.pi * ref_mc.bs_window(ref_params) ** 2
    edges = np.concatenate(([-np.inf], np.arange(840, 961, 10), [np.inf]))
    cdf = stats.poisson(mean).cdf
    exp = np.diff([0.0] + [cdf(e) for e in edges[1:-1]] + [1.0]) * len(n)
    # bins are (a, b]; histogram bins are [a, b) on integers, so shift edges by one
    obs, _ = np.histogram(n, bins=edges + 1)
    assert stats.chisquare(obs, exp).pvalue > 0.01


def test_window_doubling(ref_params):
    small = McConfig(n_realizations=2000, seed=9)
    big = McConfig(n_realizations=2000, seed=9, window_radius=2 * small.bs_window(ref_params))
    a = estimate_sinr_cdf("bs-noncoop", ref_params, small)
    b = estimate_sinr_cdf("bs-noncoop", ref_params, big)
    assert abs(a.value - b.value) < a.se


def test_single_interferer_closed_form():
    rs, ri, alpha = 50.0, 80.0, 4.0
    g = np.sort(single_interferer_sir(10_000, rs, ri, alpha, seed=1))
    assert ks_distance(g, lambda t: 1 - 1 / (1 + t * (rs / ri) ** alpha)) < 0.02


def test_estimate_cdf_step_function(ref_samples, ref_params, ref_mc):
    est = estimate_sinr_cdf("bs-noncoop", ref_params, ref_mc, ref_samples)
    grid = np.logspace(-3, 6, 100)
    f = est.cdf(grid)
    assert np.all(np.diff(f) >= 0) and f[0] >= 0 and f[-1] <= 1
    assert est.cdf(np.inf) == 1.0 and est.cdf(0.0) == 0.0
    x = np.log1p(ref_samples.gamma_nc)
    assert est.se == pytest.approx(np.std(x, ddof=1) / math.sqrt(len(x)))


def test_rs_link_cdf_matches_simulation(ref_samples, ref_params):
    assert ks_distance(np.sort(ref_samples.gamma_2), lambda t: rs_link_cdf(t, ref_params)) < 0.03


def test_conditional_mode_rates(ref_samples, ref_params, ref_mc):
    rep = estimate_rates_and_ee(ref_params, PowerModel(), ref_mc, ref_samples)
    cr = coop_rate(ref_params)
    assert rep.tau_m1.within(cr.tau_m1)
    assert rep.tau_0.within(cr.tau_0)
    assert rep.tau_1.within(cr.tau_1)


def test_gamma0_approximation_quantified(ref_samples):
    sup = two_sample_sup(ref_samples.gamma_0, ref_samples.gamma_1)
    assert 0 < sup < 1


def test_deterministic_fading_runs():
    p = reference_params(interferer_fading="deterministic")
    s = simulate(p, McConfig(n_realizations=50, seed=1))
    assert np.all(s.gamma_nc > 0)


def test_dump_samples(tmp_path, ref_params):
    s = simulate(ref_params, McConfig(n_realizations=5, seed=1))
    path = tmp_path / "s.csv"
    s.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,gamma_nc,gamma_1,gamma_0,gamma_2,decoded" and len(lines) == 6
