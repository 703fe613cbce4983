"""The three experiments (SINR CDFs, EE surface, offset-power threshold) as CSV tables.

Every study returns a :class:`StudyTable`: column names, rows ordered by grid
index, and summary lines.  Tables are written with a ``#``-prefixed header
holding the version and the resolved configuration, so the body is a plain
CSV that any tool can read with ``comment="#"``.
"""

from __future__ import annotations

import csv
import io
import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import __version__
from .cell_load import load_distributions
from .config import ExperimentConfig
from .coop import coop_rate, rs_link_cdf
from .energy import PowerModel, energy_efficiency, relay_free_baseline, total_consumed_power
from .montecarlo import estimate_rates_and_ee, simulate
from .params import NetworkParams, dbm_to_watts
from .sinr import bs_ccdf, bs_link, mean_rate_noncoop

NONE_IN_RANGE = "none in sweep range"


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def fmt(x) -> str:
    """Shortest round-trip text for floats; blank-free and locale-independent."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


@dataclass
class StudyTable:
    study: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def body(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(v) for v in r])
        return buf.getvalue()

    def render(self, config: ExperimentConfig | None = None) -> str:
        head = [f"# relay-ee {version_string()}", f"# study = {self.study}"]
        if config is not None:
            head += [f"# {line}" for line in config.header_lines()]
        head += [f"# summary.{k} = {fmt(v)}" for k, v in self.summary.items()]
        return "\n".join(head) + "\n" + self.body()

    def write(self, path, config: ExperimentConfig | None = None) -> None:
        Path(path).write_text(self.render(config))


def read_body(text: str) -> str:
    """CSV body of a rendered table, header lines dropped."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def _pool_map(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# --- SINR distributions --------------------------------------------------------

def ks_distance(sorted_samples: np.ndarray, cdf) -> float:
    """Exact sup-distance between an empirical CDF and a continuous CDF."""
    x = np.asarray(sorted_samples, dtype=float)
    n = len(x)
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def two_sample_sup(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.sort(a), np.sort(b)
    grid = np.concatenate((a, b))
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def run_cdf_study(config: ExperimentConfig, analytic: bool = True, mc: bool = True,
                  samples=None) -> StudyTable:
    """SINR CDFs of the non-cooperative, BS->RS, BS->UE and RS->UE links on a dB grid."""
    params = config.params
    spec = config.study("cdf")
    t_db = np.linspace(float(spec["t_db_min"]), float(spec["t_db_max"]), int(spec["points"]))
    t = 10.0 ** (t_db / 10.0)
    cols = ["T_dB", "analytic_noncoop", "analytic_bs_rs", "mc_noncoop", "mc_gamma0", "mc_gamma1",
            "analytic_rs_ue", "mc_gamma2"]
    nan = np.full(len(t), np.nan)
    a_nc = a_1 = a_2 = m_nc = m_0 = m_1 = m_2 = nan
    summary = {}
    if analytic:
        l1, l2 = bs_link(params, "b1"), bs_link(params, "b2")
        a_nc = np.array([1.0 - bs_ccdf(l1, x) for x in t])
        a_1 = np.array([1.0 - bs_ccdf(l2, x) for x in t])
        a_2 = rs_link_cdf(t, params) if params.has_relays else nan
    if mc:
        s = samples if samples is not None else simulate(params, config.mc)
        ecdf = lambda g: np.searchsorted(np.sort(g), t, side="right") / len(g)  # noqa: E731
        m_nc, m_0, m_1, m_2 = ecdf(s.gamma_nc), ecdf(s.gamma_0), ecdf(s.gamma_1), ecdf(s.gamma_2)
        summary["n_realizations"] = s.n
        summary["resampled_empty_windows"] = int(s.resampled.sum())
        summary["sup_gamma0_vs_gamma1"] = two_sample_sup(s.gamma_0, s.gamma_1)
        if analytic:
            l1 = bs_link(params, "b1")
            summary["ks_noncoop"] = ks_distance(np.sort(s.gamma_nc),
                                                lambda x: np.array([1.0 - bs_ccdf(l1, v) for v in x]))
    rows = [list(r) for r in zip(t_db, a_nc, a_1, m_nc, m_0, m_1, a_2, m_2)]
    return StudyTable("cdf", cols, rows, summary)


# --- energy-efficiency surface -------------------------------------------------

def _rate_nc(p: NetworkParams) -> float:
    return mean_rate_noncoop(p).value if p.lambda_nc > 0 else 0.0


def _rate_c(p: NetworkParams) -> float:
    return coop_rate(p).tau_c if (p.has_relays and p.lambda_c > 0) else 0.0


def _surface_row(job):
    params, model, lam_nc, lam_c_values, tau_c_values = job
    p_row = params.replace(lambda_nc=lam_nc)
    tau_nc = _rate_nc(p_row)
    out = []
    for lam_c, tau_c in zip(lam_c_values, tau_c_values):
        p = p_row.replace(lambda_c=lam_c)
        ee = energy_efficiency(p, model, tau_nc=tau_nc, tau_c=tau_c)
        out.append([lam_nc, lam_c, model.eta, 10 * math.log10(p.p_rs_total) + 30, ee.tau_s1, ee.tau_s2,
                    ee.denominator, ee.q, ee.q_bits])
    return out


def surface_shape(q: np.ndarray, plateau_decades: float = 1.0, x=None, y=None, rtol: float = 1e-9) -> dict:
    """Structural checks on a Q grid indexed [lambda_nc, lambda_c] with ascending axes.

    rise: Q is nondecreasing along both axes up to ``rtol`` of max |Q|.
    maxima: grid points within ``rtol`` of every 8-neighbour's value, grouped
    into 8-connected regions, so a flat saturated top counts once.
    plateau: relative spread of Q over the top ``plateau_decades`` of both axes.
    """
    q = np.asarray(q, dtype=float)
    slack = rtol * np.nanmax(np.abs(q))
    rise = bool(np.all(np.diff(q, axis=0) >= -slack) and np.all(np.diff(q, axis=1) >= -slack))
    padded = np.pad(q, 1, constant_values=-np.inf)
    n0, n1 = q.shape
    neigh = np.max([padded[1 + di:1 + di + n0, 1 + dj:1 + dj + n1]
                    for di in (-1, 0, 1) for dj in (-1, 0, 1) if di or dj], axis=0)
    is_max = q >= neigh - slack
    _, n_regions = ndimage.label(is_max, structure=np.ones((3, 3)))
    i_opt, j_opt = np.unravel_index(int(np.argmax(q)), q.shape)
    x = np.arange(1, n0 + 1) if x is None else np.asarray(x)
    y = np.arange(1, n1 + 1) if y is None else np.asarray(y)
    top = q[np.ix_(x >= x[-1] / 10 ** plateau_decades, y >= y[-1] / 10 ** plateau_decades)]
    plateau = float((top.max() - top.min()) / top.max())
    return {"rise": rise, "n_local_maxima": int(n_regions), "single_max": n_regions == 1,
            "i_opt": int(i_opt), "j_opt": int(j_opt), "q_opt": float(q[i_opt, j_opt]),
            "plateau_rel_spread": plateau}


def run_ee_surface(config: ExperimentConfig, workers: int | None = None) -> StudyTable:
    """Q over a (lambda_nc, lambda_c) grid, plus maximum and shape diagnostics."""
    params = config.study_params("surface")
    model = config.power_model
    xs = config.axis("surface", "lambda_nc").values()
    ys = config.axis("surface", "lambda_c").values()
    # the cooperative rate depends on lambda_c only, the direct rate on lambda_nc only
    tau_c = [_rate_c(params.replace(lambda_c=float(y))) for y in ys]
    jobs = [(params, model, float(x), [float(y) for y in ys], tau_c) for x in xs]
    blocks = _pool_map(_surface_row, jobs, workers if workers is not None else config.mc.workers)
    rows = [r for b in blocks for r in b]
    cols = ["lambda_nc", "lambda_c", "eta", "p_r_dbm", "tau_s1", "tau_s2", "p_consumed_total_w",
            "q_nats", "q_bits"]
    q = np.array([r[7] for r in rows]).reshape(len(xs), len(ys))
    shape = surface_shape(q, x=xs, y=ys)
    summary = {
        "rho": str(params.rho),
        "q_opt_nats": shape["q_opt"],
        "q_opt_bits": shape["q_opt"] / math.log(2.0),
        "argmax_lambda_nc": float(xs[shape["i_opt"]]),
        "argmax_lambda_c": float(ys[shape["j_opt"]]),
        "monotone_rise": shape["rise"],
        "n_local_maxima": shape["n_local_maxima"],
        "plateau_rel_spread_top_decade": shape["plateau_rel_spread"],
    }
    return StudyTable("surface", cols, rows, summary)


# --- offset-power threshold -----------------------------------------------------

def crossing(x: np.ndarray, d: np.ndarray):
    """First zero of ``d`` by linear interpolation between adjacent points, or None."""
    x, d = np.asarray(x, dtype=float), np.asarray(d, dtype=float)
    for i in range(len(x) - 1):
        if d[i] == 0:
            return float(x[i])
        if d[i] * d[i + 1] < 0:
            return float(x[i] + d[i] * (x[i + 1] - x[i]) / (d[i] - d[i + 1]))
    if d[-1] == 0:
        return float(x[-1])
    return None


def _threshold_block(job):
    params, model, p_dbm, etas, baseline_q, use_mc, mc_cfg, analytic = job
    p = params.replace(p_rs_total=dbm_to_watts(p_dbm))
    rows = []
    ee = energy_efficiency(p, model) if analytic else None
    rep = estimate_rates_and_ee(p, model, mc_cfg) if use_mc else None
    for eta in etas:
        m = model.with_eta(float(eta))
        q = ee.tau_s1 + ee.tau_s2 if ee is not None else math.nan
        den = total_consumed_power(p, m)
        row = [p_dbm, float(eta), float(eta) * model.b_r, q / den, baseline_q]
        if use_mc:
            row += [rep.throughput.value / den, rep.throughput.se / den]
        rows.append(row)
    return rows


def run_threshold_study(config: ExperimentConfig, analytic: bool = True, mc: bool = False,
                        workers: int | None = None) -> StudyTable:
    """Q versus the relay offset scale eta for each relay power, against the relay-free network."""
    spec = config.study("threshold")
    params = config.study_params("threshold")
    model = config.power_model
    etas = config.axis("threshold", "eta").values()
    base = relay_free_baseline(params, spec.get("baseline", "all"))
    baseline_q = energy_efficiency(base, model).q
    powers = [float(v) for v in spec["p_rs_dbm"]]
    jobs = [(params, model, pw, etas, baseline_q, mc, config.mc, analytic) for pw in powers]
    blocks = _pool_map(_threshold_block, jobs, workers if workers is not None else config.mc.workers)
    rows = [r for b in blocks for r in b]
    cols = ["p_r_dbm", "eta", "b_r_w", "q_relay", "q_baseline"]
    if mc:
        cols += ["mc_q_relay", "mc_q_relay_se"]
    summary = {"rho": str(params.rho), "lambda_nc": params.lambda_nc, "lambda_c": params.lambda_c,
               "baseline": spec.get("baseline", "all"), "q_baseline": baseline_q}
    key = "q_relay" if analytic else "mc_q_relay"
    for pw, block in zip(powers, blocks):
        q = np.array([r[cols.index(key)] for r in block])
        eta_th = crossing(etas, q - baseline_q)
        tag = f"{pw:g}dBm"
        summary[f"eta_th_{tag}"] = NONE_IN_RANGE if eta_th is None else eta_th
        if eta_th is not None:
            summary[f"b_r_th_w_{tag}"] = eta_th * model.b_r
    return StudyTable("threshold", cols, rows, summary)


# --- load distributions and rate breakdown ---------------------------------------

def run_pmf_dump(config: ExperimentConfig) -> StudyTable:
    """Truncated count pmfs of U_nc, U_r and U_c side by side."""
    u_nc, u_r, u_c = load_distributions(config.params)
    n = max(len(u_nc.pmf), len(u_r.pmf), len(u_c.pmf))
    pad = lambda a: np.concatenate((a, np.zeros(n - len(a))))  # noqa: E731
    rows = [[i, a, b, c] for i, (a, b, c) in enumerate(zip(pad(u_nc.pmf), pad(u_r.pmf), pad(u_c.pmf)))]
    summary = {"mean_u_nc": u_nc.mean, "mean_u_r": u_r.mean, "mean_u_c": u_c.mean,
               "tail_u_nc": u_nc.tail_bound, "tail_u_r": u_r.tail_bound, "tail_u_c": u_c.tail_bound}
    return StudyTable("pmf", ["i", "p_unc", "p_ur", "p_uc"], rows, summary)


def run_rates(config: ExperimentConfig, analytic: bool = True, mc: bool = False, samples=None) -> StudyTable:
    """Every rate of the model with its Monte Carlo estimate and standard error."""
    params, model = config.params, config.power_model
    names = ["tau_nc", "p_decode", "tau_1", "tau_m1", "tau_0", "tau_2", "tau_c", "q"]
    vals = {k: math.nan for k in names}
    if analytic:
        cr = coop_rate(params)
        vals.update(tau_nc=_rate_nc(params), p_decode=cr.p_decode, tau_1=cr.tau_1, tau_m1=cr.tau_m1,
                    tau_0=cr.tau_0, tau_2=cr.tau_2, tau_c=cr.tau_c, q=energy_efficiency(params, model).q)
    rows = []
    rep = None
    if mc:
        rep = estimate_rates_and_ee(params, model, config.mc, samples)
    for k in names:
        if rep is None:
            est, se = math.nan, math.nan
        elif k == "q":
            est, se = rep.ee.q, rep.q_se
        else:
            e = getattr(rep, k)
            est, se = e.value, e.se
        z = (est - vals[k]) / se if se and not math.isnan(se) and se > 0 else math.nan
        rows.append([k, vals[k], est, se, z])
    summary = {}
    if rep is not None:
        summary["tau_0_true_bs_ue"] = rep.tau_0_true.value
        summary["tau_c_true_bs_ue"] = rep.tau_c_true.value
    return StudyTable("rates", ["quantity", "analytic", "mc", "mc_se", "z"], rows, summary)


__all__ = ["PowerModel", "StudyTable", "crossing", "ks_distance", "read_body", "run_cdf_study",
           "run_ee_surface", "run_pmf_dump", "run_rates", "run_threshold_study", "surface_shape",
           "two_sample_sup", "version_string"]
