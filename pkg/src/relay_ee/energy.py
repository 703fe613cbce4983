"""Consumed-power model and network energy efficiency."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .cell_load import load_distributions
from .coop import coop_rate
from .params import NetworkParams
from .sinr import mean_rate_noncoop

LN2 = math.log(2.0)


@dataclass(frozen=True)
class PowerModel:
    """Affine map from radiated to consumed power, per site class.

    ``eta`` scales the relay offset: the effective relay offset is ``eta * b_r``.
    """

    a_b: float = 22.6
    b_b: float = 412.4
    a_r: float = 5.5
    b_r: float = 32.0
    eta: float = 1.0

    def __post_init__(self):
        if not (self.a_b > 0 and self.a_r > 0):
            raise ValueError("power-model slopes must be positive")
        if self.b_b < 0 or self.b_r < 0 or self.eta < 0:
            raise ValueError("power-model offsets and eta must be non-negative")

    def with_eta(self, eta: float) -> "PowerModel":
        return replace(self, eta=eta)


def consumed_power(radiated: float, site: str, model: PowerModel) -> float:
    """Average consumed power (W) of a BS (``"bs"``) or relay (``"rs"``) site."""
    if radiated < 0:
        raise ValueError("radiated power must be >= 0")
    if site == "bs":
        return model.a_b * radiated + model.b_b
    if site == "rs":
        return model.a_r * radiated + model.eta * model.b_r
    raise ValueError(f"unknown site class {site!r}")


def cell_throughput(params: NetworkParams, tau_nc: float, tau_c: float) -> tuple[float, float]:
    """(tau_s1, tau_s2): mean served rate of a cell from each user class.

    Users beyond the subchannel count share by time division, so only
    min(count, subchannels) subchannels carry traffic.  U_r and U_c are
    independent, so the double sum over them factorises.
    """
    u_nc, u_r, u_c = load_distributions(params)
    tau_s1 = u_nc.expected_min(params.m_b1) * tau_nc
    if not params.has_relays:
        return tau_s1, 0.0
    tau_s2 = u_r.expected_min(float(params.rho)) * u_c.expected_min(params.m_r) * tau_c
    return tau_s1, tau_s2


@dataclass(frozen=True)
class EnergyEfficiencyResult:
    """Q = (tau_s1 + tau_s2) / denominator, rate in nats/s/Hz per watt."""

    q: float
    tau_s1: float
    tau_s2: float
    denominator: float

    @property
    def q_bits(self) -> float:
        return self.q / LN2


def energy_efficiency(params: NetworkParams, model: PowerModel = PowerModel(),
                      tau_nc: float | None = None, tau_c: float | None = None) -> EnergyEfficiencyResult:
    """Network energy efficiency of a typical cell.

    Rates are computed analytically when not supplied.  The denominator is
    one BS plus the mean number of relays per cell.
    """
    if tau_nc is None:
        tau_nc = mean_rate_noncoop(params).value if params.lambda_nc > 0 else 0.0
    if tau_c is None:
        tau_c = coop_rate(params).tau_c if (params.has_relays and params.lambda_c > 0) else 0.0
    tau_s1, tau_s2 = cell_throughput(params, tau_nc, tau_c)
    denom = total_consumed_power(params, model)
    return EnergyEfficiencyResult((tau_s1 + tau_s2) / denom, tau_s1, tau_s2, denom)


def total_consumed_power(params: NetworkParams, model: PowerModel) -> float:
    denom = consumed_power(params.p_bs_total, "bs", model)
    if params.has_relays:
        denom += params.n_relays_per_cell * consumed_power(params.p_rs_total, "rs", model)
    return denom


def relay_free_baseline(params: NetworkParams, subchannels: str = "all") -> NetworkParams:
    """The same network without relays and without cooperative traffic.

    ``subchannels="all"`` hands the whole spectrum (m_total) to the BS;
    ``"bs"`` keeps only the BS band m_b and drops the relay band.
    """
    if subchannels == "all":
        m = params.m_total
    elif subchannels == "bs":
        m = params.m_b
    else:
        raise ValueError(f"unknown baseline {subchannels!r}")
    return params.replace(lambda_r=0.0, lambda_c=0.0, m_total=m, m_b=m, m_b1=m, m_b2=0, m_r=0)
