"""Network parameters, unit conversions and validation.

Everything inside the package is SI: metres, watts, and nats for rates.
dBm and bits only appear at the config / report boundary.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

FADING_LAWS = ("exponential", "deterministic")


class InvalidParameterError(ValueError):
    """Raised when a parameter set violates one or more model invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def dbm_to_watts(x):
    """Convert power in dBm to watts."""
    return 10.0 ** ((x - 30.0) / 10.0)


def watts_to_dbm(x):
    return 10.0 * math.log10(x) + 30.0


@dataclass(frozen=True, kw_only=True)
class NetworkParams:
    """Model constants for a relay-assisted downlink network.

    Densities are points per square metre, powers are radiated watts per site,
    ``m_*`` are subchannel counts.  Defaults reproduce the reference scenario
    (43/33 dBm, 300 subchannels of which 15 go to the relay band).  The split of
    the BS band into non-cooperative (``m_b1``) and cooperative (``m_b2``) parts
    has no canonical value and must be given explicitly.
    """

    lambda_b: float = 1e-5
    lambda_r: float = 9e-5
    lambda_c: float = 1e-3
    lambda_nc: float = 1e-3
    p_bs_total: float = dbm_to_watts(43.0)
    p_rs_total: float = dbm_to_watts(33.0)
    m_total: int = 300
    m_b: int = 285
    m_r: int = 15
    m_b1: int
    m_b2: int
    r_relay: float = 20.0
    alpha: float = 4.0
    mu: float = 1.0
    noise: float = dbm_to_watts(-80.0)
    beta: float = 0.6
    r_th: float = 0.5
    interferer_fading: str = "exponential"

    def __post_init__(self):
        problems = _violations(self)
        if problems:
            raise InvalidParameterError(problems)

    # derived quantities

    @property
    def rho(self) -> Fraction:
        """Cooperative partition ratio m_b2 / m_r, kept exact."""
        if self.m_r == 0:
            return Fraction(0)
        return Fraction(self.m_b2, self.m_r)

    @property
    def p_b(self) -> float:
        """Per-subchannel BS transmit power."""
        return self.p_bs_total / self.m_b

    @property
    def p_r(self) -> float:
        """Per-subchannel RS transmit power (0 when there is no relay band)."""
        return self.p_rs_total / self.m_r if self.m_r else 0.0

    @property
    def t_th(self) -> float:
        """SINR the relay needs to decode the first-phase codeword."""
        return 2.0 ** (self.r_th / self.beta) - 1.0

    @property
    def n_relays_per_cell(self) -> float:
        return self.lambda_r / self.lambda_b

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def has_relays(self) -> bool:
        return self.lambda_r > 0 and self.m_r > 0

    def replace(self, **changes) -> "NetworkParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.init}


def _violations(p: NetworkParams) -> list[str]:
    out = []

    def need(cond, msg):
        if not cond:
            out.append(msg)

    for name in ("lambda_b", "lambda_r", "lambda_c", "lambda_nc", "r_relay", "alpha", "mu",
                 "noise", "beta", "r_th", "p_bs_total", "p_rs_total"):
        v = getattr(p, name)
        need(isinstance(v, (int, float)) and math.isfinite(v), f"{name} must be a finite number (got {v!r})")
    if out:
        return out
    for name in ("lambda_r", "lambda_c", "lambda_nc"):
        need(getattr(p, name) >= 0, f"{name} must be >= 0 (got {getattr(p, name)})")
    need(p.lambda_b > 0, f"lambda_b must be > 0 (got {p.lambda_b})")
    need(p.alpha > 2, f"alpha must exceed 2 (got {p.alpha})")
    need(p.mu > 0, f"mu must be > 0 (got {p.mu})")
    need(p.noise >= 0, f"noise must be >= 0 (got {p.noise})")
    need(0 < p.beta <= 1, f"beta must lie in (0, 1] (got {p.beta})")
    need(p.r_th >= 0, f"r_th must be >= 0 (got {p.r_th})")
    need(p.r_relay > 0, f"r_relay must be > 0 (got {p.r_relay})")
    need(p.p_bs_total > 0, f"p_bs_total must be > 0 (got {p.p_bs_total})")
    need(p.interferer_fading in FADING_LAWS,
         f"interferer_fading must be one of {FADING_LAWS} (got {p.interferer_fading!r})")

    for name in ("m_total", "m_b", "m_r", "m_b1", "m_b2"):
        v = getattr(p, name)
        if isinstance(v, bool) or not isinstance(v, int):
            out.append(f"{name} must be an integer (got {v!r})")
    if out:
        return out
    need(p.m_b1 + p.m_b2 == p.m_b, f"m_b1 + m_b2 must equal m_b ({p.m_b1} + {p.m_b2} != {p.m_b})")
    need(p.m_b + p.m_r == p.m_total, f"m_b + m_r must equal m_total ({p.m_b} + {p.m_r} != {p.m_total})")
    need(p.m_b1 >= 1, f"m_b1 must be >= 1 (got {p.m_b1})")
    if p.lambda_r > 0:
        need(p.m_r >= 1, f"m_r must be >= 1 when relays are deployed (got {p.m_r})")
        need(p.m_b2 >= 1, f"m_b2 must be >= 1 when relays are deployed (got {p.m_b2})")
        need(p.p_rs_total > 0, f"p_rs_total must be > 0 when relays are deployed (got {p.p_rs_total})")
    else:
        need(p.m_r >= 0 and p.m_b2 >= 0, "subchannel counts must be non-negative")
    return out


def validate(params: NetworkParams | Mapping[str, Any]) -> NetworkParams:
    """Return a checked :class:`NetworkParams`.

    Accepts either an existing instance (returned unchanged, so the call is
    idempotent) or a flat mapping as read from a config file.  Raises
    :class:`InvalidParameterError` listing every violated invariant.
    """
    if isinstance(params, NetworkParams):
        problems = _violations(params)
        if problems:
            raise InvalidParameterError(problems)
        return params
    return params_from_mapping(params)


_INT_FIELDS = {"m_total", "m_b", "m_r", "m_b1", "m_b2"}


def params_from_mapping(values: Mapping[str, Any], base: NetworkParams | None = None) -> NetworkParams:
    """Build parameters from flat keys.

    Powers may be given in watts (``p_bs_total``) or dBm (``p_bs_total_dbm``);
    ``noise_dbm`` likewise.  ``rho`` may replace ``m_b2`` (then
    ``m_b2 = rho * m_r``).  Missing ``m_b1``/``m_b2`` are derived from the
    other partition counts when possible.  Unknown keys are rejected.
    """
    names = {f.name for f in dataclasses.fields(NetworkParams) if f.init}
    kw: dict[str, Any] = base.as_dict() if base is not None else {}
    rho = None
    unknown = []
    for key, val in values.items():
        if key.endswith("_dbm") and key[:-4] in names:
            kw[key[:-4]] = dbm_to_watts(float(val))
        elif key == "rho":
            rho = Fraction(str(val))
        elif key in names:
            kw[key] = int(val) if key in _INT_FIELDS else (val if key == "interferer_fading" else float(val))
        else:
            unknown.append(key)
    if unknown:
        raise InvalidParameterError([f"unknown parameter {k!r}" for k in sorted(unknown)])

    m_b = kw.get("m_b", 285)
    m_r = kw.get("m_r", 15)
    if "m_total" not in values and ("m_b" in values or "m_r" in values):
        kw["m_total"] = m_b + m_r
    if rho is not None:
        m_b2 = rho * m_r
        if m_b2.denominator != 1:
            raise InvalidParameterError([f"rho * m_r must be an integer (got {m_b2})"])
        kw["m_b2"] = int(m_b2)

    # one side of the BS split given explicitly: the other follows from m_b
    given_b1 = "m_b1" in values
    given_b2 = "m_b2" in values or rho is not None
    if given_b2 and not given_b1:
        kw["m_b1"] = m_b - kw["m_b2"]
    elif given_b1 and not given_b2:
        kw["m_b2"] = m_b - kw["m_b1"]
    elif not given_b1 and not given_b2 and "m_b2" in kw and "m_b" in values:
        kw["m_b1"] = m_b - kw["m_b2"]
    if "m_b1" not in kw or "m_b2" not in kw:
        raise InvalidParameterError(["the BS band split (m_b1/m_b2 or rho) must be configured"])
    return NetworkParams(**kw)


def reference_params(rho: int | Fraction = 1, **overrides) -> NetworkParams:
    """Reference scenario with ``m_b2 = rho * m_r`` carved out of the BS band."""
    m_b2 = Fraction(rho) * 15
    if m_b2.denominator != 1:
        raise InvalidParameterError([f"rho * m_r must be an integer (got {m_b2})"])
    kw = dict(m_b1=285 - int(m_b2), m_b2=int(m_b2))
    kw.update(overrides)
    return NetworkParams(**kw)
