"""Closed-form per-realization rates for the conferencing relay network.

All rates are in bits per channel use: logarithms are base 2 and every rate
carries the half-duplex prefactor 1/2.  Three quantities are evaluated per
channel realization:

* the broadcast cut-set upper bound,
* the decode-and-forward (DF) rate, where each relay combines its direct
  observation with the conferenced copies (ratio combining across independent
  noisy observations) and all relays retransmit coherently,
* the amplify-and-forward (AF) rate, where each relay linearly combines its
  own and the conferenced observations, scales to its power budget, and
  forwards.

The AF destination SINR decomposes into a signal coefficient ``q1`` and two
aggregate noise coefficients: ``q2`` collects the forwarded first-hop receiver
noise and ``q3`` the forwarded conferencing-link noise.  Asymptotic (moment
based) companions of each rate are provided for the large-network limits.

Index convention: relay ``i`` receives conferenced signals from the M relays
``i-1, ..., i-M`` (mod N).  The conferencing transmit normalization always
uses the second moment of the *sending* relay's source link, which is what
makes the forwarded signal respect the conferencing power budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    ChannelRealization,
    MomentSet,
    NetworkConfig,
    PreconditionError,
)

LOG2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class RateReport:
    """Every per-realization rate and AF coefficient in one record."""

    c_upper: float
    df_relay_rates: np.ndarray
    df_mac_rate: float
    df_rate: float
    af_q1: float
    af_q2: float
    af_q3: float
    af_rate: float


# ---------------------------------------------------------------------------
# Cyclic window sums
# ---------------------------------------------------------------------------

def _win_back(v: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """out[i] = sum_{k=lo..hi} v[(i - k) mod n], for 0 <= lo <= hi <= n."""
    n = len(v)
    if hi < lo:
        return np.zeros(n)
    cs = np.concatenate(([0.0], np.cumsum(np.concatenate((v, v)))))
    idx = np.arange(n) + n
    return cs[idx - lo + 1] - cs[idx - hi]


def _win_fwd(v: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """out[i] = sum_{k=lo..hi} v[(i + k) mod n], for 0 <= lo <= hi <= n."""
    n = len(v)
    if hi < lo:
        return np.zeros(n)
    cs = np.concatenate(([0.0], np.cumsum(np.concatenate((v, v)))))
    idx = np.arange(n)
    return cs[idx + hi + 1] - cs[idx + lo]


def _sender_gain_col(f, k: int):
    """Gains of the links ending at each relay i with lag k (sender i - k).

    Returns a scalar for uniform gains, else the length-N column aligned so
    that entry i is the gain of the link (i-k) -> i.
    """
    if np.isscalar(f):
        return f
    return np.roll(f[:, k - 1], k)


def _require_conferencing_power(cfg: NetworkConfig):
    if cfg.m_conf >= 1 and cfg.p_c == 0:
        raise PreconditionError(
            f"M = {cfg.m_conf} conferencing neighbors configured but p_c = 0; "
            "conferencing-based combining is undefined without link power"
        )


# ---------------------------------------------------------------------------
# Cut-set upper bound
# ---------------------------------------------------------------------------

def capacity_upper_bound(real: ChannelRealization, cfg: NetworkConfig) -> float:
    """Broadcast cut-set bound 0.5*log2(1 + (p_s/n_0) * sum_i |h_i|^2)."""
    snr = cfg.p_s / cfg.n_0 * float(np.sum(np.abs(real.h) ** 2))
    return 0.5 * math.log1p(snr) / LOG2


def capacity_upper_asymptotic(cfg: NetworkConfig, mom: MomentSet) -> float:
    """Moment form of the cut-set bound, the large-N concentration target."""
    snr = cfg.p_s / cfg.n_0 * float(np.sum(mom.m2_h))
    return 0.5 * math.log1p(snr) / LOG2


# ---------------------------------------------------------------------------
# Decode-and-forward
# ---------------------------------------------------------------------------

def _df_conferencing_snr(real: ChannelRealization, cfg: NetworkConfig,
                         mom: MomentSet) -> np.ndarray:
    """Per-relay sum of conferenced-observation SNR terms (p_s/n_0 factored out).

    The copy of the source symbol relayed from j = i-k arrives at relay i
    with SNR gain g_j*f^2*|h_j|^2 / (g_j*f^2 + 1) where
    g_j = p_c / (p_s*E|h_j|^2 + n_0) is the conferencing transmit
    normalization of the sending relay.
    """
    m = cfg.m_conf
    n = cfg.n_relays
    if m == 0:
        return np.zeros(n)
    _require_conferencing_power(cfg)
    abs_h2 = np.abs(real.h) ** 2
    gamma = cfg.p_c / (cfg.p_s * mom.m2_h + cfg.n_0)
    if np.isscalar(real.f):
        gf2 = gamma * real.f ** 2
        return _win_back(gf2 * abs_h2 / (gf2 + 1.0), 1, m)
    total = np.zeros(n)
    for k in range(1, m + 1):
        gf2 = np.roll(gamma, k) * _sender_gain_col(real.f, k) ** 2
        total += gf2 * np.roll(abs_h2, k) / (gf2 + 1.0)
    return total


def df_relay_rates(real: ChannelRealization, cfg: NetworkConfig,
                   mom: MomentSet) -> np.ndarray:
    """First-hop decoding rate supported at every relay."""
    abs_h2 = np.abs(real.h) ** 2
    snr = cfg.p_s / cfg.n_0 * (abs_h2 + _df_conferencing_snr(real, cfg, mom))
    return 0.5 * np.log1p(snr) / LOG2


def df_relay_rate(i: int, real: ChannelRealization, cfg: NetworkConfig,
                  mom: MomentSet) -> float:
    """First-hop decoding rate supported at relay ``i``."""
    return float(df_relay_rates(real, cfg, mom)[i])


def df_mac_gain(real: ChannelRealization, cfg: NetworkConfig,
                mom: MomentSet) -> float:
    """Coherent second-hop amplitude q0 = sum_i sqrt(p_r/E|g_i|^2)*|g_i|^2."""
    return float(np.sum(np.sqrt(cfg.p_r / mom.m2_g) * np.abs(real.g) ** 2))


def df_mac_rate(real: ChannelRealization, cfg: NetworkConfig,
                mom: MomentSet) -> float:
    """Second-hop rate 0.5*log2(1 + q0^2/n_0) of the coherent relay sum."""
    q0 = df_mac_gain(real, cfg, mom)
    return 0.5 * math.log1p(q0 * q0 / cfg.n_0) / LOG2


def df_rate(real: ChannelRealization, cfg: NetworkConfig, mom: MomentSet) -> float:
    """DF rate: every relay must decode, so the minimum relay rate and the
    second-hop rate both bound it."""
    return min(float(np.min(df_relay_rates(real, cfg, mom))),
               df_mac_rate(real, cfg, mom))


def df_rates_asymptotic(cfg: NetworkConfig, mom: MomentSet) -> np.ndarray:
    """Moment form of every relay's first-hop rate (concentration target)."""
    m = cfg.m_conf
    n = cfg.n_relays
    if m == 0:
        conf = np.zeros(n)
    else:
        _require_conferencing_power(cfg)
        if np.isscalar(cfg.conf_gain):
            f2 = cfg.conf_gain ** 2
            term = cfg.p_c * f2 * mom.m2_h / (cfg.p_c * f2 + cfg.p_s * mom.m2_h + cfg.n_0)
            conf = _win_back(term, 1, m)
        else:
            conf = np.zeros(n)
            for k in range(1, m + 1):
                f2 = _sender_gain_col(cfg.conf_gain, k) ** 2
                m2 = np.roll(mom.m2_h, k)
                conf += cfg.p_c * f2 * m2 / (cfg.p_c * f2 + cfg.p_s * m2 + cfg.n_0)
    snr = cfg.p_s / cfg.n_0 * (mom.m2_h + conf)
    return 0.5 * np.log1p(snr) / LOG2


def df_rate_asymptotic(cfg: NetworkConfig, mom: MomentSet, i: int) -> float:
    """Moment form of relay ``i``'s first-hop rate.

    Equals 0.5*log2(1 + (M+1)*(p_s/n_0)*mu) where mu averages the direct
    second moment and the conferencing SNR fractions over the neighborhood.
    """
    return float(df_rates_asymptotic(cfg, mom)[i])


# ---------------------------------------------------------------------------
# Amplify-and-forward
# ---------------------------------------------------------------------------

def af_power_factors(cfg: NetworkConfig, mom: MomentSet) -> np.ndarray:
    """Per-relay power control factor a_i of the AF combining scheme.

    a_i^2 normalizes the combined signal to the relay power budget:

        a_i^2 = 1 / ( E|g_i|^2 * [ p_s * E(sum_k |h_{i-k}|^2)^2
                                   + sum_k E|h_{i-k}|^2
                                   + sum_{k>=1} (p_s E|h_{i-k}|^2 + n_0)
                                     / (p_c f_{i-k,i}^2) * E|h_{i-k}|^2 ] )

    with k ranging over the conferencing window 0..M and the squared-sum
    expectation expanded through independence of the per-index draws.
    """
    _require_conferencing_power(cfg)
    m = cfg.m_conf
    win2 = _win_back(mom.m2_h, 0, m)
    win4 = _win_back(mom.m4_h, 0, m)
    win2sq = _win_back(mom.m2_h ** 2, 0, m)
    mean_square = win4 + win2 * win2 - win2sq
    if m == 0:
        conf = 0.0
    elif np.isscalar(cfg.conf_gain):
        u = (cfg.p_s * mom.m2_h + cfg.n_0) * mom.m2_h / (cfg.p_c * cfg.conf_gain ** 2)
        conf = _win_back(u, 1, m)
    else:
        conf = np.zeros(cfg.n_relays)
        for k in range(1, m + 1):
            m2 = np.roll(mom.m2_h, k)
            f2 = _sender_gain_col(cfg.conf_gain, k) ** 2
            conf += (cfg.p_s * m2 + cfg.n_0) * m2 / (cfg.p_c * f2)
    bracket = cfg.p_s * mean_square + win2 + conf
    return 1.0 / np.sqrt(mom.m2_g * bracket)


def af_power_factor(i: int, cfg: NetworkConfig, mom: MomentSet) -> float:
    """Power control factor of relay ``i``."""
    return float(af_power_factors(cfg, mom)[i])


def af_q_terms(real: ChannelRealization, cfg: NetworkConfig,
               mom: MomentSet) -> tuple[float, float, float]:
    """AF destination coefficients (q1, q2, q3) for one realization.

    q1 scales the source symbol, q2 the aggregated first-hop noise power, and
    q3 the aggregated conferencing noise power; q3 is zero without
    conferencing.
    """
    a = af_power_factors(cfg, mom)
    m = cfg.m_conf
    abs_h2 = np.abs(real.h) ** 2
    abs_g2 = np.abs(real.g) ** 2
    q1 = float(np.sum(a * abs_g2 * _win_back(abs_h2, 0, m)))
    fwd = _win_fwd(a * abs_g2, 0, m)
    q2 = float(np.sum(fwd * fwd * abs_h2))
    if m == 0:
        q3 = 0.0
    elif np.isscalar(real.f):
        w = (cfg.p_s * mom.m2_h + cfg.n_0) * abs_h2 / (cfg.p_c * real.f ** 2)
        q3 = float(np.sum(a * a * abs_g2 * abs_g2 * _win_back(w, 1, m)))
    else:
        q3 = 0.0
        for k in range(1, m + 1):
            m2 = np.roll(mom.m2_h, k)
            f2 = _sender_gain_col(real.f, k) ** 2
            w = (cfg.p_s * m2 + cfg.n_0) * np.roll(abs_h2, k) / (cfg.p_c * f2)
            q3 += float(np.sum(a * a * abs_g2 * abs_g2 * w))
    return q1, q2, q3


def af_sinr(real: ChannelRealization, cfg: NetworkConfig, mom: MomentSet) -> float:
    """Destination SINR p_s*p_r*q1^2 / ((p_r*(q2 + q3) + 1) * n_0)."""
    q1, q2, q3 = af_q_terms(real, cfg, mom)
    return cfg.p_s * cfg.p_r * q1 * q1 / ((cfg.p_r * (q2 + q3) + 1.0) * cfg.n_0)


def af_rate(real: ChannelRealization, cfg: NetworkConfig, mom: MomentSet) -> float:
    """AF rate 0.5*log2(1 + SINR) for one realization."""
    return 0.5 * math.log1p(af_sinr(real, cfg, mom)) / LOG2


def af_expected_q_terms(cfg: NetworkConfig,
                        mom: MomentSet) -> tuple[float, float, float]:
    """Expectations (E q1, E q2, E q3) over the fading laws.

    The squared forward window in E q2 expands through independence of the
    second-hop draws into fourth-moment diagonal terms plus second-moment
    cross terms.
    """
    a = af_power_factors(cfg, mom)
    m = cfg.m_conf
    eq1 = float(np.sum(a * mom.m2_g * _win_back(mom.m2_h, 0, m)))
    lin = _win_fwd(a * mom.m2_g, 0, m)
    quad = _win_fwd(a * a * mom.m4_g, 0, m) - _win_fwd((a * mom.m2_g) ** 2, 0, m)
    eq2 = float(np.sum((lin * lin + quad) * mom.m2_h))
    if m == 0:
        eq3 = 0.0
    elif np.isscalar(cfg.conf_gain):
        u = (cfg.p_s * mom.m2_h + cfg.n_0) * mom.m2_h / (cfg.p_c * cfg.conf_gain ** 2)
        eq3 = float(np.sum(a * a * mom.m4_g * _win_back(u, 1, m)))
    else:
        eq3 = 0.0
        for k in range(1, m + 1):
            m2 = np.roll(mom.m2_h, k)
            f2 = _sender_gain_col(cfg.conf_gain, k) ** 2
            u = (cfg.p_s * m2 + cfg.n_0) * m2 / (cfg.p_c * f2)
            eq3 += float(np.sum(a * a * mom.m4_g * u))
    return eq1, eq2, eq3


def af_mu_terms(cfg: NetworkConfig, mom: MomentSet) -> tuple[float, float, float]:
    """Bounded per-network averages (mu1, mu2, mu3) of the expected q-terms.

    E q1 = N(M+1)*mu1, E q2 = N(M+1)^2*mu2, E q3 = N*M*mu3; mu3 is reported
    as 0 when conferencing is disabled.
    """
    eq1, eq2, eq3 = af_expected_q_terms(cfg, mom)
    n = cfg.n_relays
    m = cfg.m_conf
    mu1 = eq1 / (n * (m + 1))
    mu2 = eq2 / (n * (m + 1) ** 2)
    mu3 = eq3 / (n * m) if m >= 1 else 0.0
    return mu1, mu2, mu3


def af_rate_expected_q(cfg: NetworkConfig, mom: MomentSet) -> float:
    """AF rate with every q-term replaced by its expectation."""
    eq1, eq2, eq3 = af_expected_q_terms(cfg, mom)
    sinr = cfg.p_s * cfg.p_r * eq1 * eq1 / ((cfg.p_r * (eq2 + eq3) + 1.0) * cfg.n_0)
    return 0.5 * math.log1p(sinr) / LOG2


def af_rate_asymptotic(cfg: NetworkConfig, mom: MomentSet) -> float:
    """Large-N limit 0.5*log2(1 + N*(mu1^2/mu2)*(p_s/n_0)) of the AF rate.

    The conferencing noise term grows on a smaller order than the forwarded
    receiver noise, so it is dropped here together with the order-one
    destination noise.
    """
    mu1, mu2, _ = af_mu_terms(cfg, mom)
    snr = cfg.n_relays * (mu1 * mu1 / mu2) * cfg.p_s / cfg.n_0
    return 0.5 * math.log1p(snr) / LOG2


def rate_report(real: ChannelRealization, cfg: NetworkConfig,
                mom: MomentSet) -> RateReport:
    """Evaluate every scheme on one realization."""
    relay_rates = df_relay_rates(real, cfg, mom)
    mac = df_mac_rate(real, cfg, mom)
    q1, q2, q3 = af_q_terms(real, cfg, mom)
    sinr = cfg.p_s * cfg.p_r * q1 * q1 / ((cfg.p_r * (q2 + q3) + 1.0) * cfg.n_0)
    return RateReport(
        c_upper=capacity_upper_bound(real, cfg),
        df_relay_rates=relay_rates,
        df_mac_rate=mac,
        df_rate=min(float(np.min(relay_rates)), mac),
        af_q1=q1,
        af_q2=q2,
        af_q3=q3,
        af_rate=0.5 * math.log1p(sinr) / LOG2,
    )
