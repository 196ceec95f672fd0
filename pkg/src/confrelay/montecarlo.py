"""Reproducible trial runner, sweep engine, and signal-level oracles.

Determinism contract
--------------------
Every result is a pure function of its arguments.  The realization used for
trial ``t`` is seeded with ``derive_seed(base_seed, t)``, a SplitMix64-style
mixer, so a run can be sharded across threads in any order and still produce
bit-identical statistics: per-trial rates land in an index-addressed array and
the aggregation always reads that array in index order.

The signal-level oracles validate the closed-form SINR expressions without
using them: they push unit-power symbols and freshly drawn receiver,
conferencing, and destination noise through the literal relaying chain, peel
off the (noise-free) symbol coefficient, and compare measured signal and
noise powers.  Symbols are drawn with constant modulus so the only
statistical error left is in the noise-power estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .model import (
    MASK64,
    ChannelRealization,
    ConfigurationError,
    MomentSet,
    NetworkConfig,
    Portion,
    PreconditionError,
    moments,
    sample_realization,
)
from . import rates

SCHEMES = ("af", "df", "upper")
AXES = ("n_relays", "portion", "conf_snr_db")

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_ORACLE_CHUNK = 16384


def derive_seed(base_seed: int, trial: int) -> int:
    """Mix (base_seed, trial) into a 64-bit realization seed.

    SplitMix64 finalizer over base_seed + GOLDEN*(trial+1); fixed here so
    parallel scheduling can never change which realization a trial sees.
    """
    z = (int(base_seed) + _GOLDEN * (int(trial) + 1)) & MASK64
    z ^= z >> 30
    z = (z * _MIX1) & MASK64
    z ^= z >> 27
    z = (z * _MIX2) & MASK64
    z ^= z >> 31
    return z


# ---------------------------------------------------------------------------
# Point and sweep execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeStats:
    """Mean rate and standard error (sample std / sqrt(trials)) of one scheme."""

    mean_rate: float
    std_error: float
    trials: int


@dataclass(frozen=True, eq=False)
class PointResult:
    """Per-scheme statistics plus per-scheme precondition failures."""

    stats: dict
    errors: dict


@dataclass(frozen=True, eq=False)
class SweepSpec:
    """One swept axis over a base configuration.

    ``axis`` is ``n_relays``, ``portion``, or ``conf_snr_db``; the last sets
    p_c = n_0 * 10^(dB/10) per point.
    """

    base: NetworkConfig
    axis: str
    values: tuple
    trials: int
    base_seed: int
    schemes: tuple = SCHEMES

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigurationError(f"unknown sweep axis {self.axis!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ConfigurationError("sweep needs at least one axis value")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigurationError("axis values must be strictly increasing")
        object.__setattr__(self, "values", vals)
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        schemes = tuple(sorted(set(self.schemes)))
        unknown = [s for s in schemes if s not in SCHEMES]
        if unknown or not schemes:
            raise ConfigurationError(f"schemes must be a nonempty subset of {SCHEMES}")
        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "base_seed", int(self.base_seed) & MASK64)


@dataclass(frozen=True, eq=False)
class SweepPoint:
    """Resolved parameters and results of one sweep point."""

    axis_value: float
    n_relays: int
    m_conf: int
    p_effective: float
    pc_over_n0_db: float
    result: PointResult


@dataclass(frozen=True, eq=False)
class SweepResult:
    """All sweep points, replayable from (axis, base_seed, trials)."""

    axis: str
    points: tuple
    trials: int
    base_seed: int


def scheme_precondition_error(cfg: NetworkConfig, scheme: str) -> Optional[str]:
    """Reason the scheme cannot run under ``cfg``, or None."""
    if scheme not in SCHEMES:
        return f"unknown scheme {scheme!r}"
    if scheme in ("af", "df") and cfg.m_conf >= 1 and cfg.p_c == 0:
        return (f"scheme {scheme!r} needs p_c > 0 when conferencing is "
                f"enabled (M = {cfg.m_conf})")
    return None


def _trial_rates(cfg: NetworkConfig, mom: MomentSet, seed: int,
                 schemes: Sequence[str]) -> dict:
    real = sample_realization(cfg, seed)
    out = {}
    for s in schemes:
        if s == "upper":
            out[s] = rates.capacity_upper_bound(real, cfg)
        elif s == "df":
            out[s] = rates.df_rate(real, cfg, mom)
        else:
            out[s] = rates.af_rate(real, cfg, mom)
    return out


def run_point(cfg: NetworkConfig, trials: int, base_seed: int,
              schemes: Sequence[str] = SCHEMES, workers: int = 1) -> PointResult:
    """Monte Carlo statistics of the requested schemes at one configuration.

    Scheme precondition failures are reported in ``errors`` and do not stop
    the remaining schemes.  Results do not depend on ``workers``.
    """
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    requested = tuple(sorted(set(schemes)))
    errors = {}
    runnable = []
    for s in requested:
        msg = scheme_precondition_error(cfg, s)
        if msg is None:
            runnable.append(s)
        else:
            errors[s] = msg
    stats = {}
    if runnable:
        mom = moments(cfg)
        values = {s: np.empty(trials) for s in runnable}

        def run_block(lo: int, hi: int):
            for t in range(lo, hi):
                for s, r in _trial_rates(cfg, mom, derive_seed(base_seed, t),
                                         runnable).items():
                    values[s][t] = r

        if workers <= 1 or trials == 1:
            run_block(0, trials)
        else:
            block = math.ceil(trials / workers)
            spans = [(lo, min(lo + block, trials))
                     for lo in range(0, trials, block)]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for fut in [pool.submit(run_block, lo, hi) for lo, hi in spans]:
                    fut.result()
        for s in runnable:
            v = values[s]
            if np.all(v == v[0]):
                # Deterministic configurations reproduce the single-shot rate
                # exactly, without summation round-off.
                stats[s] = SchemeStats(mean_rate=float(v[0]), std_error=0.0,
                                       trials=trials)
                continue
            se = float(np.std(v, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
            stats[s] = SchemeStats(mean_rate=float(np.mean(v)), std_error=se,
                                   trials=trials)
    return PointResult(stats=stats, errors=errors)


def apply_axis(base: NetworkConfig, axis: str, value: float) -> NetworkConfig:
    """Configuration at one sweep point."""
    if axis == "n_relays":
        n = int(value)
        if n != value or n < 1:
            raise ConfigurationError(f"n_relays axis values must be positive integers, got {value}")
        return replace(base, n_relays=n)
    if axis == "portion":
        return replace(base, conferencing=Portion(float(value)))
    if axis == "conf_snr_db":
        return replace(base, p_c=base.n_0 * 10.0 ** (float(value) / 10.0))
    raise ConfigurationError(f"unknown sweep axis {axis!r}")


def sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run one point per axis value; all points share the same base seed."""
    points = []
    for v in spec.values:
        cfg = apply_axis(spec.base, spec.axis, v)
        result = run_point(cfg, spec.trials, spec.base_seed, spec.schemes, workers)
        pc_db = (10.0 * math.log10(cfg.p_c / cfg.n_0)
                 if cfg.p_c > 0 else -math.inf)
        points.append(SweepPoint(
            axis_value=v,
            n_relays=cfg.n_relays,
            m_conf=cfg.m_conf,
            p_effective=cfg.p_effective,
            pc_over_n0_db=pc_db,
            result=result,
        ))
    return SweepResult(axis=spec.axis, points=tuple(points),
                       trials=spec.trials, base_seed=spec.base_seed)


# ---------------------------------------------------------------------------
# Signal-level oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    """Empirical SINR, its standard error, and the symbol-draw count."""

    sinr: float
    std_error: float
    draws: int


def _cn_noise(rng: np.random.Generator, shape, level: float) -> np.ndarray:
    """Circularly symmetric complex Gaussian noise of power ``level``."""
    scale = math.sqrt(level / 2.0)
    return rng.normal(0.0, scale, shape) + 1j * rng.normal(0.0, scale, shape)


def _af_destination(real: ChannelRealization, cfg: NetworkConfig,
                    mom: MomentSet, factors: np.ndarray, x: np.ndarray,
                    relay_noise: np.ndarray, conf_noise: np.ndarray,
                    dest_noise: np.ndarray) -> np.ndarray:
    """Literal AF chain: first hop, conference, combine, scale, second hop."""
    m = cfg.m_conf
    first_hop = math.sqrt(cfg.p_s) * real.h[None, :] * x[:, None] + relay_noise
    combined = np.conj(real.h)[None, :] * first_hop
    for k in range(1, m + 1):
        m2_sender = np.roll(mom.m2_h, k)
        f_link = real.f if np.isscalar(real.f) else np.roll(real.f[:, k - 1], k)
        tx_scale = np.sqrt(cfg.p_c / (cfg.p_s * m2_sender + cfg.n_0))
        conf_rx = tx_scale * f_link * np.roll(first_hop, k, axis=1) + conf_noise[:, :, k - 1]
        undo = np.sqrt((cfg.p_s * m2_sender + cfg.n_0) / cfg.p_c) / f_link
        combined = combined + undo * np.conj(np.roll(real.h, k))[None, :] * conf_rx
    relay_tx = factors[None, :] * math.sqrt(cfg.p_r) * np.conj(real.g)[None, :] * combined
    return relay_tx @ real.g + dest_noise


def signal_oracle_af(real: ChannelRealization, cfg: NetworkConfig,
                     mom: MomentSet, symbol_trials: int, seed: int,
                     noise_n0: Optional[float] = None) -> OracleResult:
    """Empirical AF destination SINR from a full signal-path simulation.

    ``noise_n0`` overrides the power of the drawn noise only (the chain's
    normalization constants keep using the configured level); passing 0
    exercises the infinite-SINR guard.
    """
    if symbol_trials < 1:
        raise ConfigurationError("symbol_trials must be >= 1")
    if cfg.m_conf >= 1 and cfg.p_c == 0:
        raise PreconditionError(
            "AF oracle needs p_c > 0 when conferencing is enabled")
    n = cfg.n_relays
    m = cfg.m_conf
    level = cfg.n_0 if noise_n0 is None else float(noise_n0)
    factors = rates.af_power_factors(cfg, mom)
    unit = np.ones(1, dtype=complex)
    zeros_nm = np.zeros((1, n, m), dtype=complex)
    coef = _af_destination(real, cfg, mom, factors, unit,
                           np.zeros((1, n), dtype=complex), zeros_nm,
                           np.zeros(1, dtype=complex))[0]
    signal_power = abs(coef) ** 2
    rng = np.random.default_rng(int(seed) & MASK64)
    w_sum = 0.0
    w_sq_sum = 0.0
    done = 0
    while done < symbol_trials:
        c = min(_ORACLE_CHUNK, symbol_trials - done)
        x = np.exp(2j * np.pi * rng.random(c))
        relay_noise = _cn_noise(rng, (c, n), level)
        conf_noise = (_cn_noise(rng, (c, n, m), level) if m
                      else np.zeros((c, n, 0), dtype=complex))
        dest_noise = _cn_noise(rng, (c,), level)
        y = _af_destination(real, cfg, mom, factors, x, relay_noise,
                            conf_noise, dest_noise)
        w = np.abs(y - coef * x) ** 2
        w_sum += float(np.sum(w))
        w_sq_sum += float(np.sum(w * w))
        done += c
    return _oracle_stats(signal_power, w_sum, w_sq_sum, symbol_trials)


def signal_oracle_df_mac(real: ChannelRealization, cfg: NetworkConfig,
                         mom: MomentSet, symbol_trials: int, seed: int,
                         noise_n0: Optional[float] = None) -> OracleResult:
    """Empirical received SNR of the coherent second hop."""
    if symbol_trials < 1:
        raise ConfigurationError("symbol_trials must be >= 1")
    level = cfg.n_0 if noise_n0 is None else float(noise_n0)
    weights = np.sqrt(cfg.p_r / mom.m2_g) * np.conj(real.g)
    coef = complex(weights @ real.g)
    signal_power = abs(coef) ** 2
    rng = np.random.default_rng(int(seed) & MASK64)
    w_sum = 0.0
    w_sq_sum = 0.0
    done = 0
    while done < symbol_trials:
        c = min(_ORACLE_CHUNK, symbol_trials - done)
        x = np.exp(2j * np.pi * rng.random(c))
        dest_noise = _cn_noise(rng, (c,), level)
        y = (weights[None, :] * x[:, None]) @ real.g + dest_noise
        w = np.abs(y - coef * x) ** 2
        w_sum += float(np.sum(w))
        w_sq_sum += float(np.sum(w * w))
        done += c
    return _oracle_stats(signal_power, w_sum, w_sq_sum, symbol_trials)


def _oracle_stats(signal_power: float, w_sum: float, w_sq_sum: float,
                  draws: int) -> OracleResult:
    noise_power = w_sum / draws
    # Residue far below the double-precision floor of the signal is the
    # chain's own round-off, not simulated noise.
    if noise_power <= signal_power * 1e-25:
        return OracleResult(sinr=math.inf, std_error=0.0, draws=draws)
    sinr = signal_power / noise_power
    var_w = max(w_sq_sum / draws - noise_power * noise_power, 0.0)
    se = sinr * math.sqrt(var_w) / (math.sqrt(draws) * noise_power)
    return OracleResult(sinr=sinr, std_error=se, draws=draws)


def analytic_af_sinr(real: ChannelRealization, cfg: NetworkConfig,
                     mom: MomentSet) -> float:
    """Closed-form AF SINR the oracle is compared against."""
    return rates.af_sinr(real, cfg, mom)


def analytic_df_mac_snr(real: ChannelRealization, cfg: NetworkConfig,
                        mom: MomentSet) -> float:
    """Closed-form second-hop SNR the oracle is compared against."""
    q0 = rates.df_mac_gain(real, cfg, mom)
    return q0 * q0 / cfg.n_0
