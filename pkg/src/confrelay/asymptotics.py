"""Large-network diagnostics: concentration, scaling fits, convergence traces.

The closed-form rates concentrate around their moment-based limits as the
network grows.  This module certifies that behavior at desk scale: gaps
between sampled rates and their limits are averaged over seeded trials across
an increasing grid of network sizes, and log-linear scaling laws are fitted
by ordinary least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from .model import (
    DistributionSpec,
    MomentSet,
    NetworkConfig,
    ChannelRealization,
    PreconditionError,
    UndefinedRatioError,
    moments,
    sample_channel,
    sample_realization,
    spec_moments,
)
from .montecarlo import derive_seed
from . import rates


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of rate against log2(N)."""

    slope: float
    intercept: float
    residual_rms: float
    points: tuple

    def predict(self, n: int) -> float:
        return self.slope * math.log2(n) + self.intercept


@dataclass(frozen=True)
class ConvergenceTrace:
    """Trial-averaged |rate - limit| per network size."""

    n_values: tuple
    gaps: tuple


@dataclass(frozen=True)
class TracePoint:
    """Per-size summary backing a convergence trace."""

    n_relays: int
    mean_rate: float
    mean_abs_gap: float


class ConferencingNoiseRatio(NamedTuple):
    """Realized q3/q2 plus its moment-based companion E(q3)/E(q2)."""

    realized: float
    expected: float


def lemma1_gap(dist: DistributionSpec, n: int, trials: int, seed: int) -> float:
    """Mean |log2(1 + sum X_i) - log2(1 + sum E X_i)| with X_i = |h_i|^2.

    The per-trial draw seeds derive from ``seed`` through the same mixing
    function used by the Monte Carlo engine.
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must both be >= 1")
    m2, _ = spec_moments(dist, n)
    expected = math.log1p(float(np.sum(m2))) / math.log(2.0)
    total = 0.0
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, t))
        x = np.abs(sample_channel(dist, n, rng)) ** 2
        total += abs(math.log1p(float(np.sum(x))) / math.log(2.0) - expected)
    return total / trials


def scaling_fit(points: Sequence[tuple[int, float]]) -> ScalingFit:
    """Ordinary least squares of rate against log2(N).

    Requires at least three points with distinct network sizes; the points
    are sorted by increasing N in the returned fit.
    """
    pts = sorted((int(n), float(r)) for n, r in points)
    if len(pts) < 3:
        raise ValueError(f"scaling fit needs at least 3 points, got {len(pts)}")
    ns = np.array([p[0] for p in pts], dtype=float)
    if len(np.unique(ns)) != len(ns):
        raise ValueError("scaling fit needs distinct network sizes")
    x = np.log2(ns)
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return ScalingFit(
        slope=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid * resid))),
        points=tuple(pts),
    )


ConfigSource = Union[NetworkConfig, Callable[[int], NetworkConfig]]


def _config_for(template: ConfigSource, n: int) -> NetworkConfig:
    if callable(template):
        return template(n)
    return replace(template, n_relays=n)


def trace_points(scheme: str, template: ConfigSource, n_values: Sequence[int],
                 trials: int, seed: int) -> list[TracePoint]:
    """Mean rate and mean |rate - limit| per network size for one scheme.

    Limits per scheme: ``upper`` and (under i.i.d. fading) ``af`` converge to
    the moment form of the cut-set bound; with complete conferencing the AF
    limit is the per-realization cut-set bound itself; ``df`` converges to
    the smallest per-relay moment-form rate.
    """
    if scheme not in ("af", "df", "upper"):
        raise ValueError(f"unknown scheme {scheme!r}")
    ns = [int(n) for n in n_values]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("network sizes must be strictly increasing")
    out = []
    for n in ns:
        cfg = _config_for(template, n)
        mom = moments(cfg)
        if scheme == "upper":
            fixed_target = rates.capacity_upper_asymptotic(cfg, mom)
        elif scheme == "df":
            fixed_target = float(np.min(rates.df_rates_asymptotic(cfg, mom)))
        elif cfg.m_conf == cfg.n_relays - 1:
            fixed_target = None  # complete conferencing tracks the realized bound
        else:
            fixed_target = rates.capacity_upper_asymptotic(cfg, mom)
        rate_sum = 0.0
        gap_sum = 0.0
        for t in range(trials):
            real = sample_realization(cfg, derive_seed(seed, t))
            if scheme == "upper":
                r = rates.capacity_upper_bound(real, cfg)
            elif scheme == "df":
                r = rates.df_rate(real, cfg, mom)
            else:
                r = rates.af_rate(real, cfg, mom)
            target = fixed_target
            if target is None:
                target = rates.capacity_upper_bound(real, cfg)
            rate_sum += r
            gap_sum += abs(r - target)
        out.append(TracePoint(n_relays=n, mean_rate=rate_sum / trials,
                              mean_abs_gap=gap_sum / trials))
    return out


def convergence_trace(scheme: str, template: ConfigSource,
                      n_values: Sequence[int], trials: int,
                      seed: int) -> ConvergenceTrace:
    """Trial-averaged gap to the scheme's limit across increasing sizes."""
    pts = trace_points(scheme, template, n_values, trials, seed)
    return ConvergenceTrace(
        n_values=tuple(p.n_relays for p in pts),
        gaps=tuple(p.mean_abs_gap for p in pts),
    )


def conferencing_noise_ratio(real: ChannelRealization, cfg: NetworkConfig,
                             mom: MomentSet) -> ConferencingNoiseRatio:
    """Share q3/q2 of conferencing noise relative to forwarded receiver noise.

    Decays as the network grows, which is why low-power conferencing links
    suffice in large networks.
    """
    if cfg.m_conf < 1:
        raise PreconditionError("noise ratio requires at least one conferencing neighbor")
    q1, q2, q3 = rates.af_q_terms(real, cfg, mom)
    del q1
    if q2 == 0.0:
        raise UndefinedRatioError("q2 is zero; the noise ratio is undefined")
    eq1, eq2, eq3 = rates.af_expected_q_terms(cfg, mom)
    del eq1
    return ConferencingNoiseRatio(realized=q3 / q2, expected=eq3 / eq2)
