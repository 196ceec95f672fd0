"""Network model: configuration, fading laws, analytic moments, sampling.

A single source talks to a single destination through ``n_relays`` half-duplex
relays; there is no direct source-destination link.  Relays are indexed
``0 .. n_relays - 1`` and all neighbor arithmetic wraps cyclically: relay
``i`` forwards its first-hop observation to relays ``i+1, ..., i+M`` (mod N)
over out-of-band conferencing links with fixed positive gains.

Receivers on the first hop, the conferencing links, and the second hop all see
additive circularly symmetric complex Gaussian noise at the same spectral
level ``n_0``.  Channel moments are analytic properties of the configured
distributions (the relaying schemes use them as known system constants), never
sample estimates.

Everything here is immutable after construction and
:func:`sample_realization` is a pure function of ``(config, seed)``, so all
objects can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF


class ConfigurationError(ValueError):
    """Invalid network or run configuration."""


class PreconditionError(RuntimeError):
    """A scheme precondition is violated for an otherwise valid configuration."""


class UndefinedRatioError(PreconditionError):
    """A diagnostic ratio has a zero denominator."""


# ---------------------------------------------------------------------------
# Fading distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cscg:
    """Circularly symmetric complex Gaussian with E|h|^2 = variance.

    Real and imaginary parts are independent N(0, variance/2).  The magnitude
    moments are E|h|^2 = variance and E|h|^4 = 2 * variance^2.
    """

    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ConfigurationError(
                f"cscg variance must be positive, got {self.variance}"
            )


@dataclass(frozen=True)
class PointMass:
    """Deterministic channel equal to ``value`` (used for exact fixtures)."""

    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        if abs(self.value) == 0:
            raise ConfigurationError("point_mass value must be nonzero")


@dataclass(frozen=True)
class PerIndex:
    """Independent, non-identical law per relay index."""

    specs: tuple

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))
        if not self.specs:
            raise ConfigurationError("per_index requires at least one entry")
        for s in self.specs:
            if not isinstance(s, (Cscg, PointMass)):
                raise ConfigurationError(
                    "per_index entries must be cscg or point_mass laws"
                )


DistributionSpec = Union[Cscg, PointMass, PerIndex]


def spec_moments(spec: DistributionSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Analytic (E|h|^2, E|h|^4) per index for a channel of length ``n``."""
    if isinstance(spec, Cscg):
        m2 = np.full(n, spec.variance, dtype=float)
        return m2, 2.0 * m2 * m2
    if isinstance(spec, PointMass):
        m2 = np.full(n, abs(spec.value) ** 2, dtype=float)
        return m2, m2 * m2
    if isinstance(spec, PerIndex):
        if len(spec.specs) != n:
            raise ConfigurationError(
                f"per_index length {len(spec.specs)} does not match {n} relays"
            )
        pairs = [spec_moments(s, 1) for s in spec.specs]
        m2 = np.array([p[0][0] for p in pairs])
        m4 = np.array([p[1][0] for p in pairs])
        return m2, m4
    raise ConfigurationError(f"unsupported distribution spec: {spec!r}")


def sample_channel(spec: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` independent complex gains from ``spec``.

    Gaussian entries consume the real components first, then the imaginary
    components, each N(0, variance/2); point masses consume no randomness.
    """
    if isinstance(spec, Cscg):
        scale = math.sqrt(spec.variance / 2.0)
        return rng.normal(0.0, scale, n) + 1j * rng.normal(0.0, scale, n)
    if isinstance(spec, PointMass):
        return np.full(n, spec.value, dtype=complex)
    if isinstance(spec, PerIndex):
        if len(spec.specs) != n:
            raise ConfigurationError(
                f"per_index length {len(spec.specs)} does not match {n} relays"
            )
        out = np.empty(n, dtype=complex)
        for i, s in enumerate(spec.specs):
            out[i] = sample_channel(s, 1, rng)[0]
        return out
    raise ConfigurationError(f"unsupported distribution spec: {spec!r}")


# ---------------------------------------------------------------------------
# Conferencing topology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Portion:
    """Conferencing portion p in (0, 1]; the neighbor count follows from N."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ConfigurationError(
                f"conferencing portion must be in (0, 1], got {self.p}"
            )


@dataclass(frozen=True)
class Neighbors:
    """Explicit conferencing neighbor count M (0 disables conferencing)."""

    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ConfigurationError(f"neighbor count must be >= 0, got {self.m}")


def conferencing_size(p: float, n: int) -> int:
    """Neighbor count M for portion ``p`` of ``n`` relays.

    Rounds p*n half-up and clamps to [0, n-1], so (M+1)/n equals p exactly
    whenever p*n is an integer, and p == 1 always gives complete conferencing
    (M = n - 1).
    """
    if not 0.0 < p <= 1.0:
        raise ConfigurationError(f"conferencing portion must be in (0, 1], got {p}")
    if n < 1:
        raise ConfigurationError(f"number of relays must be >= 1, got {n}")
    m = int(math.floor(p * n + 0.5)) - 1
    return max(0, min(m, n - 1))


def mod_index(i: int, offset: int, n: int) -> int:
    """Cyclic relay index (i + offset) mod n, nonnegative for any offset."""
    if n < 1:
        raise ConfigurationError(f"number of relays must be >= 1, got {n}")
    return (i + offset) % n


# ---------------------------------------------------------------------------
# Configuration and derived objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NetworkConfig:
    """All scalar system parameters of one network instance.

    ``conf_gain`` is either a single positive float (uniform link gain, the
    default) or an (N, M) array whose ``[i, k-1]`` entry is the gain of the
    ordered conferencing link from relay ``i`` to relay ``i+k``.
    """

    n_relays: int
    conferencing: Union[Portion, Neighbors]
    p_s: float = 1.0
    p_r: float = 1.0
    p_c: float = 1.0
    n_0: float = 1.0
    conf_gain: Union[float, np.ndarray] = 1.0
    h_dist: DistributionSpec = Cscg(1.0)
    g_dist: DistributionSpec = Cscg(1.0)

    def __post_init__(self):
        if int(self.n_relays) != self.n_relays or self.n_relays < 1:
            raise ConfigurationError(
                f"n_relays must be a positive integer, got {self.n_relays}"
            )
        object.__setattr__(self, "n_relays", int(self.n_relays))
        if isinstance(self.conferencing, Neighbors):
            if self.conferencing.m > self.n_relays - 1:
                raise ConfigurationError(
                    f"neighbor count {self.conferencing.m} exceeds "
                    f"n_relays - 1 = {self.n_relays - 1}"
                )
        elif not isinstance(self.conferencing, Portion):
            raise ConfigurationError(
                "conferencing must be a Portion or Neighbors value"
            )
        for name in ("p_s", "p_r", "p_c"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be nonnegative")
        if not self.n_0 > 0:
            raise ConfigurationError(f"n_0 must be positive, got {self.n_0}")
        if np.isscalar(self.conf_gain):
            if not self.conf_gain > 0:
                raise ConfigurationError("conf_gain must be positive")
            object.__setattr__(self, "conf_gain", float(self.conf_gain))
        else:
            gains = np.asarray(self.conf_gain, dtype=float)
            if gains.shape != (self.n_relays, self.m_conf):
                raise ConfigurationError(
                    f"conf_gain array must have shape "
                    f"({self.n_relays}, {self.m_conf}), got {gains.shape}"
                )
            if not np.all(gains > 0):
                raise ConfigurationError("conf_gain entries must all be positive")
            gains.flags.writeable = False
            object.__setattr__(self, "conf_gain", gains)
        for label, dist in (("h_dist", self.h_dist), ("g_dist", self.g_dist)):
            if isinstance(dist, PerIndex) and len(dist.specs) != self.n_relays:
                raise ConfigurationError(
                    f"{label} per_index length {len(dist.specs)} does not "
                    f"match {self.n_relays} relays"
                )
            elif not isinstance(dist, (Cscg, PointMass, PerIndex)):
                raise ConfigurationError(f"{label} is not a distribution spec")

    @property
    def m_conf(self) -> int:
        """Derived conferencing neighbor count M."""
        if isinstance(self.conferencing, Neighbors):
            return self.conferencing.m
        return conferencing_size(self.conferencing.p, self.n_relays)

    @property
    def p_effective(self) -> float:
        """Realized conferencing portion (M + 1) / N."""
        return (self.m_conf + 1) / self.n_relays


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Analytic second and fourth magnitude moments per relay index."""

    m2_h: np.ndarray
    m4_h: np.ndarray
    m2_g: np.ndarray
    m4_g: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("m2_h", "m4_h", "m2_g", "m4_g"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            arrays[name] = a
            object.__setattr__(self, name, a)
        n = len(arrays["m2_h"])
        if any(len(a) != n for a in arrays.values()):
            raise ConfigurationError("moment arrays must share one length")
        for name, a in arrays.items():
            if not np.all(a > 0):
                raise ConfigurationError(f"{name} entries must be strictly positive")
        for m2, m4 in ((arrays["m2_h"], arrays["m4_h"]),
                       (arrays["m2_g"], arrays["m4_g"])):
            if not np.all(m4 >= m2 * m2 * (1.0 - 1e-12)):
                raise ConfigurationError("fourth moments must dominate squared second moments")

    @property
    def n(self) -> int:
        return len(self.m2_h)


def moments(config: NetworkConfig) -> MomentSet:
    """Analytic moment set of the configured fading laws."""
    m2_h, m4_h = spec_moments(config.h_dist, config.n_relays)
    m2_g, m4_g = spec_moments(config.g_dist, config.n_relays)
    return MomentSet(m2_h=m2_h, m4_h=m4_h, m2_g=m2_g, m4_g=m4_g)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of all fading coefficients plus the fixed conferencing gains.

    ``h[i]`` is the source-to-relay gain, ``g[i]`` the relay-to-destination
    gain, and ``f`` follows the :class:`NetworkConfig.conf_gain` convention.
    """

    h: np.ndarray
    g: np.ndarray
    f: Union[float, np.ndarray]

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        g = np.asarray(self.g, dtype=complex)
        if h.shape != g.shape or h.ndim != 1:
            raise ConfigurationError("h and g must be 1-D arrays of equal length")
        h.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        if np.isscalar(self.f):
            if not self.f > 0:
                raise ConfigurationError("conferencing gain must be positive")
            object.__setattr__(self, "f", float(self.f))
        else:
            f = np.asarray(self.f, dtype=float)
            if f.ndim != 2 or f.shape[0] != len(h) or not np.all(f > 0):
                raise ConfigurationError(
                    "conferencing gain array must be (N, M) with positive entries"
                )
            f.flags.writeable = False
            object.__setattr__(self, "f", f)

    @property
    def n(self) -> int:
        return len(self.h)


def sample_realization(config: NetworkConfig, seed: int) -> ChannelRealization:
    """Deterministically draw one channel realization.

    The generator is seeded with the 64-bit value of ``seed``; the first-hop
    gains are drawn before the second-hop gains, and conferencing gains are
    copied from the configuration (they are deterministic constants).
    """
    rng = np.random.default_rng(int(seed) & MASK64)
    h = sample_channel(config.h_dist, config.n_relays, rng)
    g = sample_channel(config.g_dist, config.n_relays, rng)
    return ChannelRealization(h=h, g=g, f=config.conf_gain)
