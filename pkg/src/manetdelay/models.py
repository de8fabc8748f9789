"""Scenario data model: channel laws, receiver models, and validation.

Everything here is an immutable description of one network scenario.
Samplers take an externally supplied numpy Generator, so instances hold no
mutable state and are safe to share across workers.

Infinite values (diverging exponential moments and the like) are returned
as math.inf, always via an explicit domain check and never as the result
of overflowing arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

INF = math.inf

PATH_LOSS_VARIANTS = ("powerlaw", "maxone", "shifted", "truncated")
FADING_VARIANTS = ("rayleigh", "deterministic", "weibull", "lognormal")
NOISE_VARIANTS = ("zero", "constant", "exponential", "custom")
RECEIVER_VARIANTS = ("bipolar", "ipnr", "mnn", "poisson_grid")


class ConfigError(ValueError):
    """Malformed scenario or sweep input."""


@dataclass(frozen=True)
class PathLoss:
    """Mean path-loss law built on the power law (A*u)**beta.

    variant selects how the pole at u=0 is treated:
      powerlaw   l(u) = (A*u)**beta            (pole of 1/l at 0)
      maxone     l(u) = max(1, (A*u)**beta)
      shifted    l(u) = (A*(u+1))**beta
      truncated  l(u) = (A*max(u, u0))**beta
    """

    variant: str
    A: float = 1.0
    beta: float = 4.0
    u0: float | None = None

    def __post_init__(self):
        if self.variant not in PATH_LOSS_VARIANTS:
            raise ConfigError(f"unknown path-loss variant {self.variant!r}")
        if self.variant == "truncated" and self.u0 is None:
            raise ConfigError("truncated path loss needs u0")

    def __call__(self, u):
        """Attenuation at distance u >= 0 (vectorized)."""
        u = np.asarray(u, dtype=float)
        if self.variant == "powerlaw":
            out = (self.A * u) ** self.beta
        elif self.variant == "maxone":
            out = np.maximum(1.0, (self.A * u) ** self.beta)
        elif self.variant == "shifted":
            out = (self.A * (u + 1.0)) ** self.beta
        else:
            out = (self.A * np.maximum(u, self.u0)) ** self.beta
        return out if out.ndim else float(out)

    @property
    def has_pole(self) -> bool:
        return self.variant == "powerlaw"

    def breakpoints(self):
        """Radii where the law switches branch (quadrature split points)."""
        if self.variant == "maxone":
            return [1.0 / self.A]
        if self.variant == "truncated":
            return [float(self.u0)]
        return []


# ---------------------------------------------------------------------------
# fading laws (virtual power F of one link)

@dataclass(frozen=True)
class RayleighFading:
    """Exponential virtual power with mean 1/mu (Rayleigh amplitude)."""

    mu: float = 1.0

    def mean(self):
        return 1.0 / self.mu

    def tail(self, x):
        return np.exp(-self.mu * np.asarray(x, dtype=float))

    def laplace(self, xi):
        return self.mu / (self.mu + xi)

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.mu, size=size)


@dataclass(frozen=True)
class DeterministicFading:
    """No fading: F identically 1/mu."""

    mu: float = 1.0

    def mean(self):
        return 1.0 / self.mu

    def tail(self, x):
        return np.where(np.asarray(x, dtype=float) < 1.0 / self.mu, 1.0, 0.0)

    def laplace(self, xi):
        return math.exp(-xi / self.mu)

    def sample(self, rng, size=None):
        if size is None:
            return 1.0 / self.mu
        return np.full(size, 1.0 / self.mu)


@dataclass(frozen=True)
class WeibullFading:
    """P(F > x) = exp(-(x/c)**k); heavier than exponential for k < 1."""

    k: float
    c: float = 1.0

    def mean(self):
        return self.c * math.gamma(1.0 + 1.0 / self.k)

    def tail(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return np.exp(-((x / self.c) ** self.k))

    def laplace(self, xi):
        return _laplace_by_quadrature(self.tail, self.mean(), xi)

    def sample(self, rng, size=None):
        return self.c * rng.weibull(self.k, size=size)


@dataclass(frozen=True)
class LogNormalFading:
    """log F is Gaussian with mean m and standard deviation sigma."""

    m: float = 0.0
    sigma: float = 1.0

    def mean(self):
        return math.exp(self.m + self.sigma**2 / 2.0)

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(x) - self.m) / self.sigma
        return np.where(x <= 0.0, 1.0, special.ndtr(-z))

    def log_tail(self, x):
        """log P(F > x), stable far into the tail."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(x) - self.m) / self.sigma
        return np.where(x <= 0.0, 0.0, special.log_ndtr(-z))

    def laplace(self, xi):
        return _laplace_by_quadrature(self.tail, self.mean(), xi)

    def sample(self, rng, size=None):
        return rng.lognormal(self.m, self.sigma, size=size)


def _laplace_by_quadrature(tail, mean, xi):
    """E[exp(-xi F)] = 1 - xi * int_0^inf exp(-xi x) P(F > x) dx."""
    if xi == 0.0:
        return 1.0
    val, _ = integrate.quad(
        lambda x: math.exp(-xi * x) * float(tail(x)),
        0.0, np.inf, epsabs=1e-13, epsrel=1e-9, limit=200,
        points=None,
    )
    return 1.0 - xi * val


FadingModel = RayleighFading | DeterministicFading | WeibullFading | LogNormalFading


# ---------------------------------------------------------------------------
# thermal noise laws

@dataclass(frozen=True)
class ZeroNoise:
    """W identically 0."""

    def mean(self):
        return 0.0

    def laplace(self, xi):
        return 1.0

    def laplace_neg(self, s):
        return 1.0

    def sample(self, rng, size=None):
        return 0.0 if size is None else np.zeros(size)


@dataclass(frozen=True)
class ConstantNoise:
    """W identically w >= 0."""

    w: float

    def mean(self):
        return self.w

    def laplace(self, xi):
        return math.exp(-xi * self.w)

    def laplace_neg(self, s):
        # finite for every s (W is bounded); saturates to the infinite
        # sentinel beyond the float range rather than overflowing
        if s * self.w > 700.0:
            return INF
        return math.exp(s * self.w)

    def sample(self, rng, size=None):
        return self.w if size is None else np.full(size, self.w)


@dataclass(frozen=True)
class ExponentialNoise:
    """Exponential W with rate nu (mean 1/nu)."""

    nu: float

    def mean(self):
        return 1.0 / self.nu

    def laplace(self, xi):
        return self.nu / (self.nu + xi)

    def laplace_neg(self, s):
        # E[exp(sW)] = nu/(nu-s) iff s < nu, else infinite
        if s >= self.nu:
            return INF
        return self.nu / (self.nu - s)

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.nu, size=size)


@dataclass(frozen=True)
class CustomNoise:
    """Noise described by user callbacks.

    tail(x) = P(W > x) and laplace(xi) = E[exp(-xi W)] are required;
    laplace_neg and sampler are optional.  Without laplace_neg the
    exponential moment is integrated numerically with divergence probing.
    """

    tail: Callable[[float], float]
    laplace_fn: Callable[[float], float]
    laplace_neg_fn: Callable[[float], float] | None = None
    sampler: Callable[..., float] | None = None

    def laplace(self, xi):
        return float(self.laplace_fn(xi))

    def laplace_neg(self, s):
        if s == 0.0:
            return 1.0
        if self.laplace_neg_fn is not None:
            return float(self.laplace_neg_fn(s))
        # E[exp(sW)] = 1 + s*int_0^inf exp(sx) P(W > x) dx; probe growing
        # cutoffs and declare divergence on sustained geometric growth.
        total, cut = 0.0, 0.0
        for k in range(1, 40):
            hi = 2.0 ** k
            part, _ = integrate.quad(
                lambda x: math.exp(min(s * x, 700.0)) * float(self.tail(x)),
                cut, hi, epsabs=1e-13, epsrel=1e-9, limit=200)
            total += part
            if part < 1e-12 * max(total, 1e-300):
                return 1.0 + s * total
            if total > 1e150:
                return INF
            cut = hi
        return INF

    def sample(self, rng, size=None):
        if self.sampler is None:
            raise ConfigError("custom noise has no sampler")
        return self.sampler(rng, size)

    def mean(self):
        val, _ = integrate.quad(lambda x: float(self.tail(x)), 0.0, np.inf,
                                epsabs=1e-12, epsrel=1e-9, limit=200)
        return val


NoiseModel = ZeroNoise | ConstantNoise | ExponentialNoise | CustomNoise


def noise_is_trivial(noise) -> bool:
    """True when W is almost surely 0."""
    return isinstance(noise, ZeroNoise) or (
        isinstance(noise, ConstantNoise) and noise.w == 0.0)


# ---------------------------------------------------------------------------
# receivers, time variability, scenario

@dataclass(frozen=True)
class BipolarReceiver:
    """Dedicated receiver at fixed distance r from each transmitter."""

    r: float


@dataclass(frozen=True)
class IpnrReceiver:
    """Nearest point of an independent Poisson receiver set, density lambda0."""

    lambda0: float


@dataclass(frozen=True)
class MnnReceiver:
    """Nearest other network node acts as the receiver."""


@dataclass(frozen=True)
class PoissonGridReceiver:
    """Poisson receivers (density lambda0) plus a square lattice.

    The lattice spacing is kappa*sqrt(2) so every location of the plane has
    a receiver within distance kappa.
    """

    lambda0: float
    kappa: float


ReceiverModel = BipolarReceiver | IpnrReceiver | MnnReceiver | PoissonGridReceiver

FAST, SLOW = "fast", "slow"


@dataclass(frozen=True)
class Variability:
    """Per-slot re-draw (fast) vs frozen-for-all-slots (slow) marks."""

    fading: str = FAST
    noise: str = FAST

    def __post_init__(self):
        for v in (self.fading, self.noise):
            if v not in (FAST, SLOW):
                raise ConfigError(f"variability must be fast|slow, got {v!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of one network scenario.

    lam is the transmitter density, p the per-slot MAC probability and T
    the SINR threshold.  cancel_interference switches the scenario to its
    noise-limited counterpart (interference perfectly canceled).
    """

    lam: float
    p: float
    T: float
    pathloss: PathLoss
    fading: FadingModel
    noise: NoiseModel
    receiver: ReceiverModel
    variability: Variability = field(default_factory=Variability)
    cancel_interference: bool = False

    def link_distance_scale(self) -> float:
        """Median transmitter-to-receiver distance (exact for bipolar)."""
        if isinstance(self.receiver, BipolarReceiver):
            return self.receiver.r
        if isinstance(self.receiver, IpnrReceiver):
            return math.sqrt(math.log(2.0) / (math.pi * self.receiver.lambda0))
        if isinstance(self.receiver, MnnReceiver):
            return math.sqrt(math.log(2.0) / (math.pi * self.lam))
        # Poisson + lattice: never farther than kappa
        lam0 = self.receiver.lambda0
        return min(self.receiver.kappa,
                   math.sqrt(math.log(2.0) / (math.pi * lam0)))


@dataclass(frozen=True)
class Violation:
    """One validation finding; level is 'error' or 'warning'."""

    level: str
    message: str

    @property
    def is_error(self):
        return self.level == "error"


def validate(cfg: ScenarioConfig) -> list[Violation]:
    """Report invariant violations and warnings; empty list means clean."""
    out: list[Violation] = []
    err = lambda m: out.append(Violation("error", m))

    if not cfg.lam > 0:
        err("lambda must be positive")
    if not 0.0 <= cfg.p <= 1.0:
        err("p must lie in [0, 1]")
    if not cfg.T > 0:
        err("T must be positive")

    pl = cfg.pathloss
    if not pl.beta > 2:
        err("beta must exceed 2")
    if not pl.A > 0:
        err("path-loss scale A must be positive")
    if pl.variant == "truncated" and not (pl.u0 or 0) > 0:
        err("truncated path loss needs u0 > 0")

    f = cfg.fading
    if isinstance(f, (RayleighFading, DeterministicFading)) and not f.mu > 0:
        err("fading mu must be positive")
    if isinstance(f, WeibullFading) and not (f.k > 0 and f.c > 0):
        err("Weibull fading needs k > 0 and c > 0")
    if isinstance(f, LogNormalFading) and not f.sigma > 0:
        err("lognormal fading needs sigma > 0")

    n = cfg.noise
    if isinstance(n, ConstantNoise) and n.w < 0:
        err("constant noise must be nonnegative")
    if isinstance(n, ExponentialNoise) and not n.nu > 0:
        err("exponential noise rate nu must be positive")

    r = cfg.receiver
    if isinstance(r, BipolarReceiver) and not r.r > 0:
        err("bipolar receiver distance must be positive")
    if isinstance(r, (IpnrReceiver, PoissonGridReceiver)) and not r.lambda0 > 0:
        err("receiver density lambda0 must be positive")
    if isinstance(r, PoissonGridReceiver) and not r.kappa > 0:
        err("kappa must be positive")

    if isinstance(r, MnnReceiver) and cfg.T <= 1.0:
        out.append(Violation(
            "warning",
            "MNN with T <= 1 allows multiple receptions / simultaneous "
            "emission and reception; the slot engine scores each link's "
            "SINR independently and zeroes slots where the receiver "
            "transmits"))
    return out
