"""Mean local delays: closed forms, quadrature routes, and phase rules.

All delay formulas assume the per-slot success law of an exponential
(Rayleigh) virtual power, so the conditional success probability factors
into a MAC term, a noise term and an interference product.  The noise and
interference factors are exposed separately; the mean-delay operations
combine them with the receiver-distance law of the chosen receiver model.

Infinity is always the result of an explicit threshold check (math.inf),
never of overflowing arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .models import (
    INF,
    BipolarReceiver,
    ConstantNoise,
    CustomNoise,
    DeterministicFading,
    ExponentialNoise,
    FAST,
    IpnrReceiver,
    LogNormalFading,
    MnnReceiver,
    PathLoss,
    PoissonGridReceiver,
    RayleighFading,
    ScenarioConfig,
    SLOW,
    WeibullFading,
    ZeroNoise,
    noise_is_trivial,
)
from .quadrature import QuadratureError, quad_checked, reciprocal_power_tail

FINITE, INFINITE, INDETERMINATE = "finite", "infinite", "indeterminate"

CLOSED_FORM, QUADRATURE, THRESHOLD_RULE = "closed_form", "quadrature", "threshold_rule"


class UnsupportedModelError(ValueError):
    """The requested operation has no formula for this model combination."""


class NoAnalyticRuleError(UnsupportedModelError):
    """phase_classify has no covered rule; fall back to simulation."""


class DegenerateRateError(ValueError):
    """Shannon rate integral diverges (delay would be 0)."""


@dataclass(frozen=True)
class DelayValue:
    """A mean local delay: value may be math.inf (explicit divergence)."""

    value: float
    method: str
    abs_error: float = 0.0

    @property
    def is_infinite(self):
        return math.isinf(self.value)

    @classmethod
    def infinite(cls):
        return cls(INF, THRESHOLD_RULE, 0.0)


@dataclass(frozen=True)
class PhaseVerdict:
    """Finite/infinite classification with the governing inequality sides."""

    verdict: str
    threshold_lhs: float
    threshold_rhs: float
    rule: str


# ---------------------------------------------------------------------------
# building blocks

def contention_constant(beta):
    """Spatial contention constant 2*pi^2 / (beta*sin(2*pi/beta)), beta > 2.

    Equivalently (2*pi/beta)*Gamma(2/beta)*Gamma(1-2/beta); diverges as
    beta -> 2+.
    """
    if beta <= 2:
        raise ValueError("contention constant needs beta > 2")
    return 2.0 * math.pi**2 / (beta * math.sin(2.0 * math.pi / beta))


def contention_coefficient(p, T, beta):
    """Quadratic growth rate of the interference exponent per unit density.

    p * (1-p)**(2/beta - 1) * T**(2/beta) * K(beta); increasing in p and T,
    infinite at p = 1.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return INF
    return p * (1.0 - p) ** (2.0 / beta - 1.0) * T ** (2.0 / beta) \
        * contention_constant(beta)


def high_mobility_coefficient(p, T, beta):
    """Same growth rate when the interferer set is re-drawn every slot.

    p * T**(2/beta) * K(beta): strictly below contention_coefficient for
    p in (0, 1) because averaging happens before inversion.
    """
    if p == 0.0:
        return 0.0
    return p * T ** (2.0 / beta) * contention_constant(beta)


def noise_factor(s, noise, noise_variability):
    """Noise contribution to the inverse success probability at exponent s.

    Slow noise: E[exp(sW)] (may be math.inf).  Fast noise: 1/E[exp(-sW)].
    Equals 1 at s = 0 and for zero noise.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0.0 or noise_is_trivial(noise):
        return 1.0
    if noise_variability == SLOW:
        return noise.laplace_neg(s)
    return 1.0 / noise.laplace(s)


def _power_tail_start(a, w, b):
    # lower integration limit of the reciprocal power tail, a**2 * w**(-1/b)
    return a * a * w ** (-1.0 / b)


def interference_tail_integral(a, w, b):
    """int over u >= a^2 w^(-1/b) of du/(1+u^b); nonincreasing in a, b > 1."""
    if b <= 1:
        raise ValueError("need b > 1")
    if w <= 0:
        raise ValueError("need w > 0")
    return reciprocal_power_tail(_power_tail_start(a, w, b), b)


def empty_ball_arc_integral(w, b):
    """Arc average of the tail integral over the empty-ball exclusion wedge.

    int_{-pi/2}^{pi/2} of interference_tail_integral(2cos(theta), w, b);
    lies strictly between 0 and pi * interference_tail_integral(0, w, b).
    """
    if b <= 1:
        raise ValueError("need b > 1")
    val, _ = quad_checked(
        lambda th: reciprocal_power_tail(
            _power_tail_start(2.0 * math.cos(th), w, b), b),
        0.0, math.pi / 2.0, rtol=1e-10)
    return 2.0 * val


def interference_exponent_inr(s, lam, p, pathloss: PathLoss):
    """Exponent of the mean inverse interference factor at a Poisson receiver.

    2*pi*lam * int_0^inf p*s*v / (l(v) + (1-p)*s) dv.  Closed form for the
    pure power law; quadrature with branch splits otherwise.  Infinite for
    p = 1 with a path-loss pole at 0.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0.0 or p == 0.0 or lam == 0.0:
        return 0.0
    beta = pathloss.beta
    if p == 1.0 and pathloss.has_pole:
        return INF
    if pathloss.variant == "powerlaw":
        if p == 1.0:
            return INF
        return lam * p * (1.0 - p) ** (2.0 / beta - 1.0) \
            * s ** (2.0 / beta) * contention_constant(beta) / pathloss.A**2
    c = (1.0 - p) * s

    def integrand(v):
        lv = pathloss(v)
        return p * s * v / (lv + c)

    val, _ = quad_checked(integrand, 0.0, np.inf,
                          points=pathloss.breakpoints(), rtol=1e-10)
    return 2.0 * math.pi * lam * val


def interference_factor_inr(s, lam, p, pathloss: PathLoss):
    """exp of interference_exponent_inr, >= 1 (math.inf when diverging)."""
    e = interference_exponent_inr(s, lam, p, pathloss)
    if math.isinf(e):
        return INF
    if e > 700.0:
        raise QuadratureError(f"interference factor exponent {e:.3g} exceeds "
                              f"the floating-point range")
    return math.exp(e)


def interference_exponent_mnn(r, s, lam, p, pathloss: PathLoss):
    """Exponent of the MNN interference factor with an empty ball of radius r.

    Half the Poisson-receiver exponent plus the wedge term that reinstates
    interferers beyond 2*r*cos(theta); sandwiched between half and all of
    interference_exponent_inr(s).
    """
    if r <= 0:
        raise ValueError("r must be positive")
    half = interference_exponent_inr(s, lam, p, pathloss)
    if half == 0.0:
        return 0.0
    if math.isinf(half):
        return INF
    half *= 0.5
    beta = pathloss.beta
    if pathloss.variant == "powerlaw":
        w = (1.0 - p) * s
        pref = lam * p * (1.0 - p) ** (2.0 / beta - 1.0) \
            * s ** (2.0 / beta) / (2.0 * pathloss.A**2)

        def h_of_theta(th):
            a2 = (2.0 * pathloss.A * r * math.cos(th)) ** 2 * w ** (-2.0 / beta)
            return reciprocal_power_tail(a2, beta / 2.0)

        arc, _ = quad_checked(h_of_theta, 0.0, math.pi / 2.0, rtol=1e-10)
        return half + pref * 2.0 * arc
    c = (1.0 - p) * s

    def inner(th):
        lo = 2.0 * r * math.cos(th)
        val, _ = quad_checked(
            lambda v: p * s * v / (pathloss(v) + c), lo, np.inf,
            points=pathloss.breakpoints(), rtol=1e-9)
        return val

    arc, _ = quad_checked(inner, 0.0, math.pi / 2.0, rtol=1e-8)
    return half + lam * 2.0 * arc


def interference_factor_mnn(r, s, lam, p, pathloss: PathLoss):
    """MNN interference factor; obeys sqrt(D_inr) <= D_mnn <= D_inr."""
    e = interference_exponent_mnn(r, s, lam, p, pathloss)
    if math.isinf(e):
        return INF
    if e > 700.0:
        raise QuadratureError(f"interference factor exponent {e:.3g} exceeds "
                              f"the floating-point range")
    return math.exp(e)


def mean_interference_exponent(s, lam, p, pathloss: PathLoss, lower=0.0):
    """Exponent of the mean interference product over nodes beyond `lower`.

    2*pi*lam*p * int_lower^inf s*u / (l(u) + s) du.  With lower = 0 this is
    the unconditional (space-time averaged) exponent used by the
    high-mobility formula; with lower = R it is the expected beyond-window
    attenuation used to de-bias truncated simulations.
    """
    if s <= 0.0 or p == 0.0 or lam == 0.0:
        return 0.0
    beta = pathloss.beta
    closed = pathloss.variant == "powerlaw" or (
        pathloss.variant in ("maxone", "truncated")
        and lower >= max(pathloss.breakpoints() or [0.0]))
    if closed:
        x0 = (pathloss.A * lower) ** 2 * s ** (-2.0 / beta)
        tail = reciprocal_power_tail(x0, beta / 2.0)
        return math.pi * lam * p * s ** (2.0 / beta) * tail / pathloss.A**2
    val, _ = quad_checked(lambda u: s * u / (pathloss(u) + s), lower, np.inf,
                          points=pathloss.breakpoints(), rtol=1e-9)
    return 2.0 * math.pi * lam * p * val


# ---------------------------------------------------------------------------
# noise growth classes (for divergence pre-checks of the r-integrals)

_POLY, _EXP_BETA, _DIVERGES, _UNKNOWN = "poly", "exp_beta", "diverges", "unknown"


def _noise_growth(cfg: ScenarioConfig):
    """How noise_factor(mu*T*l(r)) grows as r -> inf (l is unbounded)."""
    noise, slow = cfg.noise, cfg.variability.noise == SLOW
    if noise_is_trivial(noise):
        return _POLY
    if isinstance(noise, ConstantNoise):
        # exp(s*w) and 1/exp(-s*w) both grow like exp(w*mu*T*l(r))
        return _EXP_BETA
    if isinstance(noise, ExponentialNoise):
        if slow:
            # E[exp(sW)] has a pole at s = nu; some receiver distances
            # exceed it, so the spatial average diverges outright
            return _DIVERGES
        return _POLY  # 1/L_W(s) = 1 + s/nu
    return _UNKNOWN


def _require_fast_rayleigh(cfg, op):
    if not isinstance(cfg.fading, RayleighFading):
        raise UnsupportedModelError(f"{op} needs Rayleigh fading")
    if cfg.variability.fading != FAST:
        raise UnsupportedModelError(
            f"{op} needs fast fading (slow fading freezes the outage state; "
            f"see phase_classify)")


def _mu(cfg):
    return cfg.fading.mu


# ---------------------------------------------------------------------------
# mean delays

def mean_delay_bipolar(cfg: ScenarioConfig) -> DelayValue:
    """Mean local delay in the bipolar model with fast Rayleigh fading.

    (1/p) * noise factor at mu*T*l(r) * interference factor at T*l(r).
    """
    _require_fast_rayleigh(cfg, "mean_delay_bipolar")
    if not isinstance(cfg.receiver, BipolarReceiver):
        raise UnsupportedModelError("mean_delay_bipolar needs a bipolar receiver")
    if cfg.p == 0.0:
        return DelayValue.infinite()
    s_int = cfg.T * float(cfg.pathloss(cfg.receiver.r))
    dw = noise_factor(_mu(cfg) * s_int, cfg.noise, cfg.variability.noise)
    if math.isinf(dw):
        return DelayValue.infinite()
    if cfg.cancel_interference:
        return DelayValue(dw / cfg.p, CLOSED_FORM)
    di = interference_factor_inr(s_int, cfg.lam, cfg.p, cfg.pathloss)
    if math.isinf(di):
        return DelayValue.infinite()
    method = CLOSED_FORM if cfg.pathloss.variant == "powerlaw" else QUADRATURE
    return DelayValue(dw * di / cfg.p, method)


def _outer_delay_quadrature(cfg, lam0, log_factor, prefactor,
                            divergence_hint=None):
    """(prefactor) * int 2*pi*lam0 * r * exp(-pi*lam0*r^2 + log_factor(r)) dr.

    log_factor(r) is the log of the noise-times-interference factor (kept
    in log space so huge factors under a dead Gaussian cannot overflow).
    When the closed-form pre-checks cannot settle divergence, partial
    integrals over doubling windows are probed before trusting the
    quadrature.
    """
    def integrand(r):
        gauss = -math.pi * lam0 * r * r
        if gauss < -745.0 or r == 0.0:
            return 0.0
        expo = gauss + log_factor(r)
        return 2.0 * math.pi * lam0 * r * math.exp(min(expo, 700.0))

    if divergence_hint is None:
        # probe doubling windows for geometric growth
        total, lo, streak = 0.0, 0.0, 0
        partials = []
        for k in range(18):
            hi = 2.0 ** k
            part, _ = integrate.quad(integrand, lo, hi, limit=200, epsrel=1e-9)
            total += part
            partials.append(total)
            if len(partials) >= 2 and partials[-2] > 0:
                streak = streak + 1 if total > 1.5 * partials[-2] else 0
                if streak >= 3:
                    return DelayValue.infinite()
                if abs(total - partials[-2]) <= 1e-10 * abs(total):
                    return DelayValue(prefactor * total, QUADRATURE,
                                      abs(prefactor) * 1e-9 * abs(total))
            lo = hi
        raise QuadratureError(
            "outer delay integral neither settled nor clearly diverged",
            value=prefactor * total)
    val, err = quad_checked(integrand, 0.0, np.inf, rtol=1e-9,
                            points=cfg.pathloss.breakpoints())
    return DelayValue(prefactor * val, QUADRATURE, prefactor * err)


def mean_delay_ipnr(cfg: ScenarioConfig) -> DelayValue:
    """Mean local delay with nearest independent Poisson receivers."""
    _require_fast_rayleigh(cfg, "mean_delay_ipnr")
    if not isinstance(cfg.receiver, IpnrReceiver):
        raise UnsupportedModelError("mean_delay_ipnr needs an IPNR receiver")
    if cfg.cancel_interference:
        return mean_delay_noise_limited(cfg)
    if cfg.p == 0.0:
        return DelayValue.infinite()
    lam0, beta = cfg.receiver.lambda0, cfg.pathloss.beta

    growth = _noise_growth(cfg)
    if growth in (_EXP_BETA, _DIVERGES):
        # noise factor grows like exp(l(r)) ~ exp(r^beta) with beta > 2,
        # or has a pole at finite r: the Rayleigh race is lost
        return DelayValue.infinite()

    theta = contention_coefficient(cfg.p, cfg.T, beta)
    if math.pi * lam0 <= cfg.lam * theta:
        return DelayValue.infinite()

    mu = _mu(cfg)
    trivial_noise = noise_is_trivial(cfg.noise)
    if trivial_noise and cfg.pathloss.variant == "powerlaw":
        value = (1.0 / cfg.p) * math.pi * lam0 / (math.pi * lam0 - cfg.lam * theta)
        return DelayValue(value, CLOSED_FORM)

    def log_factor(r):
        s = cfg.T * float(cfg.pathloss(r))
        dw = noise_factor(mu * s, cfg.noise, cfg.variability.noise)
        return math.log(dw) + interference_exponent_inr(s, cfg.lam, cfg.p,
                                                        cfg.pathloss)

    hint = FINITE if growth == _POLY else None
    return _outer_delay_quadrature(cfg, lam0, log_factor, 1.0 / cfg.p,
                                   divergence_hint=hint)


def mnn_contention_coefficient(p, T, beta):
    """Exact MNN growth rate: p(1-p)^(2/beta-1) T^(2/beta) (K + J)/2.

    Compared against pi in the MNN phase rule; lies between half and all
    of contention_coefficient by the interference sandwich.
    """
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return INF
    k = contention_constant(beta)
    j = empty_ball_arc_integral(T * (1.0 - p), beta / 2.0)
    return p * (1.0 - p) ** (2.0 / beta - 1.0) * T ** (2.0 / beta) * (k + j) / 2.0


def mean_delay_mnn(cfg: ScenarioConfig) -> DelayValue:
    """Mean local delay when the receiver is the nearest other node."""
    _require_fast_rayleigh(cfg, "mean_delay_mnn")
    if not isinstance(cfg.receiver, MnnReceiver):
        raise UnsupportedModelError("mean_delay_mnn needs the MNN receiver")
    if cfg.cancel_interference:
        return mean_delay_noise_limited(cfg)
    if cfg.p in (0.0, 1.0):
        return DelayValue.infinite()
    beta = cfg.pathloss.beta

    growth = _noise_growth(cfg)
    if growth in (_EXP_BETA, _DIVERGES):
        return DelayValue.infinite()

    coeff = mnn_contention_coefficient(cfg.p, cfg.T, beta)
    if coeff >= math.pi:
        return DelayValue.infinite()

    mu = _mu(cfg)
    prefactor = 1.0 / (cfg.p * (1.0 - cfg.p))
    if noise_is_trivial(cfg.noise) and cfg.pathloss.variant == "powerlaw":
        value = prefactor * math.pi / (math.pi - coeff)
        return DelayValue(value, CLOSED_FORM)

    def log_factor(r):
        s = cfg.T * float(cfg.pathloss(r))
        dw = noise_factor(mu * s, cfg.noise, cfg.variability.noise)
        return math.log(dw) + interference_exponent_mnn(r, s, cfg.lam, cfg.p,
                                                        cfg.pathloss)

    hint = FINITE if growth == _POLY else None
    return _outer_delay_quadrature(cfg, cfg.lam, log_factor, prefactor,
                                   divergence_hint=hint)


def _log_success_given_distance(cfg, mu):
    """r -> log per-transmission success probability, interference canceled.

    Rayleigh fading uses the noise transform; constant noise supports any
    fading law through its tail.  Returns (callable, divergence verdict).
    """
    fading, noise = cfg.fading, cfg.noise

    if noise_is_trivial(noise):
        return (lambda r: 0.0), FINITE

    if isinstance(fading, RayleighFading):
        if isinstance(noise, ConstantNoise):
            return (lambda r: -mu * cfg.T * float(cfg.pathloss(r)) * noise.w), \
                INFINITE
        if isinstance(noise, ExponentialNoise) and cfg.variability.noise == FAST:
            return (lambda r: math.log(
                noise.laplace(mu * cfg.T * float(cfg.pathloss(r))))), FINITE
        if isinstance(noise, CustomNoise) and cfg.variability.noise == FAST:
            return (lambda r: math.log(
                noise.laplace(mu * cfg.T * float(cfg.pathloss(r))))), None
        raise UnsupportedModelError(
            "noise-limited delay needs fast noise (Rayleigh) or constant noise")

    if not isinstance(noise, ConstantNoise):
        raise UnsupportedModelError(
            "noise-limited delay with non-Rayleigh fading needs constant noise")
    w = noise.w

    if isinstance(fading, WeibullFading):
        rate = fading.k * cfg.pathloss.beta
        if rate < 2.0:
            verdict = FINITE
        elif rate > 2.0:
            verdict = INFINITE
        else:
            scale = (cfg.T * w / fading.c) ** fading.k * cfg.pathloss.A**2
            lam0 = _receiver_density(cfg)
            verdict = FINITE if scale < math.pi * lam0 else INFINITE
        return (lambda r: -(cfg.T * float(cfg.pathloss(r)) * w / fading.c)
                ** fading.k), verdict

    if isinstance(fading, LogNormalFading):
        return (lambda r: float(
            fading.log_tail(cfg.T * float(cfg.pathloss(r)) * w))), FINITE

    if isinstance(fading, DeterministicFading):
        # success needs T*l(r)*w < 1/mu; l is unbounded so some receiver
        # distances never succeed
        return (lambda r: 0.0 if cfg.T * float(cfg.pathloss(r)) * w
                < 1.0 / fading.mu else -INF), INFINITE

    raise UnsupportedModelError("unsupported fading law")


def _receiver_density(cfg):
    if isinstance(cfg.receiver, (IpnrReceiver, PoissonGridReceiver)):
        return cfg.receiver.lambda0
    if isinstance(cfg.receiver, MnnReceiver):
        return cfg.lam
    raise UnsupportedModelError("nearest-receiver model required")


def mean_delay_noise_limited(cfg: ScenarioConfig) -> DelayValue:
    """Mean local delay with interference perfectly canceled.

    2*pi*lam0 * int r exp(-pi*lam0*r^2) / (p * success(r)) dr over the
    nearest-receiver distance law.
    """
    if cfg.p == 0.0:
        return DelayValue.infinite()
    lam0 = _receiver_density(cfg)
    mu = getattr(cfg.fading, "mu", 1.0)
    log_success, verdict = _log_success_given_distance(cfg, mu)

    if noise_is_trivial(cfg.noise):
        return DelayValue(1.0 / cfg.p, CLOSED_FORM)
    if verdict == INFINITE:
        return DelayValue.infinite()

    hint = FINITE if verdict == FINITE else None
    return _outer_delay_quadrature(cfg, lam0, lambda r: -log_success(r),
                                   1.0 / cfg.p, divergence_hint=hint)


def mean_delay_high_mobility_ipnr(cfg: ScenarioConfig) -> DelayValue:
    """IPNR delay when the transmitter set is re-sampled every slot.

    The interference enters through the unconditional transform, so the
    growth rate drops from contention_coefficient to
    high_mobility_coefficient; never larger than mean_delay_ipnr.
    """
    _require_fast_rayleigh(cfg, "mean_delay_high_mobility_ipnr")
    if not isinstance(cfg.receiver, IpnrReceiver):
        raise UnsupportedModelError("needs an IPNR receiver")
    if cfg.variability.noise != FAST:
        raise UnsupportedModelError("high-mobility formula assumes fast noise")
    if cfg.p == 0.0:
        return DelayValue.infinite()
    if cfg.cancel_interference:
        return mean_delay_noise_limited(cfg)
    lam0, beta, mu = cfg.receiver.lambda0, cfg.pathloss.beta, _mu(cfg)

    if _noise_growth(cfg) == _EXP_BETA:
        return DelayValue.infinite()
    theta1 = high_mobility_coefficient(cfg.p, cfg.T, beta)
    if math.pi * lam0 <= cfg.lam * theta1:
        return DelayValue.infinite()

    if noise_is_trivial(cfg.noise) and cfg.pathloss.variant == "powerlaw":
        value = (1.0 / cfg.p) * math.pi * lam0 / (math.pi * lam0 - cfg.lam * theta1)
        return DelayValue(value, CLOSED_FORM)

    def log_factor(r):
        s = cfg.T * float(cfg.pathloss(r))
        dw = noise_factor(mu * s, cfg.noise, FAST)
        return math.log(dw) + mean_interference_exponent(s, cfg.lam, cfg.p,
                                                         cfg.pathloss)

    return _outer_delay_quadrature(cfg, lam0, log_factor, 1.0 / cfg.p,
                                   divergence_hint=FINITE)


def mean_delay_bounded_receiver(cfg: ScenarioConfig) -> DelayValue:
    """Delay with Poisson + lattice receivers (distance capped at kappa).

    The nearest-distance law is the Poisson law truncated at kappa with an
    atom absorbing the residual mass; the lattice guarantees the cap.
    Finite whenever the noise factor is finite on [0, kappa].
    """
    _require_fast_rayleigh(cfg, "mean_delay_bounded_receiver")
    if not isinstance(cfg.receiver, PoissonGridReceiver):
        raise UnsupportedModelError("needs the Poisson + lattice receiver")
    if cfg.p == 0.0:
        return DelayValue.infinite()
    lam0, kappa, mu = cfg.receiver.lambda0, cfg.receiver.kappa, _mu(cfg)

    def factor(r):
        s = cfg.T * float(cfg.pathloss(r))
        dw = noise_factor(mu * s, cfg.noise, cfg.variability.noise)
        if math.isinf(dw):
            return INF
        if cfg.cancel_interference:
            return dw
        e = interference_exponent_inr(s, cfg.lam, cfg.p, cfg.pathloss)
        if math.isinf(e) or e > 700.0:
            return INF
        return dw * math.exp(e)

    edge = factor(kappa)
    if math.isinf(edge):
        return DelayValue.infinite()

    def integrand(r):
        return 2.0 * math.pi * lam0 * r * math.exp(-math.pi * lam0 * r * r) \
            * factor(r)

    val, err = quad_checked(integrand, 0.0, kappa, rtol=1e-9,
                            points=[b for b in cfg.pathloss.breakpoints()
                                    if b < kappa])
    atom = math.exp(-math.pi * lam0 * kappa * kappa)
    value = (val + atom * edge) / cfg.p
    return DelayValue(value, QUADRATURE, err / cfg.p)


def shannon_delay_interference_free(r, mu, w, p, pathloss: PathLoss) -> DelayValue:
    """Adaptive-coding delay over an interference-free link: 1/(p e^a E1(a)).

    a = mu * w * l(r) with constant noise w > 0; the SINR-threshold
    variable is integrated out, so no T appears.
    """
    if w <= 0.0:
        raise DegenerateRateError(
            "zero noise and no interference: the rate integral diverges "
            "and the delay degenerates to 0")
    if p == 0.0:
        return DelayValue.infinite()
    a = mu * w * float(pathloss(r))
    if a == 0.0:
        raise DegenerateRateError("vanishing noise exponent: infinite rate")
    if a <= 600.0:
        scaled = math.exp(a) * float(special.exp1(a))
    else:
        inv = 1.0 / a
        scaled = inv * (1.0 - inv * (1.0 - 2.0 * inv * (1.0 - 3.0 * inv)))
    return DelayValue(1.0 / (p * scaled), CLOSED_FORM)


def mean_delay(cfg: ScenarioConfig) -> DelayValue:
    """Dispatch to the mean-delay formula matching the receiver model."""
    if cfg.cancel_interference and isinstance(cfg.receiver,
                                              (IpnrReceiver, MnnReceiver)):
        return mean_delay_noise_limited(cfg)
    if isinstance(cfg.receiver, BipolarReceiver):
        return mean_delay_bipolar(cfg)
    if isinstance(cfg.receiver, IpnrReceiver):
        return mean_delay_ipnr(cfg)
    if isinstance(cfg.receiver, MnnReceiver):
        return mean_delay_mnn(cfg)
    return mean_delay_bounded_receiver(cfg)


# ---------------------------------------------------------------------------
# phase classification

def _outage_freeze_probability(cfg):
    """P(W*T*l(r) > F) for a frozen fading/noise state (bipolar)."""
    s = cfg.T * float(cfg.pathloss(cfg.receiver.r))
    fading, noise = cfg.fading, cfg.noise
    if noise_is_trivial(noise):
        return 0.0
    if isinstance(noise, ConstantNoise):
        x = noise.w * s
        if isinstance(fading, DeterministicFading):
            return 1.0 if x > 1.0 / fading.mu else 0.0
        return 1.0 - float(fading.tail(x))
    if isinstance(noise, ExponentialNoise):
        # W has unbounded support, so any finite fading loses with
        # positive probability
        return 1.0 - float(
            integrate.quad(lambda t: float(fading.tail(t * s))
                           * noise.nu * math.exp(-noise.nu * t),
                           0.0, np.inf, limit=200)[0])
    return 1.0


def _fading_static(cfg):
    return cfg.variability.fading == SLOW or isinstance(cfg.fading,
                                                        DeterministicFading)


def _noise_static(cfg):
    return cfg.variability.noise == SLOW or isinstance(
        cfg.noise, (ZeroNoise, ConstantNoise))


def _classify_noise_limited(cfg) -> PhaseVerdict:
    lam0 = _receiver_density(cfg)
    fading, noise = cfg.fading, cfg.noise
    if noise_is_trivial(noise):
        return PhaseVerdict(FINITE, 0.0, math.pi * lam0, "noise-limited-trivial")
    if isinstance(fading, RayleighFading):
        if isinstance(noise, ConstantNoise):
            return PhaseVerdict(INFINITE, cfg.pathloss.beta, 2.0, "noise-tail-race")
        if isinstance(noise, ExponentialNoise) and cfg.variability.noise == FAST:
            return PhaseVerdict(FINITE, 0.0, INF, "rational-noise-transform")
        raise NoAnalyticRuleError("no noise-limited rule for this noise law")
    if not isinstance(noise, ConstantNoise):
        raise NoAnalyticRuleError("non-Rayleigh noise-limited rules need "
                                  "constant noise")
    if isinstance(fading, WeibullFading):
        rate = fading.k * cfg.pathloss.beta
        if rate != 2.0:
            verdict = FINITE if rate < 2.0 else INFINITE
            return PhaseVerdict(verdict, rate, 2.0, "weibull-tail-race")
        scale = (cfg.T * noise.w / fading.c) ** fading.k * cfg.pathloss.A**2
        verdict = FINITE if scale < math.pi * lam0 else INFINITE
        return PhaseVerdict(verdict, scale, math.pi * lam0, "weibull-tail-race")
    if isinstance(fading, LogNormalFading):
        return PhaseVerdict(FINITE, 0.0, 2.0, "lognormal-tail-race")
    if isinstance(fading, DeterministicFading):
        verdict = INFINITE if noise.w > 0 else FINITE
        return PhaseVerdict(verdict, noise.w, 0.0, "deterministic-fading-outage")
    raise NoAnalyticRuleError("unsupported fading law")


def phase_classify(cfg: ScenarioConfig) -> PhaseVerdict:
    """Finite/infinite verdict for the spatial mean local delay.

    Covers: the bipolar noise-moment rule, the IPNR contention threshold
    (power-law and pole-free variants), the exact MNN rule and its bound
    band, the slow-fading freeze rule, noise tail races, and the bounded
    receiver model.  Raises NoAnalyticRuleError for anything else.
    """
    if cfg.p == 0.0:
        return PhaseVerdict(INFINITE, cfg.p, 0.0, "mac-off")

    if isinstance(cfg.receiver, BipolarReceiver):
        if _fading_static(cfg):
            if _noise_static(cfg):
                q = _outage_freeze_probability(cfg)
                if q > 0.0:
                    return PhaseVerdict(INFINITE, q, 0.0, "slow-fading-freeze")
            raise NoAnalyticRuleError(
                "frozen fading with no blocking mass: no analytic rule")
        if not isinstance(cfg.fading, RayleighFading):
            raise NoAnalyticRuleError("bipolar rules need Rayleigh fading")
        s = _mu(cfg) * cfg.T * float(cfg.pathloss(cfg.receiver.r))
        if cfg.variability.noise == SLOW and isinstance(cfg.noise, ExponentialNoise):
            verdict = FINITE if s < cfg.noise.nu else INFINITE
            return PhaseVerdict(verdict, s, cfg.noise.nu,
                                "bipolar-noise-moment")
        if cfg.variability.noise == SLOW and isinstance(cfg.noise, CustomNoise):
            dn = cfg.noise.laplace_neg(s)
            verdict = FINITE if math.isfinite(dn) else INFINITE
            return PhaseVerdict(verdict, s, INF if math.isfinite(dn) else s,
                                "bipolar-noise-moment")
        if cfg.p == 1.0 and cfg.pathloss.has_pole and not cfg.cancel_interference:
            return PhaseVerdict(INFINITE, cfg.p, 1.0, "persistent-interferer-pole")
        return PhaseVerdict(FINITE, 0.0, INF, "bipolar-fast-noise")

    if cfg.cancel_interference and isinstance(cfg.receiver,
                                              (IpnrReceiver, MnnReceiver)):
        return _classify_noise_limited(cfg)

    if not isinstance(cfg.fading, RayleighFading) or cfg.variability.fading != FAST:
        raise NoAnalyticRuleError(
            "nearest-receiver rules need fast Rayleigh fading")

    growth = _noise_growth(cfg)
    if isinstance(cfg.receiver, PoissonGridReceiver):
        kappa = cfg.receiver.kappa
        s_edge = _mu(cfg) * cfg.T * float(cfg.pathloss(kappa))
        if cfg.variability.noise == SLOW and isinstance(cfg.noise, ExponentialNoise):
            verdict = FINITE if s_edge < cfg.noise.nu else INFINITE
            return PhaseVerdict(verdict, s_edge, cfg.noise.nu,
                                "bounded-receiver-noise-moment")
        if growth == _UNKNOWN:
            raise NoAnalyticRuleError("no rule for this noise law")
        return PhaseVerdict(FINITE, 0.0, INF, "bounded-receiver")

    if growth == _EXP_BETA:
        return PhaseVerdict(INFINITE, cfg.pathloss.beta, 2.0, "noise-tail-race")
    if growth == _DIVERGES:
        return PhaseVerdict(INFINITE, INF, cfg.noise.nu,
                            "slow-noise-unbounded-link")
    if growth == _UNKNOWN:
        raise NoAnalyticRuleError("no rule for this noise law")

    beta = cfg.pathloss.beta
    if isinstance(cfg.receiver, IpnrReceiver):
        lhs = cfg.lam * contention_coefficient(cfg.p, cfg.T, beta)
        rhs = math.pi * cfg.receiver.lambda0
        rule = "ipnr-contention" if cfg.pathloss.variant == "powerlaw" \
            else "ipnr-contention-polefree"
        return PhaseVerdict(FINITE if rhs > lhs else INFINITE, lhs, rhs, rule)

    # MNN
    if cfg.p == 1.0:
        return PhaseVerdict(INFINITE, cfg.p, 1.0, "mnn-receiver-busy")
    if cfg.pathloss.variant == "powerlaw":
        lhs = mnn_contention_coefficient(cfg.p, cfg.T, beta)
        verdict = FINITE if lhs < math.pi else INFINITE
        return PhaseVerdict(verdict, lhs, math.pi, "mnn-contention-exact")
    theta = contention_coefficient(cfg.p, cfg.T, beta)
    if theta < math.pi:
        return PhaseVerdict(FINITE, theta, math.pi, "mnn-contention-bound")
    if theta > 2.0 * math.pi:
        return PhaseVerdict(INFINITE, theta, 2.0 * math.pi, "mnn-contention-bound")
    return PhaseVerdict(INDETERMINATE, theta, math.pi, "mnn-contention-bound")
