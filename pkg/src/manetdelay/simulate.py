"""Monte-Carlo engine: Palm samples, slot dynamics, and delay estimators.

A Palm sample is one realization of the network seen from a typical node
at the origin (the stationary Poisson picture plus an added point).  For
fast Rayleigh fading the per-slot success probability given the static
elements has a closed product form, which the semi-analytic estimator
averages directly; the slot engine simulates the actual dynamics and
works for every fading law.

Reproducibility: every Palm replication owns a counter-based stream,
Philox keyed by (master_seed, sample_index), so results do not depend on
worker scheduling.
"""

from __future__ import annotations

import concurrent.futures
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .analytic import (
    DegenerateRateError,
    UnsupportedModelError,
    mean_interference_exponent,
)
from .models import (
    BipolarReceiver,
    ConstantNoise,
    FAST,
    MnnReceiver,
    RayleighFading,
    ScenarioConfig,
    SLOW,
    noise_is_trivial,
)


def stream(master_seed: int, sample_index: int) -> np.random.Generator:
    """Counter-based per-replication RNG stream."""
    return np.random.Generator(np.random.Philox(key=[master_seed, sample_index]))


def guard_radius(cfg: ScenarioConfig, tol: float = 1e-3) -> float:
    """Window radius beyond which truncated interference is negligible.

    Chosen so the expected beyond-window interference shifts the
    conditional-success exponent by at most `tol` at the median link
    distance (closed power-law tail bound).
    """
    if cfg.cancel_interference or cfg.p == 0.0:
        return 1.0
    d = cfg.link_distance_scale()
    s = cfg.T * float(cfg.pathloss(d))
    beta, A = cfg.pathloss.beta, cfg.pathloss.A
    # 2*pi*lam*p * int_R^inf s*u/(A*u)^beta du <= tol
    rhs = 2.0 * math.pi * cfg.lam * cfg.p * s * A ** (-beta) / ((beta - 2.0) * tol)
    return max(rhs ** (1.0 / (beta - 2.0)), 2.0 * d, 1.0)


def default_window_radius(cfg: ScenarioConfig) -> float:
    return max(10.0, guard_radius(cfg))


@dataclass
class PalmSample:
    """One Palm realization: typical node at the origin plus its receiver.

    nodes[0] is the origin.  receiver_index is the receiving node's row
    for the MNN model (receivers are network nodes there), None otherwise.
    static_fading[j] is the frozen virtual power of the link node j ->
    receiver (entry 0 is the typical node's own link); static_noise the
    frozen noise value.  Both None under fast variability.
    receiver_candidates keeps the sampled external receiver set so that
    per-node receivers can be derived on demand (attach_receivers).
    """

    window_radius: float
    nodes: np.ndarray
    receiver: np.ndarray
    receiver_index: int | None = None
    static_fading: np.ndarray | None = None
    static_noise: float | None = None
    receiver_candidates: np.ndarray | None = None
    receivers: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class SlotOutcome:
    slot: int
    transmitted: bool
    success: bool
    sinr: float | None


@dataclass(frozen=True)
class Censored:
    """No success within the horizon; a lower bound, never a sample mean."""

    max_slots: int


@dataclass(frozen=True)
class DivergenceReport:
    diverged: bool
    inconclusive: bool
    growth_factors: tuple[float, ...]
    max_share: float | None
    tail_index: float | None
    checkpoints: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class DelayEstimate:
    mean: float
    std_error: float
    n_samples: int
    diverged: bool
    estimator: str
    window_radius: float
    checkpoints: tuple[tuple[int, float], ...] = ()
    report: DivergenceReport | None = None
    n_censored: int = 0
    censor_biased: bool = False

    def summary(self) -> str:
        if self.diverged:
            return (f"running mean {self.mean:.6g} at n={self.n_samples} "
                    f"(diverged)")
        return (f"mean {self.mean:.6g} +- {self.std_error:.2g} "
                f"(n={self.n_samples})")


# ---------------------------------------------------------------------------
# Palm sampling

def _poisson_disk(rng, density, radius):
    n = rng.poisson(density * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(n))
    a = rng.random(n) * 2.0 * math.pi
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


def _lattice_points(kappa, offset, radius):
    a = kappa * math.sqrt(2.0)
    k = int(math.ceil((radius + a) / a))
    g = np.arange(-k, k + 1) * a
    xx, yy = np.meshgrid(g + offset[0], g + offset[1])
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return pts[np.einsum("ij,ij->i", pts, pts) <= radius * radius]


def _nearest(points):
    """Index of the point closest to the origin; ties to the lower index."""
    d2 = np.einsum("ij,ij->i", points, points)
    return int(np.argmin(d2))  # argmin already takes the first minimum


def sample_palm(cfg: ScenarioConfig, window_radius: float,
                rng: np.random.Generator, max_retries: int = 6) -> PalmSample:
    """Draw one Palm realization on a disk window around the origin.

    The network nodes are Poisson(lam) plus the origin; the receiver
    follows the configured model.  An empty nearest-receiver candidate set
    triggers a full resample on a doubled window (bounded retries).
    """
    radius = float(window_radius)
    for _attempt in range(max_retries):
        others = _poisson_disk(rng, cfg.lam, radius)
        nodes = np.vstack([np.zeros((1, 2)), others])
        receiver_index = None
        candidates = None

        if isinstance(cfg.receiver, BipolarReceiver):
            phi = rng.random() * 2.0 * math.pi
            receiver = cfg.receiver.r * np.array([math.cos(phi), math.sin(phi)])
        elif isinstance(cfg.receiver, MnnReceiver):
            if len(others) == 0:
                radius *= 2.0
                continue
            receiver_index = 1 + _nearest(others)
            receiver = nodes[receiver_index]
        else:
            candidates = _poisson_disk(rng, cfg.receiver.lambda0, radius)
            if hasattr(cfg.receiver, "kappa"):  # Poisson + lattice
                a = cfg.receiver.kappa * math.sqrt(2.0)
                offset = rng.random(2) * a
                lattice = _lattice_points(cfg.receiver.kappa, offset, radius)
                candidates = np.vstack([candidates, lattice]) \
                    if len(candidates) else lattice
            if len(candidates) == 0:
                radius *= 2.0
                continue
            receiver = candidates[_nearest(candidates)]

        static_fading = None
        if cfg.variability.fading == SLOW:
            static_fading = np.atleast_1d(cfg.fading.sample(rng, len(nodes)))
        static_noise = None
        if cfg.variability.noise == SLOW and not noise_is_trivial(cfg.noise):
            static_noise = float(cfg.noise.sample(rng))

        return PalmSample(window_radius=radius, nodes=nodes, receiver=receiver,
                          receiver_index=receiver_index,
                          static_fading=static_fading,
                          static_noise=static_noise,
                          receiver_candidates=candidates)
    raise RuntimeError(f"no receiver candidates after {max_retries} window "
                       f"enlargements (final radius {radius})")


def attach_receivers(sample: PalmSample, cfg: ScenarioConfig,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-node receiver locations for every network node (computed lazily).

    Only the typical node's delay is ever estimated; this exists for
    inspecting shared-receiver configurations.
    """
    if sample.receivers is not None:
        return sample.receivers
    nodes = sample.nodes
    if isinstance(cfg.receiver, BipolarReceiver):
        if rng is None:
            raise ValueError("bipolar per-node receivers need an rng for angles")
        phi = rng.random(len(nodes)) * 2.0 * math.pi
        recv = nodes + cfg.receiver.r * np.column_stack([np.cos(phi), np.sin(phi)])
        recv[0] = sample.receiver
    elif isinstance(cfg.receiver, MnnReceiver):
        from scipy.spatial import cKDTree
        tree = cKDTree(nodes)
        _, idx = tree.query(nodes, k=2)
        recv = nodes[idx[:, 1]]
    else:
        from scipy.spatial import cKDTree
        tree = cKDTree(sample.receiver_candidates)
        recv = sample.receiver_candidates[tree.query(nodes)[1]]
    sample.receivers = recv
    return recv


# ---------------------------------------------------------------------------
# per-sample link statistics and success probabilities

class _LinkStats:
    """Distances from every node to the typical receiver, precomputed."""

    __slots__ = ("d", "l_d", "l_j", "interferer_idx", "sample", "cfg")

    def __init__(self, sample: PalmSample, cfg: ScenarioConfig):
        self.sample, self.cfg = sample, cfg
        y0 = sample.receiver
        self.d = float(np.hypot(*y0))
        self.l_d = float(cfg.pathloss(self.d))
        idx = np.arange(1, sample.n_nodes)
        if sample.receiver_index is not None:
            idx = idx[idx != sample.receiver_index]
        self.interferer_idx = idx
        diffs = sample.nodes[idx] - y0
        self.l_j = np.asarray(cfg.pathloss(np.hypot(diffs[:, 0], diffs[:, 1])))

    def success_prob(self, threshold, tail_correction=False):
        """p * noise term * prod over interferers, for fast Rayleigh fading."""
        cfg = self.cfg
        p = cfg.p
        if p == 0.0:
            return 0.0
        mu = cfg.fading.mu
        s = threshold * self.l_d
        if noise_is_trivial(cfg.noise):
            noise_term = 1.0
        elif cfg.variability.noise == FAST:
            noise_term = cfg.noise.laplace(mu * s)
        else:
            noise_term = math.exp(-min(mu * s * self._static_w(), 745.0))
        out = p * noise_term
        if not cfg.cancel_interference and len(self.l_j):
            x = s / (self.l_j + s)
            out *= math.exp(np.log1p(-p * x).sum())
        if tail_correction and not cfg.cancel_interference:
            lower = max(self.sample.window_radius - self.d, 0.0)
            out *= math.exp(-mean_interference_exponent(
                s, cfg.lam, p, cfg.pathloss, lower=lower))
        if self.sample.receiver_index is not None:
            out *= 1.0 - p  # MNN: the receiving node must stay silent
        return out

    def _static_w(self):
        if isinstance(self.cfg.noise, ConstantNoise):
            return self.cfg.noise.w
        if self.sample.static_noise is None:
            raise UnsupportedModelError(
                "slow random noise needs the frozen draw from sample_palm")
        return self.sample.static_noise


def conditional_success_prob(sample: PalmSample, cfg: ScenarioConfig,
                             threshold: float | None = None) -> float:
    """Per-slot probability that the typical node transmits successfully,
    given all static elements of the sample (fast Rayleigh fading only).
    """
    if not isinstance(cfg.fading, RayleighFading) or cfg.variability.fading != FAST:
        raise UnsupportedModelError(
            "conditional_success_prob needs fast Rayleigh fading; "
            "use run_slots for other laws")
    t = cfg.T if threshold is None else threshold
    return _LinkStats(sample, cfg).success_prob(t)


# ---------------------------------------------------------------------------
# slot dynamics

class _SlotEngine:
    """Shared dynamics for run_slots / local_delay (identical draw order:
    MAC vector, then fading vector if fast, then noise if fast)."""

    def __init__(self, sample: PalmSample, cfg: ScenarioConfig):
        self.sample, self.cfg = sample, cfg
        self.stats = _LinkStats(sample, cfg)
        self.n = sample.n_nodes
        self.recv = sample.receiver_index
        # weights turning per-node fading into interference at the receiver
        w = np.zeros(self.n)
        w[self.stats.interferer_idx] = 1.0 / self.stats.l_j
        if cfg.cancel_interference:
            w[:] = 0.0
        self.weights = w

    def step(self, rng):
        cfg = self.cfg
        mac = rng.random(self.n) < cfg.p
        if cfg.variability.fading == FAST:
            fad = np.atleast_1d(cfg.fading.sample(rng, self.n))
        else:
            fad = self.sample.static_fading
        if noise_is_trivial(cfg.noise):
            w = 0.0
        elif cfg.variability.noise == FAST:
            w = float(cfg.noise.sample(rng))
        else:
            w = self.stats._static_w()
        transmitted = bool(mac[0])
        if not transmitted:
            return False, False, None
        interference = float(np.dot(self.weights, mac * fad))
        if self.recv is not None and mac[self.recv]:
            return True, False, 0.0  # receiver busy transmitting
        signal = fad[0] / self.stats.l_d
        denom = w + interference
        sinr = math.inf if denom == 0.0 else signal / denom
        return True, sinr >= cfg.T, sinr


def run_slots(sample: PalmSample, cfg: ScenarioConfig, max_slots: int,
              rng: np.random.Generator) -> list[SlotOutcome]:
    """Simulate the typical node's slots; works for every fading law."""
    engine = _SlotEngine(sample, cfg)
    out = []
    for n in range(1, max_slots + 1):
        transmitted, success, sinr = engine.step(rng)
        out.append(SlotOutcome(n, transmitted, success, sinr))
    return out


def local_delay(sample: PalmSample, cfg: ScenarioConfig, max_slots: int,
                rng: np.random.Generator):
    """First successful slot index, or Censored(max_slots)."""
    engine = _SlotEngine(sample, cfg)
    for n in range(1, max_slots + 1):
        _, success, _ = engine.step(rng)
        if success:
            return n
    return Censored(max_slots)


def sample_local_delays(sample: PalmSample, cfg: ScenarioConfig, n_runs: int,
                        max_slots: int, rng: np.random.Generator,
                        chunk: int = 4096):
    """Many independent delay draws on one fixed sample, vectorized.

    Returns (delays, censored_mask); delays are max_slots where censored.
    Statistically identical to repeated local_delay (not stream-identical).
    """
    engine = _SlotEngine(sample, cfg)
    cfg_ = cfg
    n_nodes = engine.n
    delays = np.empty(n_runs, dtype=np.int64)
    censored = np.zeros(n_runs, dtype=bool)
    done = 0
    while done < n_runs:
        m = min(chunk, n_runs - done)
        alive = np.arange(m)
        L = np.full(m, max_slots, dtype=np.int64)
        cen = np.ones(m, dtype=bool)
        for slot in range(1, max_slots + 1):
            k = len(alive)
            if k == 0:
                break
            mac = rng.random((k, n_nodes)) < cfg_.p
            if cfg_.variability.fading == FAST:
                fad = np.atleast_2d(cfg_.fading.sample(rng, (k, n_nodes)))
            else:
                fad = np.broadcast_to(sample.static_fading, (k, n_nodes))
            if noise_is_trivial(cfg_.noise):
                w = 0.0
            elif cfg_.variability.noise == FAST:
                w = np.asarray(cfg_.noise.sample(rng, k))
            else:
                w = engine.stats._static_w()
            interference = (mac * fad) @ engine.weights
            signal = fad[:, 0] / engine.stats.l_d
            denom = w + interference
            with np.errstate(divide="ignore"):
                sinr = np.where(denom > 0, signal / np.where(denom > 0, denom, 1.0),
                                np.inf)
            ok = mac[:, 0] & (sinr >= cfg_.T)
            if engine.recv is not None:
                ok &= ~mac[:, engine.recv]
            if ok.any():
                hit = alive[ok]
                L[hit] = slot
                cen[hit] = False
                alive = alive[~ok]
        delays[done:done + m] = L
        censored[done:done + m] = cen
        done += m
    return delays, censored


# ---------------------------------------------------------------------------
# estimators

def _check_semi_supported(cfg):
    if not isinstance(cfg.fading, RayleighFading) or cfg.variability.fading != FAST:
        raise UnsupportedModelError(
            "the semi-analytic estimator needs fast Rayleigh fading; "
            "fall back to estimator='slot'")


def _success_prob_one(cfg, seed, index, window, tail_correction):
    rng = stream(seed, index)
    sample = sample_palm(cfg, window, rng)
    return _LinkStats(sample, cfg).success_prob(cfg.T, tail_correction)


def _semi_chunk(args):
    cfg, seed, window, lo, hi, tail_correction = args
    out = np.empty(hi - lo)
    for i in range(lo, hi):
        out[i - lo] = _success_prob_one(cfg, seed, i, window, tail_correction)
    return out


def palm_success_probs(cfg: ScenarioConfig, n_samples: int, *, seed: int = 0,
                       window_radius: float | None = None,
                       tail_correction: bool = True,
                       n_jobs: int = 1) -> np.ndarray:
    """Conditional success probabilities over independent Palm samples."""
    _check_semi_supported(cfg)
    window = default_window_radius(cfg) if window_radius is None else window_radius
    if window < guard_radius(cfg):
        warnings.warn(f"window radius {window:.3g} is below the guard radius "
                      f"{guard_radius(cfg):.3g}; truncation bias may exceed "
                      f"the 1e-3 target", stacklevel=2)
    if n_jobs <= 1:
        return _semi_chunk((cfg, seed, window, 0, n_samples, tail_correction))
    bounds = np.linspace(0, n_samples, n_jobs + 1).astype(int)
    jobs = [(cfg, seed, window, int(lo), int(hi), tail_correction)
            for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with concurrent.futures.ProcessPoolExecutor(max_workers=n_jobs) as pool:
        parts = list(pool.map(_semi_chunk, jobs))
    return np.concatenate(parts)


def _running_means(x):
    return np.cumsum(x) / np.arange(1, len(x) + 1)


def divergence_diagnostic(partial_means) -> DivergenceReport:
    """Decide whether a running-mean series is drifting to infinity.

    Expects the full running-mean sequence (one entry per sample; at least
    the four doubling checkpoints must exist, i.e. length >= 8).  Flags
    divergence when the mean grows by more than x1.25 across each of the
    last two doublings with a single term holding over half the sum, or
    when the tail-index estimate of the recovered terms drops below 1
    (infinite-mean regime).
    """
    arr = np.asarray(partial_means, dtype=float)
    n = len(arr)
    if n < 8:
        return DivergenceReport(False, True, (), None, None, ())
    idx = [n // 8, n // 4, n // 2, n]
    ckpts = tuple((i, float(arr[i - 1])) for i in idx)
    means = [c[1] for c in ckpts]
    if any(math.isinf(m) or math.isnan(m) for m in means):
        return DivergenceReport(True, False, (), None, None, ckpts)
    growth = tuple(means[i + 1] / means[i] if means[i] > 0 else math.inf
                   for i in range(3))

    counts = np.arange(1, n + 1, dtype=float)
    sums = arr * counts
    terms = np.diff(sums, prepend=0.0)
    terms = np.maximum(terms, 0.0)
    total = sums[-1]
    max_share = float(terms.max() / total) if total > 0 else 0.0

    spec_rule = growth[1] > 1.25 and growth[2] > 1.25 and max_share > 0.5

    tail_index = None
    k = int(math.ceil(math.sqrt(n)))
    pos = terms[terms > 0]
    if k >= 30 and len(pos) > 2 * k:
        top = np.partition(pos, len(pos) - k - 1)[-(k + 1):]
        top = np.sort(top)[::-1]
        denom = float(np.log(top[:k] / top[k]).sum())
        tail_index = k / denom if denom > 0 else math.inf
    tail_rule = tail_index is not None and tail_index < 1.0

    return DivergenceReport(bool(spec_rule or tail_rule), False, growth,
                            max_share, tail_index, ckpts)


def _estimate_from_values(x, estimator, window, n_censored=0,
                          censor_biased=False):
    x = np.asarray(x, dtype=float)
    n = len(x)
    running = _running_means(x)
    report = divergence_diagnostic(running)
    finite = np.isfinite(x)
    mean = float(running[-1])
    std_error = float(np.std(x[finite], ddof=1) / math.sqrt(finite.sum())) \
        if finite.sum() > 1 else math.inf
    if not finite.all():
        mean = math.inf
    return DelayEstimate(mean=mean, std_error=std_error, n_samples=n,
                         diverged=report.diverged, estimator=estimator,
                         window_radius=window, checkpoints=report.checkpoints,
                         report=report, n_censored=n_censored,
                         censor_biased=censor_biased)


def estimate_mean_delay(cfg: ScenarioConfig, n_samples: int,
                        estimator: str = "semi-analytic", *, seed: int = 0,
                        window_radius: float | None = None,
                        max_slots: int = 10_000,
                        tail_correction: bool = True,
                        n_jobs: int = 1) -> DelayEstimate:
    """Spatial-average mean local delay over independent Palm samples.

    semi-analytic: averages the exact per-sample inverse success
    probability (fast Rayleigh fading only).  slot: one simulated delay
    per sample (any fading; censored-biased in heavy-tail regimes).
    """
    if n_samples < 100:
        raise ValueError("need at least 100 samples for meaningful error bars")
    window = default_window_radius(cfg) if window_radius is None else window_radius

    if estimator in ("semi", "semi-analytic"):
        q = palm_success_probs(cfg, n_samples, seed=seed, window_radius=window,
                               tail_correction=tail_correction, n_jobs=n_jobs)
        with np.errstate(divide="ignore"):
            x = np.where(q > 0, 1.0 / np.where(q > 0, q, 1.0), np.inf)
        return _estimate_from_values(x, "semi-analytic", window)

    if estimator in ("slot", "slot-empirical"):
        delays = np.empty(n_samples)
        censored = 0
        for i in range(n_samples):
            rng = stream(seed, i)
            sample = sample_palm(cfg, window, rng)
            d = local_delay(sample, cfg, max_slots, rng)
            if isinstance(d, Censored):
                censored += 1
                delays[i] = max_slots
            else:
                delays[i] = d
        biased = censored > 0.001 * n_samples
        est = _estimate_from_values(delays, "slot-empirical", window,
                                    n_censored=censored, censor_biased=biased)
        return est

    raise ValueError(f"unknown estimator {estimator!r} (semi|slot)")


@dataclass(frozen=True)
class CcdfEstimate:
    """Mixture-of-geometrics delay tail on an m grid, with 95% bands."""

    m: np.ndarray
    ccdf: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    partial_sum: np.ndarray
    n_samples: int
    window_radius: float


def ccdf_of_mixture(q: np.ndarray, m):
    """P(L > m) = (1-q)^m per sample, exactly in m (1 at m = 0)."""
    m = np.asarray(m, dtype=float)
    with np.errstate(divide="ignore"):
        log1q = np.log1p(-np.minimum(np.asarray(q, dtype=float), 1.0))[:, None]
    expo = np.where(m[None, :] == 0.0, 0.0, m[None, :] * log1q)
    return np.exp(expo)


def estimate_delay_ccdf(cfg: ScenarioConfig, m_grid, n_samples: int, *,
                        seed: int = 0, window_radius: float | None = None,
                        tail_correction: bool = True,
                        n_jobs: int = 1) -> CcdfEstimate:
    """Delay tail P(L > m) by the exact geometric mixture (no slot loops).

    partial_sum[i] = sum of P(L > m) for m = 1..m_grid[i]; it converges to
    mean - 1 in finite-mean regimes and keeps growing otherwise.
    """
    window = default_window_radius(cfg) if window_radius is None else window_radius
    q = palm_success_probs(cfg, n_samples, seed=seed, window_radius=window,
                           tail_correction=tail_correction, n_jobs=n_jobs)
    m = np.asarray(m_grid, dtype=float)
    vals = ccdf_of_mixture(q, m)
    ccdf = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / math.sqrt(len(q))
    qs = np.maximum(q, 1e-300)
    with np.errstate(divide="ignore"):
        log1q = np.log1p(-qs)[:, None]
    # sum_{j=1..M} (1-q)^j = (1-q)/q * (1 - (1-q)^M)
    psums = ((1.0 - qs)[:, None] / qs[:, None]
             * -np.expm1(m[None, :] * log1q)).mean(axis=0)
    return CcdfEstimate(m=m, ccdf=ccdf,
                        lo=np.clip(ccdf - 1.96 * se, 0.0, 1.0),
                        hi=np.clip(ccdf + 1.96 * se, 0.0, 1.0),
                        partial_sum=psums, n_samples=len(q),
                        window_radius=window)


def _shannon_rate(stats: _LinkStats, cfg: ScenarioConfig) -> float:
    """int_0^inf success(v)/(v+1) dv for one sample (adaptive coding rate)."""
    p, mu = cfg.p, cfg.fading.mu
    l_d, l_j = stats.l_d, stats.l_j
    interference_on = not cfg.cancel_interference
    if noise_is_trivial(cfg.noise):
        w_static, fast_noise = 0.0, False
        if not interference_on:
            raise DegenerateRateError(
                "zero noise with interference canceled: infinite rate")
    elif cfg.variability.noise == FAST and not isinstance(cfg.noise, ConstantNoise):
        w_static, fast_noise = None, True
    else:
        w_static, fast_noise = stats._static_w(), False
    lower = max(stats.sample.window_radius - stats.d, 0.0)

    def success(v):
        s = v * l_d
        out = p
        if fast_noise:
            out *= cfg.noise.laplace(mu * s)
        elif w_static > 0.0:
            out *= math.exp(-min(mu * s * w_static, 745.0))
        if interference_on:
            if len(l_j):
                x = s / (l_j + s)
                out *= math.exp(np.log1p(-p * x).sum())
            out *= math.exp(-mean_interference_exponent(
                s, cfg.lam, p, cfg.pathloss, lower=lower))
        return out

    val, _ = integrate.quad(lambda v: success(v) / (v + 1.0), 0.0, np.inf,
                            limit=200, epsabs=1e-12, epsrel=1e-8)
    return val


def estimate_shannon_delay(cfg: ScenarioConfig, n_samples: int, *,
                           seed: int = 0,
                           window_radius: float | None = None) -> DelayEstimate:
    """Adaptive-coding delay: average of inverse per-sample mean bit rate.

    Per sample the success probability as a function of the SINR threshold
    is integrated against 1/(v+1); the estimate is the average inverse.
    Needs fast Rayleigh fading; converges whenever the noise has a finite
    mean, even where the outage delay diverges.
    """
    _check_semi_supported(cfg)
    if n_samples < 100:
        raise ValueError("need at least 100 samples for meaningful error bars")
    window = default_window_radius(cfg) if window_radius is None else window_radius
    x = np.empty(n_samples)
    for i in range(n_samples):
        rng = stream(seed, i)
        sample = sample_palm(cfg, window, rng)
        rate = _shannon_rate(_LinkStats(sample, cfg), cfg)
        if rate <= 0.0:
            raise DegenerateRateError("vanishing rate integral in a sample")
        x[i] = 1.0 / rate
    return _estimate_from_values(x, "shannon", window)
