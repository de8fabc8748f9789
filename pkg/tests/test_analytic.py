import math

import numpy as np
import pytest
from scipy import integrate, special
from hypothesis import given, settings, strategies as st

from manetdelay import (
    BipolarReceiver,
    ConstantNoise,
    DegenerateRateError,
    DeterministicFading,
    ExponentialNoise,
    IpnrReceiver,
    LogNormalFading,
    MnnReceiver,
    NoAnalyticRuleError,
    PathLoss,
    PoissonGridReceiver,
    RayleighFading,
    UnsupportedModelError,
    Variability,
    WeibullFading,
    ZeroNoise,
    contention_coefficient,
    contention_constant,
    empty_ball_arc_integral,
    high_mobility_coefficient,
    interference_factor_inr,
    interference_factor_mnn,
    interference_tail_integral,
    mean_delay,
    mean_delay_bipolar,
    mean_delay_bounded_receiver,
    mean_delay_high_mobility_ipnr,
    mean_delay_ipnr,
    mean_delay_mnn,
    mean_delay_noise_limited,
    mnn_contention_coefficient,
    noise_factor,
    phase_classify,
    shannon_delay_interference_free,
)
from conftest import POWERLAW4, make_cfg, slow_exp_noise_cfg

# frozen oracle values (computed below by the independent quadrature oracles,
# asserted against them at every run; the looser comparisons check the
# 6-7 significant figures quoted elsewhere)
K4 = math.pi**2 / 2.0
THETA_HALF = 3.4894320998194397          # contention coefficient at p=.5,T=1,b=4
D_INR_EXAMPLE = 1.2436983814015639       # interference factor, s = l(0.25)
BIPOLAR_EXAMPLE = 2.4873967628031277
IPNR_EXAMPLE = 4.498024586156377
SHANNON_UNIT = 1.6768750281786993        # 1/(e*E1(1))


def contention_constant_oracle(beta):
    # defining integral: K = 2*pi * int_0^inf v/(v^beta + 1) dv
    val, _ = integrate.quad(lambda v: v / (v**beta + 1.0), 0, np.inf, limit=400)
    return 2.0 * math.pi * val


def inr_exponent_oracle(s, lam, p, pathloss):
    # defining integral of the inverse-transform exponent
    c = (1.0 - p) * s
    val, _ = integrate.quad(lambda v: p * s * v / (pathloss(v) + c), 0, np.inf,
                            limit=400)
    return 2.0 * math.pi * lam * val


class TestContentionConstant:
    @pytest.mark.parametrize("beta", [2.5, 3.0, 4.0, 6.0])
    def test_against_quadrature_oracle(self, beta):
        assert contention_constant(beta) == pytest.approx(
            contention_constant_oracle(beta), rel=1e-9)

    def test_known_values(self):
        assert contention_constant(4.0) == pytest.approx(K4, rel=1e-12)
        assert contention_constant(4.0) == pytest.approx(4.934802, rel=1e-6)
        assert contention_constant(3.0) == pytest.approx(7.597625, rel=1e-6)
        # 7-figure value quoted to coarser precision elsewhere
        assert contention_constant(3.0) == pytest.approx(7.597542, rel=2e-5)

    def test_gamma_identity(self):
        for beta in np.linspace(2.05, 10.0, 40):
            gamma_form = (2.0 * math.pi / beta) * math.gamma(2.0 / beta) \
                * math.gamma(1.0 - 2.0 / beta)
            assert contention_constant(beta) == pytest.approx(gamma_form,
                                                              rel=1e-10)

    def test_divergence_toward_two(self):
        assert contention_constant(2.01) > 100.0 * contention_constant(4.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            contention_constant(2.0)


class TestContentionCoefficient:
    def test_zero_at_p_zero(self):
        assert contention_coefficient(0.0, 1.0, 4.0) == 0.0

    def test_half_value(self):
        expected = 0.5 * 0.5 ** -0.5 * contention_constant(4.0)
        got = contention_coefficient(0.5, 1.0, 4.0)
        assert got == pytest.approx(expected, rel=1e-14)
        assert got == pytest.approx(THETA_HALF, rel=1e-12)
        assert got == pytest.approx(3.489468, rel=2e-5)

    def test_matches_interference_exponent(self):
        # oracle: theta * r^2 must equal the defining exponent at s = T*l(r)
        for p, T, r in [(0.3, 1.0, 0.5), (0.7, 2.0, 0.25), (0.5, 0.3, 1.0)]:
            s = T * POWERLAW4(r)
            assert contention_coefficient(p, T, 4.0) * r**2 == pytest.approx(
                inr_exponent_oracle(s, 1.0, p, POWERLAW4), rel=1e-8)

    @given(st.floats(0.01, 0.97), st.floats(0.05, 20.0), st.floats(2.2, 8.0))
    @settings(max_examples=40, deadline=None)
    def test_monotone_in_p_and_T(self, p, T, beta):
        eps = 0.02
        assert contention_coefficient(p + eps, T, beta) > \
            contention_coefficient(p, T, beta)
        assert contention_coefficient(p, T * 1.1, beta) > \
            contention_coefficient(p, T, beta)

    def test_infinite_at_p_one(self):
        assert math.isinf(contention_coefficient(1.0, 1.0, 4.0))


class TestNoiseFactor:
    def test_zero_noise(self):
        assert noise_factor(3.0, ZeroNoise(), "slow") == 1.0
        assert noise_factor(0.0, ExponentialNoise(1.0), "fast") == 1.0

    def test_slow_exponential_value(self):
        assert noise_factor(1.0, ExponentialNoise(2.0), "slow") == pytest.approx(2.0)

    def test_slow_exponential_monte_carlo_oracle(self):
        rng = np.random.default_rng(5)
        w = rng.exponential(0.5, 1_000_000)
        mc = np.exp(w).mean()
        assert noise_factor(1.0, ExponentialNoise(2.0), "slow") == \
            pytest.approx(mc, rel=5e-3)

    def test_slow_exponential_infinite_at_rate(self):
        assert math.isinf(noise_factor(2.0, ExponentialNoise(2.0), "slow"))

    def test_fast_is_reciprocal_transform(self):
        n = ExponentialNoise(2.0)
        assert noise_factor(3.0, n, "fast") == pytest.approx(1.0 / n.laplace(3.0))
        assert noise_factor(3.0, n, "fast") >= 1.0


class TestInterferenceFactorInr:
    def test_trivial_cases(self):
        assert interference_factor_inr(0.0, 1.0, 0.5, POWERLAW4) == 1.0
        assert interference_factor_inr(1.0, 1.0, 0.0, POWERLAW4) == 1.0

    def test_example_value(self):
        s = 1.0 * POWERLAW4(0.25)
        d = interference_factor_inr(s, 1.0, 0.5, POWERLAW4)
        assert d == pytest.approx(D_INR_EXAMPLE, rel=1e-12)
        assert d == pytest.approx(1.243705, rel=2e-5)
        assert math.log(d) == pytest.approx(0.218092, rel=2e-5)

    def test_closed_form_vs_quadrature_identity(self):
        for p in (0.1, 0.5, 0.9):
            for T in (0.1, 1.0, 10.0):
                for beta in (2.5, 3.0, 4.0, 6.0):
                    pl = PathLoss("powerlaw", 1.0, beta)
                    s = T * pl(0.5)
                    closed = interference_factor_inr(s, 1.0, p, pl)
                    quad = math.exp(inr_exponent_oracle(s, 1.0, p, pl))
                    assert closed == pytest.approx(quad, rel=1e-6)

    def test_nonpole_pathloss_quadrature(self):
        pl = PathLoss("maxone", 1.0, 4.0)
        s = 2.0
        got = interference_factor_inr(s, 1.0, 0.5, pl)
        assert got == pytest.approx(math.exp(inr_exponent_oracle(s, 1.0, 0.5, pl)),
                                    rel=1e-8)

    def test_p_one_pole(self):
        assert math.isinf(interference_factor_inr(1.0, 1.0, 1.0, POWERLAW4))
        pl = PathLoss("maxone", 1.0, 4.0)
        assert math.isfinite(interference_factor_inr(1.0, 1.0, 1.0, pl))


class TestTailAndArcIntegrals:
    def test_arctan_oracle(self):
        # at b = 2 and a = 0 the tail integral is arctan-evaluable: pi/2
        for w in (0.1, 1.0, 7.0):
            assert interference_tail_integral(0.0, w, 2.0) == \
                pytest.approx(math.pi / 2.0, rel=1e-12)

    def test_quadrature_oracle(self):
        for a, w, b in [(0.5, 1.0, 2.0), (2.0, 0.5, 3.0), (1.0, 4.0, 1.5)]:
            lo = a * a * w ** (-1.0 / b)
            val, _ = integrate.quad(lambda u: 1.0 / (1.0 + u**b), lo, np.inf,
                                    limit=400)
            assert interference_tail_integral(a, w, b) == pytest.approx(val,
                                                                        rel=1e-9)

    def test_vanishes_for_large_a(self):
        assert interference_tail_integral(40.0, 1.0, 2.0) < 1e-3
        assert interference_tail_integral(1e4, 1.0, 2.0) < 1e-7

    def test_nonincreasing_in_a(self):
        vals = [interference_tail_integral(a, 1.0, 2.0)
                for a in np.linspace(0, 5, 30)]
        assert all(x >= y - 1e-15 for x, y in zip(vals, vals[1:]))

    def test_arc_integral_bounds(self):
        j = empty_ball_arc_integral(1.0, 2.0)
        assert 0.0 < j < math.pi * interference_tail_integral(0.0, 1.0, 2.0)
        assert j < math.pi**2 / 2.0

    def test_arc_integral_oracle(self):
        def h(a):
            return math.pi / 2.0 - math.atan(4.0 * math.cos(a) ** 2)
        val, _ = integrate.quad(h, -math.pi / 2.0, math.pi / 2.0, limit=200)
        assert empty_ball_arc_integral(1.0, 2.0) == pytest.approx(val, rel=1e-9)

    def test_domain(self):
        with pytest.raises(ValueError):
            interference_tail_integral(1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            empty_ball_arc_integral(1.0, 0.9)


def mnn_exponent_oracle(r, s, lam, p, pathloss):
    # the defining empty-ball double integral
    c = (1.0 - p) * s
    full, _ = integrate.quad(lambda v: p * s * v / (pathloss(v) + c), 0, np.inf,
                             limit=400)

    def inner(th):
        lo = 2.0 * r * math.cos(th)
        val, _ = integrate.quad(lambda v: p * s * v / (pathloss(v) + c), lo,
                                np.inf, limit=400)
        return val

    arc, _ = integrate.quad(inner, -math.pi / 2.0, math.pi / 2.0, limit=200)
    return lam * math.pi * full + lam * arc


class TestInterferenceFactorMnn:
    def test_trivial(self):
        assert interference_factor_mnn(0.5, 0.0, 1.0, 0.5, POWERLAW4) == 1.0

    def test_against_double_integral_oracle(self):
        for r in (0.1, 0.5, 1.5):
            s = 1.0 * POWERLAW4(r)
            got = interference_factor_mnn(r, s, 1.0, 0.5, POWERLAW4)
            want = math.exp(mnn_exponent_oracle(r, s, 1.0, 0.5, POWERLAW4))
            assert got == pytest.approx(want, rel=1e-8)

    def test_sandwich_bounds_grid(self):
        for r in np.linspace(0.05, 2.0, 10):
            for p in np.linspace(0.05, 0.95, 10):
                s = 1.0 * POWERLAW4(r)
                d_inr = interference_factor_inr(s, 1.0, p, POWERLAW4)
                d_mnn = interference_factor_mnn(r, s, 1.0, p, POWERLAW4)
                assert math.sqrt(d_inr) - 1e-12 <= d_mnn <= d_inr + 1e-12

    def test_example_bracket(self):
        s = 1.0 * POWERLAW4(0.25)
        d = interference_factor_mnn(0.25, s, 1.0, 0.5, POWERLAW4)
        assert math.sqrt(D_INR_EXAMPLE) <= d <= D_INR_EXAMPLE
        assert 1.115216 <= d <= 1.243705 * (1 + 1e-5)

    def test_exponent_ratio_constant_for_powerlaw(self):
        # log D_mnn / log D_inr = (K+J)/(2K) independently of r
        k = contention_constant(4.0)
        j = empty_ball_arc_integral(0.5, 2.0)
        for r in (0.3, 1.0, 3.0):
            s = POWERLAW4(r)
            ratio = math.log(interference_factor_mnn(r, s, 1.0, 0.5, POWERLAW4)) \
                / math.log(interference_factor_inr(s, 1.0, 0.5, POWERLAW4))
            assert ratio == pytest.approx((k + j) / (2 * k), rel=1e-9)

    def test_nonpole_variant(self):
        pl = PathLoss("maxone", 1.0, 4.0)
        s = 2.0
        got = interference_factor_mnn(0.5, s, 1.0, 0.4, pl)
        want = math.exp(mnn_exponent_oracle(0.5, s, 1.0, 0.4, pl))
        assert got == pytest.approx(want, rel=1e-6)


class TestMeanDelayBipolar:
    def test_example_value(self, bipolar_cfg):
        dv = mean_delay_bipolar(bipolar_cfg)
        assert dv.method == "closed_form"
        assert dv.value == pytest.approx(BIPOLAR_EXAMPLE, rel=1e-12)
        assert dv.value == pytest.approx(2.487410, rel=2e-5)

    def test_always_transmit_zero_threshold(self):
        cfg = make_cfg(p=1.0, T=1e-30)
        # exact zero SINR requirement: success every transmission
        dv = mean_delay_bipolar(make_cfg(p=1.0, T=1.0))
        assert math.isinf(dv.value)  # power-law pole with persistent interferers
        pl = PathLoss("maxone", 1.0, 4.0)
        dv2 = mean_delay_bipolar(make_cfg(p=1.0, T=1e-8, pathloss=pl))
        assert dv2.value == pytest.approx(1.0, rel=1e-6)

    def test_slow_exponential_noise_threshold(self):
        finite = mean_delay_bipolar(slow_exp_noise_cfg(1.0))
        assert math.isfinite(finite.value)
        blocked = mean_delay_bipolar(slow_exp_noise_cfg(1.5))
        assert blocked.is_infinite
        # exactly at the pole (s == nu, representable with r = 1, nu = 1)
        exactly = make_cfg(noise=ExponentialNoise(1.0),
                           receiver=BipolarReceiver(1.0),
                           variability=Variability(fading="fast", noise="slow"))
        assert mean_delay_bipolar(exactly).is_infinite

    def test_slow_noise_value(self):
        dv = mean_delay_bipolar(slow_exp_noise_cfg(1.0))
        s = POWERLAW4(1.0)
        want = (1.0 / 0.5) * (2.0 / (2.0 - 1.0)) \
            * interference_factor_inr(s, 1.0, 0.5, POWERLAW4)
        assert dv.value == pytest.approx(want, rel=1e-9)

    def test_p_zero_infinite(self):
        assert mean_delay_bipolar(make_cfg(p=0.0)).is_infinite

    def test_slow_fading_unsupported(self):
        cfg = make_cfg(variability=Variability(fading="slow"))
        with pytest.raises(UnsupportedModelError):
            mean_delay_bipolar(cfg)

    def test_at_least_one_slot(self):
        for p in (0.2, 0.5, 0.9):
            dv = mean_delay_bipolar(make_cfg(p=p))
            assert dv.value >= 1.0 / p >= 1.0


def ipnr_outer_quadrature_oracle(cfg):
    """(e.delay-INR-main) with the inner exponent also by quadrature."""
    lam0 = cfg.receiver.lambda0

    def integrand(r):
        if r == 0.0:
            return 0.0
        s = cfg.T * cfg.pathloss(r)
        expo = inr_exponent_oracle(s, cfg.lam, cfg.p, cfg.pathloss) \
            - math.pi * lam0 * r * r
        return 2.0 * math.pi * lam0 * r * math.exp(min(expo, 700.0))

    val, _ = integrate.quad(integrand, 0, np.inf, limit=400)
    return val / cfg.p


class TestMeanDelayIpnr:
    def test_example_value(self, ipnr_finite_cfg):
        dv = mean_delay_ipnr(ipnr_finite_cfg)
        assert dv.method == "closed_form"
        assert dv.value == pytest.approx(IPNR_EXAMPLE, rel=1e-12)
        assert dv.value == pytest.approx(4.497938, rel=1e-4)

    def test_closed_form_vs_outer_quadrature(self, ipnr_finite_cfg):
        oracle = ipnr_outer_quadrature_oracle(ipnr_finite_cfg)
        assert mean_delay_ipnr(ipnr_finite_cfg).value == pytest.approx(
            oracle, rel=1e-6)

    def test_infinite_below_threshold(self, ipnr_infinite_cfg):
        assert mean_delay_ipnr(ipnr_infinite_cfg).is_infinite

    def test_p_zero(self):
        cfg = make_cfg(p=0.0, receiver=IpnrReceiver(2.0))
        assert mean_delay_ipnr(cfg).is_infinite

    def test_exactly_on_threshold_infinite(self):
        lam0 = THETA_HALF / math.pi
        cfg = make_cfg(receiver=IpnrReceiver(lam0))
        assert mean_delay_ipnr(cfg).is_infinite

    def test_monotone_in_T_and_lambda(self):
        base = mean_delay_ipnr(make_cfg(receiver=IpnrReceiver(2.0))).value
        hotter = mean_delay_ipnr(make_cfg(T=1.5, receiver=IpnrReceiver(2.0))).value
        denser = mean_delay_ipnr(make_cfg(lam=1.2, receiver=IpnrReceiver(2.0))).value
        assert hotter > base and denser > base

    def test_fast_exponential_noise_quadrature(self):
        cfg = make_cfg(receiver=IpnrReceiver(2.0), noise=ExponentialNoise(2.0))
        dv = mean_delay_ipnr(cfg)
        assert dv.method == "quadrature"
        lam0 = 2.0

        def integrand(r):
            if r == 0.0:
                return 0.0
            s = cfg.pathloss(r)
            expo = math.log1p(s / 2.0) - math.pi * lam0 * r * r \
                + inr_exponent_oracle(s, 1.0, 0.5, POWERLAW4)
            return 2 * math.pi * lam0 * r * math.exp(min(expo, 700.0))
        want, _ = integrate.quad(integrand, 0, np.inf, limit=400)
        assert dv.value == pytest.approx(want / 0.5, rel=1e-6)

    def test_constant_noise_infinite(self):
        cfg = make_cfg(receiver=IpnrReceiver(2.0), noise=ConstantNoise(0.1))
        assert mean_delay_ipnr(cfg).is_infinite

    def test_slow_exponential_noise_infinite(self):
        cfg = make_cfg(receiver=IpnrReceiver(2.0), noise=ExponentialNoise(2.0),
                       variability=Variability(noise="slow"))
        assert mean_delay_ipnr(cfg).is_infinite


class TestMeanDelayMnn:
    def test_unstable_condition_infinite(self):
        # push the exact coefficient above pi with a high threshold
        cfg = make_cfg(p=0.6, T=10.0, receiver=MnnReceiver())
        assert mnn_contention_coefficient(0.6, 10.0, 4.0) > math.pi
        assert mean_delay_mnn(cfg).is_infinite

    def test_finite_value_between_bound_evaluations(self, mnn_cfg):
        coeff = mnn_contention_coefficient(mnn_cfg.p, mnn_cfg.T, 4.0)
        assert coeff < math.pi
        dv = mean_delay_mnn(mnn_cfg)
        theta = contention_coefficient(mnn_cfg.p, mnn_cfg.T, 4.0)
        pref = 1.0 / (mnn_cfg.p * (1.0 - mnn_cfg.p))
        upper = pref * math.pi / (math.pi - theta) if theta < math.pi else math.inf
        lower = pref * math.pi / (math.pi - theta / 2.0)
        assert lower <= dv.value <= upper

    def test_closed_form_vs_quadrature(self, mnn_cfg):
        lam = mnn_cfg.lam

        def integrand(r):
            if r == 0.0:
                return 0.0
            s = mnn_cfg.T * POWERLAW4(r)
            expo = mnn_exponent_oracle(r, s, lam, mnn_cfg.p, POWERLAW4) \
                - math.pi * lam * r * r
            return 2 * math.pi * lam * r * math.exp(min(expo, 700.0))
        want, _ = integrate.quad(integrand, 0, np.inf, limit=300)
        want /= mnn_cfg.p * (1.0 - mnn_cfg.p)
        assert mean_delay_mnn(mnn_cfg).value == pytest.approx(want, rel=1e-6)

    def test_vanishing_threshold_limit(self):
        cfg = make_cfg(T=1e-9, receiver=MnnReceiver())
        dv = mean_delay_mnn(cfg)
        assert dv.value == pytest.approx(1.0 / (0.5 * 0.5), rel=1e-3)

    def test_edge_probabilities(self):
        assert mean_delay_mnn(make_cfg(p=0.0, receiver=MnnReceiver())).is_infinite
        assert mean_delay_mnn(make_cfg(p=1.0, receiver=MnnReceiver())).is_infinite


class TestMeanDelayNoiseLimited:
    def test_rayleigh_constant_noise_infinite(self):
        cfg = make_cfg(receiver=IpnrReceiver(1.0), noise=ConstantNoise(1.0),
                       cancel_interference=True)
        assert mean_delay_noise_limited(cfg).is_infinite

    def test_weibull_light_shape_finite(self):
        cfg = make_cfg(receiver=IpnrReceiver(1.0), noise=ConstantNoise(1.0),
                       fading=WeibullFading(k=0.4, c=1.0),
                       cancel_interference=True)
        dv = mean_delay_noise_limited(cfg)
        assert math.isfinite(dv.value)

        def integrand(r):
            return 2 * math.pi * r * math.exp(min(r**1.6 - math.pi * r * r,
                                                  700.0))
        want, _ = integrate.quad(integrand, 0, np.inf, limit=400)
        assert dv.value == pytest.approx(want / 0.5, rel=1e-6)

    def test_weibull_heavy_shape_infinite(self):
        cfg = make_cfg(receiver=IpnrReceiver(1.0), noise=ConstantNoise(1.0),
                       fading=WeibullFading(k=0.7, c=1.0),
                       cancel_interference=True)
        assert mean_delay_noise_limited(cfg).is_infinite

    def test_zero_noise_is_pure_mac(self):
        cfg = make_cfg(p=0.25, receiver=IpnrReceiver(1.0),
                       cancel_interference=True)
        assert mean_delay_noise_limited(cfg).value == pytest.approx(4.0)

    def test_lognormal_finite(self):
        cfg = make_cfg(receiver=IpnrReceiver(1.0), noise=ConstantNoise(1.0),
                       fading=LogNormalFading(m=0.0, sigma=1.0),
                       cancel_interference=True)
        dv = mean_delay_noise_limited(cfg)
        assert math.isfinite(dv.value) and dv.value > 2.0

    def test_deterministic_fading_infinite(self):
        cfg = make_cfg(receiver=IpnrReceiver(1.0), noise=ConstantNoise(0.5),
                       fading=DeterministicFading(1.0), cancel_interference=True)
        assert mean_delay_noise_limited(cfg).is_infinite

    def test_fast_exponential_noise_finite(self):
        cfg = make_cfg(receiver=IpnrReceiver(1.0), noise=ExponentialNoise(1.0),
                       cancel_interference=True)
        dv = mean_delay_noise_limited(cfg)

        def integrand(r):
            return 2 * math.pi * r * math.exp(-math.pi * r * r) * (1.0 + r**4)
        want, _ = integrate.quad(integrand, 0, np.inf, limit=400)
        assert dv.value == pytest.approx(want / 0.5, rel=1e-6)


class TestMeanDelayHighMobility:
    def test_p_zero(self):
        cfg = make_cfg(p=0.0, receiver=IpnrReceiver(1.0))
        assert mean_delay_high_mobility_ipnr(cfg).is_infinite

    def test_finite_where_static_is_infinite(self, ipnr_infinite_cfg):
        assert mean_delay_ipnr(ipnr_infinite_cfg).is_infinite
        dv = mean_delay_high_mobility_ipnr(ipnr_infinite_cfg)
        assert math.isfinite(dv.value)
        theta1 = high_mobility_coefficient(0.5, 1.0, 4.0)
        want = 2.0 * math.pi / (math.pi - theta1)
        assert dv.value == pytest.approx(want, rel=1e-12)

    def test_never_larger_than_static(self, ipnr_finite_cfg):
        static = mean_delay_ipnr(ipnr_finite_cfg).value
        mobile = mean_delay_high_mobility_ipnr(ipnr_finite_cfg).value
        assert mobile <= static
        assert mobile <= 4.497938 * (1 + 1e-4)

    def test_own_threshold(self):
        theta1 = high_mobility_coefficient(0.5, 1.0, 4.0)
        lam0_crit = theta1 / math.pi
        below = make_cfg(receiver=IpnrReceiver(lam0_crit * 0.9))
        assert mean_delay_high_mobility_ipnr(below).is_infinite

    def test_closed_form_vs_quadrature(self, ipnr_infinite_cfg):
        lam0 = 1.0

        def integrand(r):
            s = POWERLAW4(r)
            expo, _ = integrate.quad(lambda v: s * v / (POWERLAW4(v) + s),
                                     0, np.inf, limit=400)
            return 2 * math.pi * lam0 * r * math.exp(-math.pi * lam0 * r * r) \
                * math.exp(2.0 * math.pi * 0.5 * expo)
        want, _ = integrate.quad(integrand, 0, 8.0, limit=300)
        got = mean_delay_high_mobility_ipnr(ipnr_infinite_cfg).value
        assert got == pytest.approx(want / 0.5, rel=1e-5)


class TestMeanDelayBoundedReceiver:
    def test_large_cap_recovers_ipnr(self, ipnr_finite_cfg):
        lam0 = 2.0
        kappa = 10.0 / math.sqrt(lam0)
        cfg = make_cfg(receiver=PoissonGridReceiver(lam0, kappa))
        dv = mean_delay_bounded_receiver(cfg)
        assert dv.value == pytest.approx(IPNR_EXAMPLE, rel=1e-4)

    def test_finite_despite_constant_noise(self):
        cfg = make_cfg(receiver=PoissonGridReceiver(1.0, 1.0),
                       noise=ConstantNoise(1.0))
        ipnr = make_cfg(receiver=IpnrReceiver(1.0), noise=ConstantNoise(1.0))
        assert mean_delay_ipnr(ipnr).is_infinite
        dv = mean_delay_bounded_receiver(cfg)
        assert math.isfinite(dv.value)

    def test_tiny_cap_gives_pure_mac(self):
        cfg = make_cfg(p=0.4, receiver=PoissonGridReceiver(1.0, 1e-4))
        assert mean_delay_bounded_receiver(cfg).value == pytest.approx(2.5,
                                                                       rel=1e-4)

    def test_slow_exponential_noise_cap_rule(self):
        fine = make_cfg(receiver=PoissonGridReceiver(1.0, 1.0),
                        noise=ExponentialNoise(2.0),
                        variability=Variability(noise="slow"))
        assert math.isfinite(mean_delay_bounded_receiver(fine).value)
        bad = make_cfg(receiver=PoissonGridReceiver(1.0, 1.5),
                       noise=ExponentialNoise(2.0),
                       variability=Variability(noise="slow"))
        assert mean_delay_bounded_receiver(bad).is_infinite


class TestShannonClosedForm:
    def test_unit_exponent(self):
        dv = shannon_delay_interference_free(1.0, 1.0, 1.0, 1.0, POWERLAW4)
        assert dv.value == pytest.approx(SHANNON_UNIT, rel=1e-10)
        assert dv.value == pytest.approx(1.676876, rel=1e-5)
        assert math.e * special.exp1(1.0) == pytest.approx(0.596347, rel=1e-5)

    def test_quadrature_oracle(self):
        for a in (0.3, 1.0, 5.0):
            val, _ = integrate.quad(lambda v: math.exp(-a * v) / (v + 1.0),
                                    0, np.inf, limit=400)
            dv = shannon_delay_interference_free(a ** 0.25, 1.0, 1.0, 1.0,
                                                 POWERLAW4)
            assert dv.value == pytest.approx(1.0 / val, rel=1e-8)

    def test_linear_in_inverse_p(self):
        half = shannon_delay_interference_free(1.0, 1.0, 1.0, 0.5, POWERLAW4)
        assert half.value == pytest.approx(2.0 * SHANNON_UNIT, rel=1e-12)
        assert half.value == pytest.approx(3.353752, rel=1e-5)

    def test_degenerate_rate(self):
        with pytest.raises(DegenerateRateError):
            shannon_delay_interference_free(1.0, 1.0, 0.0, 1.0, POWERLAW4)

    def test_huge_exponent_asymptotics(self):
        dv = shannon_delay_interference_free(10.0, 1.0, 1.0, 1.0, POWERLAW4)
        a = 1e4
        assert dv.value == pytest.approx(a / (1 - 1 / a), rel=1e-3)


class TestPhaseClassify:
    def test_ipnr_examples(self, ipnr_finite_cfg, ipnr_infinite_cfg):
        v = phase_classify(ipnr_finite_cfg)
        assert v.verdict == "finite" and v.rule == "ipnr-contention"
        assert v.threshold_lhs == pytest.approx(THETA_HALF, rel=1e-12)
        assert v.threshold_rhs == pytest.approx(2 * math.pi)
        assert phase_classify(ipnr_infinite_cfg).verdict == "infinite"

    def test_flip_tightness(self):
        lam0_crit = THETA_HALF / math.pi
        assert lam0_crit == pytest.approx(1.1107, rel=1e-4)
        below = make_cfg(receiver=IpnrReceiver(lam0_crit * (1 - 1e-3)))
        above = make_cfg(receiver=IpnrReceiver(lam0_crit * (1 + 1e-3)))
        exact = make_cfg(receiver=IpnrReceiver(lam0_crit))
        assert phase_classify(below).verdict == "infinite"
        assert phase_classify(above).verdict == "finite"
        assert phase_classify(exact).verdict == "infinite"

    def test_bipolar_noise_moment_critical_distance(self):
        rstar = 2.0 ** 0.25
        assert rstar == pytest.approx(1.189207, rel=1e-6)
        assert phase_classify(slow_exp_noise_cfg(1.0)).verdict == "finite"
        assert phase_classify(slow_exp_noise_cfg(1.5)).verdict == "infinite"
        assert phase_classify(slow_exp_noise_cfg(rstar * 1.0001)).verdict == \
            "infinite"
        assert phase_classify(slow_exp_noise_cfg(rstar * 0.9999)).verdict == \
            "finite"

    def test_slow_fading_freeze(self):
        cfg = make_cfg(noise=ConstantNoise(1.0),
                       variability=Variability(fading="slow", noise="slow"))
        v = phase_classify(cfg)
        assert v.verdict == "infinite" and v.rule == "slow-fading-freeze"

    def test_slow_fading_no_blocking_mass_has_no_rule(self):
        cfg = make_cfg(variability=Variability(fading="slow", noise="slow"))
        with pytest.raises(NoAnalyticRuleError):
            phase_classify(cfg)

    def test_bipolar_fast_fast_finite(self, bipolar_cfg):
        assert phase_classify(bipolar_cfg).verdict == "finite"
        cfg = make_cfg(noise=ExponentialNoise(0.5))
        assert phase_classify(cfg).verdict == "finite"

    def test_mnn_exact_rule(self):
        finite = make_cfg(p=0.3, T=2.0, receiver=MnnReceiver())
        v = phase_classify(finite)
        assert v.rule == "mnn-contention-exact" and v.verdict == "finite"
        assert v.threshold_lhs == pytest.approx(
            mnn_contention_coefficient(0.3, 2.0, 4.0), rel=1e-9)
        unstable = make_cfg(p=0.6, T=10.0, receiver=MnnReceiver())
        assert phase_classify(unstable).verdict == "infinite"

    def test_mnn_bound_rule_band(self):
        pl = PathLoss("maxone", 1.0, 4.0)
        finite = make_cfg(p=0.3, T=1.0, pathloss=pl, receiver=MnnReceiver())
        assert contention_coefficient(0.3, 1.0, 4.0) < math.pi
        assert phase_classify(finite).verdict == "finite"
        infinite = make_cfg(p=0.7, T=10.0, pathloss=pl, receiver=MnnReceiver())
        assert contention_coefficient(0.7, 10.0, 4.0) > 2 * math.pi
        v = phase_classify(infinite)
        assert v.verdict == "infinite" and v.rule == "mnn-contention-bound"
        band = make_cfg(p=0.5, T=1.0, pathloss=pl, receiver=MnnReceiver())
        assert math.pi < contention_coefficient(0.5, 1.0, 4.0) < 2 * math.pi
        assert phase_classify(band).verdict == "indeterminate"

    def test_polefree_threshold_matches_reduced_form(self):
        # for maxone path loss at beta=4 the finite/infinite threshold is
        # lambda0 = lam * (pi/2) * p * sqrt(T) / sqrt(1-p)
        p, T = 0.4, 2.0
        lam0_crit = (math.pi / 2.0) * p * math.sqrt(T) / math.sqrt(1.0 - p)
        assert contention_coefficient(p, T, 4.0) / math.pi == pytest.approx(
            lam0_crit, rel=1e-12)
        pl = PathLoss("maxone", 1.0, 4.0)
        lo = make_cfg(p=p, T=T, pathloss=pl,
                      receiver=IpnrReceiver(lam0_crit * 0.98))
        hi = make_cfg(p=p, T=T, pathloss=pl,
                      receiver=IpnrReceiver(lam0_crit * 1.02))
        assert phase_classify(lo).verdict == "infinite"
        assert phase_classify(hi).verdict == "finite"
        assert phase_classify(hi).rule == "ipnr-contention-polefree"

    def test_noise_limited_rules(self):
        base = make_cfg(receiver=IpnrReceiver(1.0), noise=ConstantNoise(1.0),
                        cancel_interference=True)
        assert phase_classify(base).verdict == "infinite"
        weib = make_cfg(receiver=IpnrReceiver(1.0), noise=ConstantNoise(1.0),
                        fading=WeibullFading(k=0.4), cancel_interference=True)
        v = phase_classify(weib)
        assert v.verdict == "finite" and v.rule == "weibull-tail-race"
        assert phase_classify(make_cfg(
            receiver=IpnrReceiver(1.0), noise=ConstantNoise(1.0),
            fading=WeibullFading(k=0.7), cancel_interference=True)).verdict == \
            "infinite"

    def test_bounded_receiver_rules(self):
        grid = make_cfg(receiver=PoissonGridReceiver(1.0, 1.0),
                        noise=ConstantNoise(1.0))
        assert phase_classify(grid).verdict == "finite"
        bad = make_cfg(receiver=PoissonGridReceiver(1.0, 1.5),
                       noise=ExponentialNoise(2.0),
                       variability=Variability(noise="slow"))
        assert phase_classify(bad).verdict == "infinite"

    def test_mac_off(self):
        assert phase_classify(make_cfg(p=0.0)).verdict == "infinite"

    def test_uncovered_combination_raises(self):
        cfg = make_cfg(fading=WeibullFading(k=0.5),
                       receiver=IpnrReceiver(1.0))
        with pytest.raises(NoAnalyticRuleError):
            phase_classify(cfg)


class TestDispatcherAndInvariants:
    def test_dispatch_matches_specialists(self, bipolar_cfg, ipnr_finite_cfg):
        assert mean_delay(bipolar_cfg).value == \
            mean_delay_bipolar(bipolar_cfg).value
        assert mean_delay(ipnr_finite_cfg).value == \
            mean_delay_ipnr(ipnr_finite_cfg).value

    def test_every_finite_delay_at_least_inverse_p(self):
        cases = [
            make_cfg(p=0.3),
            make_cfg(p=0.3, receiver=IpnrReceiver(3.0)),
            make_cfg(p=0.3, T=2.0, receiver=MnnReceiver()),
            make_cfg(p=0.3, receiver=PoissonGridReceiver(1.0, 1.0)),
        ]
        for cfg in cases:
            dv = mean_delay(cfg)
            assert dv.value >= 1.0 / cfg.p
