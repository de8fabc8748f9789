import numpy as np
import pytest

from manetdelay import (
    BipolarReceiver,
    ExponentialNoise,
    IpnrReceiver,
    MnnReceiver,
    PathLoss,
    RayleighFading,
    ScenarioConfig,
    Variability,
    ZeroNoise,
)

POWERLAW4 = PathLoss("powerlaw", 1.0, 4.0)


def make_cfg(lam=1.0, p=0.5, T=1.0, pathloss=POWERLAW4,
             fading=None, noise=None, receiver=None, variability=None,
             cancel_interference=False):
    return ScenarioConfig(
        lam=lam, p=p, T=T, pathloss=pathloss,
        fading=fading or RayleighFading(1.0),
        noise=noise or ZeroNoise(),
        receiver=receiver or BipolarReceiver(0.25),
        variability=variability or Variability(),
        cancel_interference=cancel_interference,
    )


@pytest.fixture
def bipolar_cfg():
    return make_cfg()


@pytest.fixture
def ipnr_finite_cfg():
    return make_cfg(receiver=IpnrReceiver(2.0))


@pytest.fixture
def ipnr_infinite_cfg():
    return make_cfg(receiver=IpnrReceiver(1.0))


@pytest.fixture
def mnn_cfg():
    # finite regime: the exact contention coefficient sits below pi
    return make_cfg(p=0.3, T=2.0, receiver=MnnReceiver())


def slow_exp_noise_cfg(r):
    return make_cfg(noise=ExponentialNoise(2.0), receiver=BipolarReceiver(r),
                    variability=Variability(fading="fast", noise="slow"))


def rng_of(seed):
    return np.random.default_rng(seed)
