"""Flat key-value scenario and sweep files.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines
ignored.  Keys mirror the scenario fields (``lambda``, ``p``, ``T``,
``pathloss.variant`` ...).  Unknown keys are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .models import (
    BipolarReceiver,
    ConfigError,
    ConstantNoise,
    DeterministicFading,
    ExponentialNoise,
    IpnrReceiver,
    LogNormalFading,
    MnnReceiver,
    PathLoss,
    PoissonGridReceiver,
    RayleighFading,
    ScenarioConfig,
    Variability,
    WeibullFading,
    ZeroNoise,
)

SCENARIO_KEYS = {
    "lambda", "p", "T",
    "pathloss.variant", "pathloss.A", "pathloss.beta", "pathloss.u0",
    "fading.variant", "fading.mu", "fading.k", "fading.c",
    "fading.m", "fading.sigma",
    "noise.variant", "noise.w", "noise.nu",
    "receiver.variant", "receiver.r", "receiver.lambda0", "receiver.kappa",
    "variability.fading", "variability.noise",
    "cancel_interference",
}

SWEEP_KEYS = {
    "sweep.axis1.param", "sweep.axis1.min", "sweep.axis1.max",
    "sweep.axis1.steps", "sweep.axis1.spacing",
    "sweep.axis2.param", "sweep.axis2.min", "sweep.axis2.max",
    "sweep.axis2.steps", "sweep.axis2.spacing",
    "sweep.outputs",
}

SWEEPABLE = {
    "lambda", "p", "T", "pathloss.A", "pathloss.beta", "fading.mu",
    "noise.w", "noise.nu", "receiver.r", "receiver.lambda0",
    "receiver.kappa",
}

SWEEP_OUTPUTS = {
    "analytic_delay", "simulated_delay", "phase_verdict", "ccdf",
    "shannon_delay",
}


def parse_kv(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a dict; duplicate keys are errors."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _getf(kv, key, default=None):
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(kv[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: not a number: {kv[key]!r}") from None


def _getbool(kv, key, default=False):
    if key not in kv:
        return default
    v = kv[key].lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {kv[key]!r}")


def scenario_from_dict(kv: dict[str, str],
                       allowed_extra: set[str] = frozenset()) -> ScenarioConfig:
    unknown = set(kv) - SCENARIO_KEYS - allowed_extra
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")

    pl_variant = kv.get("pathloss.variant", "")
    if pl_variant not in ("powerlaw", "maxone", "shifted", "truncated"):
        raise ConfigError(f"pathloss.variant must be powerlaw|maxone|shifted|"
                          f"truncated, got {pl_variant!r}")
    pathloss = PathLoss(
        pl_variant,
        A=_getf(kv, "pathloss.A", 1.0),
        beta=_getf(kv, "pathloss.beta"),
        u0=_getf(kv, "pathloss.u0", math.nan) if pl_variant == "truncated" else None,
    )

    fv = kv.get("fading.variant", "")
    if fv == "rayleigh":
        fading = RayleighFading(_getf(kv, "fading.mu", 1.0))
    elif fv == "deterministic":
        fading = DeterministicFading(_getf(kv, "fading.mu", 1.0))
    elif fv == "weibull":
        fading = WeibullFading(k=_getf(kv, "fading.k"), c=_getf(kv, "fading.c", 1.0))
    elif fv == "lognormal":
        fading = LogNormalFading(m=_getf(kv, "fading.m", 0.0),
                                 sigma=_getf(kv, "fading.sigma"))
    else:
        raise ConfigError(f"fading.variant must be rayleigh|deterministic|"
                          f"weibull|lognormal, got {fv!r}")

    nv = kv.get("noise.variant", "")
    if nv == "zero":
        noise = ZeroNoise()
    elif nv == "constant":
        noise = ConstantNoise(_getf(kv, "noise.w"))
    elif nv == "exponential":
        noise = ExponentialNoise(_getf(kv, "noise.nu"))
    else:
        raise ConfigError(f"noise.variant must be zero|constant|exponential, "
                          f"got {nv!r}")

    rv = kv.get("receiver.variant", "")
    if rv == "bipolar":
        receiver = BipolarReceiver(_getf(kv, "receiver.r"))
    elif rv == "ipnr":
        receiver = IpnrReceiver(_getf(kv, "receiver.lambda0"))
    elif rv == "mnn":
        receiver = MnnReceiver()
    elif rv == "poisson_grid":
        receiver = PoissonGridReceiver(lambda0=_getf(kv, "receiver.lambda0"),
                                       kappa=_getf(kv, "receiver.kappa"))
    else:
        raise ConfigError(f"receiver.variant must be bipolar|ipnr|mnn|"
                          f"poisson_grid, got {rv!r}")

    variability = Variability(
        fading=kv.get("variability.fading", "fast"),
        noise=kv.get("variability.noise", "fast"),
    )

    return ScenarioConfig(
        lam=_getf(kv, "lambda"),
        p=_getf(kv, "p"),
        T=_getf(kv, "T"),
        pathloss=pathloss,
        fading=fading,
        noise=noise,
        receiver=receiver,
        variability=variability,
        cancel_interference=_getbool(kv, "cancel_interference"),
    )


def read_scenario(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(parse_kv(fh.read()))


@dataclass(frozen=True)
class SweepAxis:
    param: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    base_kv: dict[str, str]
    axes: tuple[SweepAxis, ...]
    outputs: tuple[str, ...]


def _axis_from(kv, prefix) -> SweepAxis | None:
    if f"{prefix}.param" not in kv:
        for suffix in ("min", "max", "steps", "spacing"):
            if f"{prefix}.{suffix}" in kv:
                raise ConfigError(f"{prefix}.{suffix} given without {prefix}.param")
        return None
    param = kv[f"{prefix}.param"]
    if param not in SWEEPABLE:
        raise ConfigError(f"{prefix}.param: {param!r} is not a sweepable "
                          f"scenario field")
    lo = _getf(kv, f"{prefix}.min")
    hi = _getf(kv, f"{prefix}.max")
    steps = int(_getf(kv, f"{prefix}.steps"))
    if steps < 2:
        raise ConfigError(f"{prefix}.steps must be >= 2")
    spacing = kv.get(f"{prefix}.spacing", "linear")
    if spacing == "linear":
        vals = [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    elif spacing == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError(f"{prefix}: log spacing needs positive bounds")
        vals = [lo * (hi / lo) ** (i / (steps - 1)) for i in range(steps)]
    else:
        raise ConfigError(f"{prefix}.spacing must be linear|log")
    return SweepAxis(param, tuple(vals))


def read_sweep(path) -> SweepSpec:
    with open(path, encoding="utf-8") as fh:
        kv = parse_kv(fh.read())
    scenario_kv = {k: v for k, v in kv.items() if not k.startswith("sweep.")}
    sweep_kv = {k: v for k, v in kv.items() if k.startswith("sweep.")}
    unknown = set(sweep_kv) - SWEEP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")

    base = scenario_from_dict(scenario_kv)
    axis1 = _axis_from(sweep_kv, "sweep.axis1")
    axis2 = _axis_from(sweep_kv, "sweep.axis2")
    if axis1 is None:
        raise ConfigError("a sweep needs sweep.axis1.*")
    axes = (axis1,) if axis2 is None else (axis1, axis2)

    outputs = tuple(s.strip() for s in kv.get("sweep.outputs",
                                              "analytic_delay,phase_verdict").split(","))
    bad = set(outputs) - SWEEP_OUTPUTS
    if bad:
        raise ConfigError(f"unknown sweep outputs: {', '.join(sorted(bad))}")
    return SweepSpec(base=base, base_kv=scenario_kv, axes=axes, outputs=outputs)


def override_scenario(kv: dict[str, str], updates: dict[str, float]) -> ScenarioConfig:
    """Rebuild a scenario with some numeric fields replaced."""
    merged = dict(kv)
    for key, value in updates.items():
        merged[key] = repr(float(value))
    return scenario_from_dict(merged)
