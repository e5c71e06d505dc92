"""Synthetic process data for two regimes.

``monotonic`` is a fermentation-like batch: the product concentration follows
a logistic growth curve and every sensor is a smooth function of the growth
state (biomass, off-gas, heat, dissolved oxygen, substrate, ...) or a slowly
varying operating input.  Noise goes into the sensors only, so the target is
strictly increasing.

``drifting`` is a continuous unit: smooth quasi-periodic sensors and a
property that is a locally linear but slowly rotating function of them, so a
linear model fit on a window goes stale as the window spans more time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .numeric import ContractError

REGIMES = ("monotonic", "drifting")


@dataclass(frozen=True)
class SimConfig:
    regime: str = "monotonic"
    n_samples: int | None = None    # monotonic 318, drifting 2394
    n_variables: int | None = None  # monotonic 15, drifting 7
    noise_sd: float | None = None
    seed: int = 0
    drift_period: int = 240

    def resolved(self) -> "SimConfig":
        mono = self.regime == "monotonic"
        return SimConfig(
            regime=self.regime,
            n_samples=self.n_samples or (318 if mono else 2394),
            n_variables=self.n_variables or (15 if mono else 7),
            noise_sd=self.noise_sd if self.noise_sd is not None else (1e-3 if mono else 0.01),
            seed=self.seed,
            drift_period=self.drift_period,
        )

    def validate(self) -> None:
        if self.regime not in REGIMES:
            raise ContractError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.n_samples < 50 or self.n_variables < 3 or self.noise_sd < 0:
            raise ContractError("need n_samples >= 50, n_variables >= 3 and noise_sd >= 0")
        if self.drift_period < 2:
            raise ContractError("drift_period must be >= 2")


def generate(cfg: SimConfig) -> Dataset:
    cfg = cfg.resolved()
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    if cfg.regime == "monotonic":
        X, y = _monotonic(cfg, rng)
    else:
        X, y = _drifting(cfg, rng)
    names = tuple(f"x{j + 1}" for j in range(cfg.n_variables))
    return Dataset(
        name=f"sim-{cfg.regime}-s{cfg.seed}", X=X, y=y, column_names=names, y_name="y",
    )


def _monotonic(cfg: SimConfig, rng: np.random.Generator):
    n, c = cfg.n_samples, cfg.n_variables
    s = np.linspace(0.0, 1.0, n)
    # logistic growth, titre in g/L; stops short of saturation so every step rises
    rate, mid, top = 9.0, 0.55, 1.4
    g = 1.0 / (1.0 + np.exp(-rate * (s - mid)))
    y = top * g
    dg = rate * g * (1.0 - g)                 # growth rate, peaks mid-batch
    base = [
        g ** 0.8,                             # biomass
        dg / dg.max(),                        # CO2 evolution
        0.6 * dg / dg.max() + 0.4 * g,        # generated heat
        1.0 - 0.7 * g,                        # dissolved oxygen
        np.exp(-3.0 * g),                     # substrate
        1.0 + 0.3 * s,                        # culture volume
        0.5 + 0.2 * np.tanh(4.0 * (s - 0.3)),  # substrate feed rate
        np.sqrt(g),                           # base flow for pH control
        0.3 * s + 0.2 * g ** 2,               # cooling water flow
    ]
    X = np.empty((n, c))
    for j in range(c):
        if j < len(base):
            col = base[j]
        else:
            # further sensors: random smooth mixtures of the growth signals
            a = rng.normal(size=3)
            col = a[0] * g + a[1] * g ** 2 + a[2] * dg / dg.max()
        gain = rng.uniform(0.5, 2.0)
        offset = rng.uniform(-1.0, 1.0)
        X[:, j] = offset + gain * col + rng.normal(0.0, cfg.noise_sd, n)
    return X, y


def _smooth_signal(rng: np.random.Generator, t: np.ndarray, n_waves: int = 3) -> np.ndarray:
    out = np.zeros_like(t)
    for _ in range(n_waves):
        period = rng.uniform(30.0, 300.0)
        out += rng.uniform(0.3, 1.0) * np.sin(2 * np.pi * t / period + rng.uniform(0, 2 * np.pi))
    return out


def _drifting(cfg: SimConfig, rng: np.random.Generator):
    n, c = cfg.n_samples, cfg.n_variables
    t = np.arange(n, dtype=np.float64)
    X0 = np.column_stack([_smooth_signal(rng, t) for _ in range(c)])
    phase = rng.uniform(0, 2 * np.pi, c)
    amp = rng.uniform(0.5, 1.5, c)
    # coefficients rotate with the drift period
    beta = amp * np.cos(2 * np.pi * t[:, None] / cfg.drift_period + phase)
    y = np.sum(beta * X0, axis=1) + 0.3 * np.sin(X0[:, 0] * X0[:, 1])
    X = X0 + rng.normal(0.0, cfg.noise_sd, X0.shape)
    return X, y
