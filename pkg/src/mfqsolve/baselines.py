"""
Classical reference solutions for the cubic toy model.

Forward Euler and classical RK4 on the step grid of an OdeSpec, the closed
form obtained from the Bernoulli substitution y = x**-2, a perturbed
initial-condition ensemble mean, and an Euler-Maruyama integrator whose
noise increments are all drawn before the first step.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .ode import OdeSpec
from .rng import check_seed, generator


@dataclass(frozen=True)
class Trajectory:
    method: str
    t: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if t.shape != x.shape or t.ndim != 1:
            raise DomainError("t and x must be 1-d arrays of equal length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise DomainError("trajectory times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.x.tolist()))

    def __len__(self) -> int:
        return self.t.size


@dataclass(frozen=True)
class EnsembleSpec:
    size: int = 100
    sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.size < 1:
            raise DomainError(f"ensemble size must be >= 1, got {self.size}")
        if self.sigma < 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")
        check_seed(self.seed)


def _grid(ode: OdeSpec) -> np.ndarray:
    return ode.dt * np.arange(ode.steps + 1)


def _euler_path(ode: OdeSpec, x0):
    x = np.empty((ode.steps + 1,) + np.shape(x0))
    x[0] = x0
    for k in range(ode.steps):
        x[k + 1] = x[k] + ode.dt * ode.rhs(x[k])
    return x


def euler(ode: OdeSpec) -> Trajectory:
    return Trajectory("euler", _grid(ode), _euler_path(ode, ode.x0))


def rk4(ode: OdeSpec) -> Trajectory:
    f, h = ode.rhs, ode.dt
    x = np.empty(ode.steps + 1)
    x[0] = ode.x0
    for k in range(ode.steps):
        y = x[k]
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        x[k + 1] = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Trajectory("rk4", _grid(ode), x)


def analytic(ode: OdeSpec, t):
    """Closed-form x(t) for dx/dt = c x - alpha x**3 (scalar or array t)."""
    c, a, x0 = ode.linear_coeff, ode.cubic_coeff, ode.x0
    t = np.asarray(t, dtype=float)
    if c == 0:
        denom = 1.0 + 2.0 * a * x0**2 * t
        growth = np.ones_like(t)
    else:
        # expm1 keeps small-t accuracy
        denom = 1.0 + (a / c) * x0**2 * np.expm1(2.0 * c * t)
        growth = np.exp(c * t)
    if np.any(denom <= 0):
        raise DomainError("closed form undefined: solution blows up before t")
    x = x0 * growth / np.sqrt(denom)
    return float(x) if x.ndim == 0 else x


def analytic_trajectory(ode: OdeSpec) -> Trajectory:
    t = _grid(ode)
    return Trajectory("analytic", t, analytic(ode, t))


def ensemble_mean(ode: OdeSpec, spec: EnsembleSpec = EnsembleSpec()) -> Trajectory:
    """Mean of Euler runs started from x0 + sigma * z, z ~ N(0, 1).

    Member m draws z from its own sub-stream (seed, m). For two or more
    members the draws are centred so the initial ensemble mean is x0 itself;
    a one-member ensemble is a single perturbed run.
    """
    z = np.array([generator(spec.seed, m).standard_normal() for m in range(spec.size)])
    if spec.size > 1:
        z -= z.mean()
    paths = _euler_path(ode, ode.x0 + spec.sigma * z)
    return Trajectory("ensemble_mean", _grid(ode), paths.mean(axis=1))


def euler_maruyama(ode: OdeSpec, noise_sigma: float, seed: int = 0) -> Trajectory:
    if noise_sigma < 0:
        raise DomainError(f"noise_sigma must be >= 0, got {noise_sigma}")
    w = generator(seed).standard_normal(ode.steps)
    kick = math.sqrt(ode.dt) * noise_sigma * w
    x = np.empty(ode.steps + 1)
    x[0] = ode.x0
    for k in range(ode.steps):
        x[k + 1] = x[k] + ode.dt * ode.rhs(x[k]) + kick[k]
    return Trajectory("euler_maruyama", _grid(ode), x)


def fmt(v: float) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(v))


def baseline_csv(ode: OdeSpec) -> str:
    """``step,t,x_euler,x_rk4,x_analytic`` on the common grid."""
    e, r, a = euler(ode), rk4(ode), analytic_trajectory(ode)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "t", "x_euler", "x_rk4", "x_analytic"])
    for k in range(ode.steps + 1):
        w.writerow([k, fmt(e.t[k]), fmt(e.x[k]), fmt(r.x[k]), fmt(a.x[k])])
    return buf.getvalue()
