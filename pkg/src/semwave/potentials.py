"""Potential landscapes: free, harmonic, double-well, cubic self-interaction, Mexican hat.

The first three depend on position only.  ``CubicNonlinear`` and
``MexicanHat`` depend on the local density |psi|^2 instead.

``evaluate`` follows a fixed convention per variant:

* ``CubicNonlinear`` returns the potential gamma*|psi|^2 that multiplies psi
  in the NLSE (its energy density is gamma/2 |psi|^4).
* ``MexicanHat`` returns the energy density -mu2 |psi|^2 + lam |psi|^4
  (minus the Lagrangian term mu2|psi|^2 - lam|psi|^4).  The potential that
  multiplies psi in the dynamics is its derivative, see :func:`effective_potential`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from .errors import InvalidParameterError
from .state import SpatialGrid, WaveFunction


def _finite(name, value):
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value}")


def _positive(name, value):
    _finite(name, value)
    if value <= 0:
        raise InvalidParameterError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class Free:
    type = "free"
    state_dependent = False


@dataclass(frozen=True)
class Harmonic:
    mass: float = 1.0
    omega: float = 1.0
    type = "harmonic"
    state_dependent = False

    def __post_init__(self):
        _positive("mass", self.mass)
        _positive("omega", self.omega)

    @property
    def spring_constant(self) -> float:
        return self.mass * self.omega**2


@dataclass(frozen=True)
class DoubleWell:
    a: float = 1.0
    b: float = 2.0
    type = "double_well"
    state_dependent = False

    def __post_init__(self):
        _positive("a", self.a)
        _positive("b", self.b)


@dataclass(frozen=True)
class CubicNonlinear:
    gamma: float
    type = "cubic_nonlinear"
    state_dependent = True

    def __post_init__(self):
        _finite("gamma", self.gamma)


@dataclass(frozen=True)
class MexicanHat:
    mu2: float
    lam: float
    type = "mexican_hat"
    state_dependent = True

    def __post_init__(self):
        _finite("mu2", self.mu2)
        _positive("lam", self.lam)

    @property
    def stationary_density(self) -> float:
        """|psi|^2 at which the energy density is extremal, mu2 / (2 lam)."""
        return self.mu2 / (2.0 * self.lam)


PotentialSpec = Union[Free, Harmonic, DoubleWell, CubicNonlinear, MexicanHat]

_BY_TYPE = {cls.type: cls for cls in (Free, Harmonic, DoubleWell, CubicNonlinear, MexicanHat)}
_JSON_KEYS = {"lam": "lambda"}


def evaluate(spec: PotentialSpec, x, psi_abs2=0.0):
    """Potential value at position ``x`` and local density ``psi_abs2``.

    Works elementwise on arrays.  Raises if any density is negative.
    """
    rho = np.asarray(psi_abs2, dtype=float)
    if np.any(rho < 0):
        raise InvalidParameterError("psi_abs2 must be non-negative")
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Free):
        out = np.zeros(np.broadcast(x, rho).shape)
    elif isinstance(spec, Harmonic):
        out = 0.5 * spec.mass * spec.omega**2 * x**2 + 0.0 * rho
    elif isinstance(spec, DoubleWell):
        out = spec.a * (x**2 - spec.b**2) ** 2 + 0.0 * rho
    elif isinstance(spec, CubicNonlinear):
        out = spec.gamma * rho + 0.0 * x
    elif isinstance(spec, MexicanHat):
        out = -spec.mu2 * rho + spec.lam * rho**2 + 0.0 * x
    else:
        raise InvalidParameterError(f"unknown potential spec {spec!r}")
    return float(out) if out.ndim == 0 else out


def effective_potential(spec: PotentialSpec, x, psi_abs2=0.0):
    """The local potential multiplying psi in i hbar psi_t = H psi."""
    if isinstance(spec, MexicanHat):
        rho = np.asarray(psi_abs2, dtype=float)
        return -spec.mu2 + 2.0 * spec.lam * rho + 0.0 * np.asarray(x, dtype=float)
    return evaluate(spec, x, psi_abs2)


def energy_density(spec: PotentialSpec, x, psi_abs2):
    """Potential-energy density whose integral enters the energy functional."""
    rho = np.asarray(psi_abs2, dtype=float)
    if isinstance(spec, CubicNonlinear):
        return 0.5 * spec.gamma * rho**2 + 0.0 * np.asarray(x, dtype=float)
    if isinstance(spec, MexicanHat):
        return evaluate(spec, x, rho)
    return evaluate(spec, x, rho) * rho


def potential_profile(spec: PotentialSpec, grid: SpatialGrid, psi: Optional[WaveFunction] = None) -> np.ndarray:
    if spec.state_dependent:
        if psi is None:
            raise InvalidParameterError(f"{spec.type} potential needs a state to evaluate")
        return np.asarray(evaluate(spec, grid.x, psi.density))
    return np.asarray(evaluate(spec, grid.x, 0.0))


def to_dict(spec: PotentialSpec) -> dict:
    d = {"type": spec.type}
    for key, value in asdict(spec).items():
        d[_JSON_KEYS.get(key, key)] = value
    return d


def from_dict(d: dict) -> PotentialSpec:
    try:
        cls = _BY_TYPE[d["type"]]
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"unknown potential description {d!r}") from exc
    reverse = {v: k for k, v in _JSON_KEYS.items()}
    kwargs = {reverse.get(k, k): float(v) for k, v in d.items() if k != "type"}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise InvalidParameterError(f"bad parameters for {d['type']}: {exc}") from exc
