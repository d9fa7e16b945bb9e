"""U(1) gauge layer over a prescribed background field.

Local phase changes psi -> exp(i theta) psi are compensated by
A_mu -> A_mu + (1/q) d_mu theta, so that D_mu = d_mu - i q A_mu transforms
like psi itself.  The background field is never evolved; its field strength
enters the Lagrangian density as a diagnostic only.

Sign convention for the field term (1+1 dimensions, mostly-minus metric):
F_{mu nu} F^{mu nu} = -2 F01^2, so -(1/4q^2) F F = +(1/2q^2) F01^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import derivatives as d
from .errors import IncompatibleGridsError, InvalidParameterError
from .potentials import CubicNonlinear, MexicanHat, PotentialSpec, effective_potential, potential_profile
from .propagator import EvolutionConfig, Trajectory
from .state import SpatialGrid, WaveFunction

CONVENTION = "mostly-minus"


def _field_array(values, n: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape[0] != n:
        raise InvalidParameterError(f"{name} needs {n} values, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GaugeField:
    grid: SpatialGrid
    a0: np.ndarray = field(repr=False)
    a1: np.ndarray = field(repr=False)
    charge: float = 1.0

    def __post_init__(self):
        n = self.grid.n_points
        object.__setattr__(self, "a0", _field_array(self.a0, n, "a0"))
        object.__setattr__(self, "a1", _field_array(self.a1, n, "a1"))
        if not math.isfinite(self.charge) or self.charge == 0:
            raise InvalidParameterError(f"charge must be finite and non-zero, got {self.charge}")

    @classmethod
    def zero(cls, grid: SpatialGrid, charge: float = 1.0) -> "GaugeField":
        return cls(grid, np.zeros(grid.n_points), np.zeros(grid.n_points), charge)


@dataclass(frozen=True, eq=False)
class GaugeTransform:
    """Phase theta(x) on one time slice and its time derivative (zero if static)."""

    theta: np.ndarray
    theta_dot: Optional[np.ndarray] = None

    def __post_init__(self):
        theta = _field_array(self.theta, len(np.atleast_1d(self.theta)), "theta")
        n = theta.shape[0]
        theta_dot = np.zeros(n) if self.theta_dot is None else self.theta_dot
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "theta_dot", _field_array(theta_dot, n, "theta_dot"))

    def __add__(self, other: "GaugeTransform") -> "GaugeTransform":
        return GaugeTransform(self.theta + other.theta, self.theta_dot + other.theta_dot)


@dataclass(frozen=True, eq=False)
class NoetherRecord:
    charge: float
    j0: np.ndarray = field(repr=False)
    j1: np.ndarray = field(repr=False)


def _same_grid(grid: SpatialGrid, other: SpatialGrid):
    if grid != other:
        raise IncompatibleGridsError(f"grid mismatch: {grid} vs {other}")


def apply_gauge_transform(psi: WaveFunction, A: GaugeField, g: GaugeTransform):
    """Return (exp(i theta) psi, A shifted by (theta_dot, theta_x) / q)."""
    _same_grid(psi.grid, A.grid)
    if g.theta.shape[0] != psi.grid.n_points:
        raise IncompatibleGridsError("gauge transform has a different number of points than the grid")
    psi_new = WaveFunction(psi.grid, np.exp(1j * g.theta) * psi.amplitudes)
    dtheta = d.gradient(g.theta, A.grid)
    A_new = GaugeField(A.grid, A.a0 + g.theta_dot / A.charge, A.a1 + dtheta / A.charge, A.charge)
    return psi_new, A_new


def covariant_derivative(psi: WaveFunction, A: GaugeField, direction: str = "space",
                         dpsi_dt: Optional[np.ndarray] = None) -> np.ndarray:
    """D_x psi = psi_x - i q A1 psi, or D_0 psi = psi_t - i q A0 psi.

    The time direction needs ``dpsi_dt`` from the caller (e.g. a finite
    difference along a trajectory).
    """
    _same_grid(psi.grid, A.grid)
    amp = psi.amplitudes
    if direction == "space":
        return d.gradient(amp, psi.grid) - 1j * A.charge * A.a1 * amp
    if direction == "time":
        if dpsi_dt is None:
            raise InvalidParameterError("time-direction covariant derivative needs dpsi_dt")
        dpsi_dt = np.asarray(dpsi_dt, dtype=np.complex128)
        if dpsi_dt.shape != amp.shape:
            raise InvalidParameterError("dpsi_dt length does not match the grid")
        return dpsi_dt - 1j * A.charge * A.a0 * amp
    raise InvalidParameterError(f"direction must be 'space' or 'time', got {direction!r}")


def schrodinger_time_derivative(psi: WaveFunction, A: GaugeField, hbar: float = 1.0, mass: float = 1.0,
                                potential: Optional[np.ndarray] = None) -> np.ndarray:
    """psi_t implied by the gauged equation i hbar D_0 psi = -(hbar^2/2m) D_x D_x psi + V psi."""
    dx_psi = covariant_derivative(psi, A, "space")
    dxdx = d.gradient(dx_psi, psi.grid) - 1j * A.charge * A.a1 * dx_psi
    h_psi = -(hbar**2) / (2.0 * mass) * dxdx
    if potential is not None:
        h_psi = h_psi + np.asarray(potential) * psi.amplitudes
    return -1j / hbar * h_psi + 1j * A.charge * A.a0 * psi.amplitudes


def field_strength(A_before: GaugeField, A_after: GaugeField, dt: float) -> np.ndarray:
    """F01 = d_t A1 - d_x A0 across one time slice (A0 averaged over the slice)."""
    _same_grid(A_before.grid, A_after.grid)
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    a0_mid = 0.5 * (A_before.a0 + A_after.a0)
    return (A_after.a1 - A_before.a1) / dt - d.gradient(a0_mid, A_before.grid)


def _nonlinear_lagrangian(nonlinearity: Optional[PotentialSpec], rho: np.ndarray) -> np.ndarray:
    if nonlinearity is None:
        return np.zeros_like(rho)
    if isinstance(nonlinearity, CubicNonlinear):
        return -0.5 * nonlinearity.gamma * rho**2
    if isinstance(nonlinearity, MexicanHat):
        return nonlinearity.mu2 * rho - nonlinearity.lam * rho**2
    raise InvalidParameterError(f"nonlinearity must be cubic or Mexican hat, got {nonlinearity!r}")


def lagrangian_density(psi: WaveFunction, dpsi_dt, A: GaugeField, F01, nonlinearity: Optional[PotentialSpec] = None,
                       hbar: float = 1.0, mass: float = 1.0, potential=None) -> np.ndarray:
    """Pointwise gauge-invariant Lagrangian density.

    (1/2q^2) F01^2 + (i hbar/2)(psi* D0 psi - psi (D0 psi)*) - (hbar^2/2m)|Dx psi|^2 + L_N,
    with L_N = -gamma/2 |psi|^4 or mu2 |psi|^2 - lam |psi|^4.  An external
    potential array, if given, adds -V |psi|^2.
    """
    n = psi.grid.n_points
    F01 = np.asarray(F01, dtype=float)
    dpsi_dt = np.asarray(dpsi_dt, dtype=np.complex128)
    if F01.shape != (n,) or dpsi_dt.shape != (n,):
        raise InvalidParameterError(f"F01 and dpsi_dt must have {n} entries")
    amp = psi.amplitudes
    rho = np.abs(amp) ** 2
    d0 = covariant_derivative(psi, A, "time", dpsi_dt)
    dx_psi = covariant_derivative(psi, A, "space")
    field_term = F01**2 / (2.0 * A.charge**2)
    time_term = np.real(0.5j * hbar * (np.conj(amp) * d0 - amp * np.conj(d0)))
    kinetic = -(hbar**2) / (2.0 * mass) * np.abs(dx_psi) ** 2
    out = field_term + time_term + kinetic + _nonlinear_lagrangian(nonlinearity, rho)
    if potential is not None:
        potential = np.asarray(potential, dtype=float)
        if potential.shape != (n,):
            raise InvalidParameterError(f"potential must have {n} entries")
        out = out - potential * rho
    return out


def noether(psi: WaveFunction, A: Optional[GaugeField] = None, hbar: float = 1.0, mass: float = 1.0) -> NoetherRecord:
    """Charge density |psi|^2, current (hbar/m) Im(psi* D_x psi) and total charge."""
    if A is None:
        A = GaugeField.zero(psi.grid)
    j0 = np.abs(psi.amplitudes) ** 2
    j1 = hbar / mass * np.imag(np.conj(psi.amplitudes) * covariant_derivative(psi, A, "space"))
    j0.flags.writeable = False
    j1.flags.writeable = False
    return NoetherRecord(float(np.sum(j0) * psi.grid.dx), j0, j1)


def continuity_residuals(trajectory: Trajectory, A: Optional[GaugeField] = None,
                         hbar: float = 1.0, mass: float = 1.0) -> np.ndarray:
    """Integral of d_t j0 + d_x j1 over the domain at each interior record."""
    states, t = trajectory.states, trajectory.times
    if len(states) < 3:
        raise InvalidParameterError("continuity check needs at least 3 recorded states")
    grid = states[0].grid
    records = [noether(s, A, hbar, mass) for s in states]
    out = []
    for n in range(1, len(states) - 1):
        dj0 = (records[n + 1].j0 - records[n - 1].j0) / (t[n + 1] - t[n - 1])
        div = d.gradient(records[n].j1, grid)
        out.append(np.sum(dj0 + div) * grid.dx)
    return np.array(out)


def euler_lagrange_residual(trajectory: Trajectory, spec: PotentialSpec, cfg: EvolutionConfig) -> float:
    """max |i hbar psi_t - (-(hbar^2/2m) psi_xx + V psi)| over interior records (A = 0).

    psi_t is a centred difference along the trajectory; psi_xx is the Fourier
    derivative on periodic grids and the three-point Laplacian otherwise, so
    on periodic grids the check is independent of the integrator's stencil.
    """
    states, t = trajectory.states, trajectory.times
    if len(states) < 3:
        raise InvalidParameterError("Euler-Lagrange residual needs at least 3 recorded states")
    grid = states[0].grid
    c = -(cfg.hbar**2) / (2.0 * cfg.mass)
    v_static = None if spec.state_dependent else potential_profile(spec, grid)
    worst = 0.0
    for n in range(1, len(states) - 1):
        amp = states[n].amplitudes
        dpsi = (states[n + 1].amplitudes - states[n - 1].amplitudes) / (t[n + 1] - t[n - 1])
        v = v_static if v_static is not None else effective_potential(spec, grid.x, np.abs(amp) ** 2)
        h_psi = c * d.laplacian(amp, grid) + v * amp
        worst = max(worst, float(np.max(np.abs(1j * cfg.hbar * dpsi - h_psi))))
    return worst


def random_smooth_theta(grid: SpatialGrid, rng: np.random.Generator, n_modes: int = 4,
                        amplitude: float = 1.0) -> np.ndarray:
    """Random low-order Fourier series in x (periodic on the grid's domain)."""
    x = (grid.x - grid.x_min) / grid.length
    theta = np.full(grid.n_points, rng.uniform(-np.pi, np.pi))
    for m in range(1, n_modes + 1):
        a, b = rng.normal(scale=amplitude / m, size=2)
        theta += a * np.cos(2 * np.pi * m * x) + b * np.sin(2 * np.pi * m * x)
    return theta


def gauge_check(psi: WaveFunction, A: GaugeField, g: GaugeTransform, theta_description: str = "",
                hbar: float = 1.0, mass: float = 1.0, nonlinearity: Optional[PotentialSpec] = None,
                dt: float = 1e-3) -> dict:
    """Evaluate every gauge-covariant quantity before and after ``g`` and report the differences.

    Each side is computed independently from its own (psi, A).  The time
    derivative on each side comes from the gauged Schrodinger equation, and
    the field strength uses a background advanced by ``dt`` under theta + dt*theta_dot.
    """
    psi2, A2 = apply_gauge_transform(psi, A, g)
    phase = np.exp(1j * g.theta)

    dx1 = covariant_derivative(psi, A, "space")
    dx2 = covariant_derivative(psi2, A2, "space")

    later = GaugeTransform(g.theta + dt * g.theta_dot, g.theta_dot)
    _, A2_after = apply_gauge_transform(psi, A, later)
    f1 = field_strength(A, A, dt)
    f2 = field_strength(A2, A2_after, dt)

    dt1 = schrodinger_time_derivative(psi, A, hbar, mass)
    dt2 = schrodinger_time_derivative(psi2, A2, hbar, mass)
    l1 = lagrangian_density(psi, dt1, A, f1, nonlinearity, hbar, mass)
    l2 = lagrangian_density(psi2, dt2, A2, f2, nonlinearity, hbar, mass)

    q1 = noether(psi, A, hbar, mass).charge
    q2 = noether(psi2, A2, hbar, mass).charge
    return {
        "theta_description": theta_description,
        "max_abs_density_diff": float(np.max(np.abs(psi2.density - psi.density))),
        "max_covariance_residual": float(np.max(np.abs(dx2 - phase * dx1))),
        "max_field_strength_diff": float(np.max(np.abs(f2 - f1))),
        "max_lagrangian_diff": float(np.max(np.abs(l2 - l1))),
        "charge_before": q1,
        "charge_after": q2,
        "convention": CONVENTION,
    }


GAUGE_TOLERANCES = {
    "max_abs_density_diff": 1e-14,
    "max_covariance_residual": 1e-8,
    "max_field_strength_diff": 1e-8,
    "max_lagrangian_diff": 1e-8,
    "charge_diff": 1e-12,
}


def report_passes(report: dict) -> bool:
    tol = GAUGE_TOLERANCES
    return (
        all(report[k] <= tol[k] for k in tol if k in report)
        and abs(report["charge_after"] - report["charge_before"]) <= tol["charge_diff"]
    )
