"""Complex semantic wavefunctions sampled on a 1-D grid.

A state is the complex field psi = a + i b over the semantic coordinate.
Its modulus |psi| is the projection back onto the real embedding magnitude;
|psi|^2 integrates to one after :func:`normalize`.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    DegenerateStateError,
    IncompatibleGridsError,
    InvalidParameterError,
)

PERIODIC = "periodic"
REFLECTING = "reflecting"
BOUNDARIES = (PERIODIC, REFLECTING)

HBAR_DEFAULT = 1.0


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on [x_min, x_max) with spacing (x_max - x_min) / n_points.

    Periodic grids store x_min but not x_max (the two are identified).
    Reflecting grids are cell-centred, with hard walls exactly at x_min and
    x_max, so their points are symmetric about the midpoint.
    """

    n_points: int
    x_min: float
    x_max: float
    boundary: str = PERIODIC

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise InvalidParameterError(f"n_points must be an integer >= 8, got {self.n_points}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidParameterError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise InvalidParameterError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if self.boundary not in BOUNDARIES:
            raise InvalidParameterError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def periodic(self) -> bool:
        return self.boundary == PERIODIC

    @property
    def x(self) -> np.ndarray:
        offset = 0.0 if self.periodic else 0.5
        return self.x_min + (np.arange(self.n_points) + offset) * self.dx

    def mirror_index(self) -> np.ndarray:
        """Index map i -> j with x_j = x_min + x_max - x_i (reflection about the midpoint)."""
        i = np.arange(self.n_points)
        if self.periodic:
            return (-i) % self.n_points
        return self.n_points - 1 - i

    def to_dict(self) -> dict:
        return {"n": self.n_points, "x_min": self.x_min, "x_max": self.x_max, "boundary": self.boundary}

    @classmethod
    def from_dict(cls, d: dict) -> "SpatialGrid":
        try:
            return cls(int(d["n"]), float(d["x_min"]), float(d["x_max"]), d.get("boundary", PERIODIC))
        except (KeyError, TypeError) as exc:
            raise InvalidParameterError(f"malformed grid description: {d!r}") from exc


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: SpatialGrid
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amp.shape[0] != self.grid.n_points:
            raise InvalidParameterError(
                f"expected {self.grid.n_points} amplitudes, got {amp.shape[0]}"
            )
        if not np.all(np.isfinite(amp)):
            raise InvalidParameterError("amplitudes must be finite")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @property
    def psi(self) -> np.ndarray:
        return self.amplitudes

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm_squared(self) -> float:
        return float(np.sum(self.density) * self.grid.dx)

    @property
    def position_expectation(self) -> float:
        return float(np.sum(self.grid.x * self.density) * self.grid.dx / self.norm_squared)

    def with_amplitudes(self, amplitudes) -> "WaveFunction":
        return WaveFunction(self.grid, amplitudes)

    def __mul__(self, c: complex) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes * c)

    __rmul__ = __mul__

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "re": self.amplitudes.real.tolist(),
            "im": self.amplitudes.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WaveFunction":
        if not isinstance(d, dict) or not {"grid", "re", "im"} <= d.keys():
            raise InvalidParameterError("wavefunction JSON needs keys 'grid', 're', 'im'")
        grid = SpatialGrid.from_dict(d["grid"])
        re, im = d["re"], d["im"]
        if len(re) != len(im):
            raise InvalidParameterError("'re' and 'im' have different lengths")
        try:
            amp = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidParameterError(f"non-numeric amplitudes: {exc}") from exc
        return cls(grid, amp)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "WaveFunction":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidParameterError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_csv(self) -> str:
        g = self.grid
        buf = io.StringIO()
        buf.write(f"# n={g.n_points} x_min={g.x_min!r} x_max={g.x_max!r} boundary={g.boundary}\n")
        buf.write("re,im\n")
        for z in self.amplitudes:
            buf.write(f"{float(z.real)!r},{float(z.imag)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WaveFunction":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise InvalidParameterError("CSV state must start with a '# n=... x_min=...' comment line")
        meta = dict(item.split("=", 1) for item in lines[0][1:].split())
        grid = SpatialGrid.from_dict(meta)
        rows = [ln for ln in lines[1:] if ln.strip() and not ln.startswith("re")]
        try:
            values = np.array([[float(v) for v in ln.split(",")] for ln in rows])
        except ValueError as exc:
            raise InvalidParameterError(f"non-numeric CSV row: {exc}") from exc
        if values.ndim != 2 or values.shape[1] != 2:
            raise InvalidParameterError("CSV state needs exactly two columns (re, im)")
        return cls(grid, values[:, 0] + 1j * values[:, 1])


def load_state(path) -> WaveFunction:
    text = open(path, encoding="utf-8").read()
    if str(path).endswith(".csv"):
        return WaveFunction.from_csv(text)
    return WaveFunction.from_json(text)


def save_state(psi: WaveFunction, path, fmt: str = "json") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(psi.to_csv() if fmt == "csv" else psi.to_json())


# -- operations ------------------------------------------------------------


def make_gaussian(grid: SpatialGrid, center: float, width: float, momentum: float = 0.0) -> WaveFunction:
    """Normalized Gaussian packet exp(-(x-c)^2 / 4w^2) exp(i p x / hbar), hbar = 1.

    ``width`` is the standard deviation of the resulting density |psi|^2.
    """
    if not width > 0:
        raise InvalidParameterError(f"width must be positive, got {width}")
    if not grid.x_min <= center <= grid.x_max:
        raise InvalidParameterError(f"center {center} outside grid [{grid.x_min}, {grid.x_max}]")
    x = grid.x
    amp = np.exp(-((x - center) ** 2) / (4.0 * width**2)) * np.exp(1j * momentum * x / HBAR_DEFAULT)
    return normalize(WaveFunction(grid, amp))


def normalize(psi: WaveFunction) -> WaveFunction:
    n2 = psi.norm_squared
    if not n2 > 0:
        raise DegenerateStateError("cannot normalize a zero-norm state")
    return WaveFunction(psi.grid, psi.amplitudes / math.sqrt(n2))


def _check_same_grid(*states: WaveFunction) -> SpatialGrid:
    grid = states[0].grid
    for s in states[1:]:
        if s.grid != grid:
            raise IncompatibleGridsError(f"grid mismatch: {grid} vs {s.grid}")
    return grid


def inner_product(psi: WaveFunction, phi: WaveFunction) -> complex:
    """<psi|phi> = sum conj(psi_i) phi_i dx (rectangle rule)."""
    grid = _check_same_grid(psi, phi)
    return complex(np.vdot(psi.amplitudes, phi.amplitudes) * grid.dx)


Component = tuple  # (int | WaveFunction, complex)


@dataclass(frozen=True)
class SuperpositionSpec:
    """Components (basis index or state, coefficient); indices refer to ``basis``."""

    components: Sequence[Component]
    basis: Sequence[WaveFunction] = ()

    def __post_init__(self):
        if len(self.components) == 0:
            raise InvalidParameterError("superposition needs at least one component")
        for _, c in self.components:
            if not np.isfinite(complex(c)):
                raise InvalidParameterError(f"non-finite coefficient {c}")

    def resolve(self) -> list[tuple[WaveFunction, complex]]:
        out = []
        for ref, c in self.components:
            if isinstance(ref, WaveFunction):
                state = ref
            else:
                try:
                    state = self.basis[int(ref)]
                except IndexError as exc:
                    raise InvalidParameterError(f"basis index {ref} out of range") from exc
            out.append((state, complex(c)))
        return out


def superpose(spec: Union[SuperpositionSpec, Sequence[Component]], normalized: bool = True) -> WaveFunction:
    """Pointwise sum of c_i psi_i, normalized unless ``normalized=False``."""
    if not isinstance(spec, SuperpositionSpec):
        spec = SuperpositionSpec(list(spec))
    terms = spec.resolve()
    grid = _check_same_grid(*(s for s, _ in terms))
    total = np.zeros(grid.n_points, dtype=np.complex128)
    for state, c in terms:
        total = total + c * state.amplitudes
    result = WaveFunction(grid, total)
    if not normalized:
        return result
    # rounding leaves ~1e-16 residue after exact cancellation
    scale = max(abs(c) * math.sqrt(s.norm_squared) for s, c in terms)
    if math.sqrt(result.norm_squared) <= 1e-12 * scale:
        raise DegenerateStateError("superposition interferes to the zero state")
    return normalize(result)


def embedding_projection(psi) -> np.ndarray:
    """Pointwise modulus sqrt(a^2 + b^2), the real embedding-space magnitude."""
    amp = psi.amplitudes if isinstance(psi, WaveFunction) else np.asarray(psi, dtype=np.complex128)
    return np.abs(amp)
