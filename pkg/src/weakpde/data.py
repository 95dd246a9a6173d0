"""Grid and field containers, noise injection and the WSND dataset format.

Arrays are stored with the first index varying slowest and time as the last
axis, i.e. ``values[i_1, ..., i_D, i_t]``.

WSND v1 layout (all little-endian)::

    b"WSND"  u8 version(=1)  u8 n_axes  u8 n_components
    n_axes x (u32 size, f64 spacing, f64 origin)
    n_components x (prod(sizes) f64 values, C order)
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagicError,
    DatasetError,
    DimensionMismatchError,
    TruncatedError,
)

MAGIC = b"WSND"
VERSION = 1
_HEADER = struct.Struct("<4sBBB")
_AXIS = struct.Struct("<Idd")

DEFAULT_COMPONENT_NAMES = ("u", "v", "w")


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid; the last axis is time.

    All spatial axes share the spacing ``dx``.
    """

    sizes: tuple[int, ...]
    dx: float
    dt: float
    origins: tuple[float, ...] = None

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if len(sizes) < 2:
            raise ValueError("grid needs at least one spatial axis and a time axis")
        if any(n < 2 for n in sizes):
            raise ValueError(f"all axis sizes must be >= 2, got {sizes}")
        if not (self.dx > 0 and self.dt > 0):
            raise ValueError("grid spacings must be positive")
        origins = self.origins
        if origins is None:
            origins = (0.0,) * len(sizes)
        origins = tuple(float(o) for o in origins)
        if len(origins) != len(sizes):
            raise ValueError("one origin per axis required")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "origins", origins)

    @property
    def spatial_dims(self) -> int:
        return len(self.sizes) - 1

    @property
    def ndim(self) -> int:
        return len(self.sizes)

    @property
    def spacings(self) -> tuple[float, ...]:
        return (self.dx,) * self.spatial_dims + (self.dt,)

    def coords(self, axis: int) -> np.ndarray:
        """Coordinates along ``axis`` as ``origin + k * spacing``."""
        k = np.arange(self.sizes[axis], dtype=float)
        return self.origins[axis] + k * self.spacings[axis]

    def subgrid(self, steps: Sequence[int]) -> "Grid":
        """Grid obtained by keeping every ``steps[d]``-th point on each axis."""
        sizes = tuple(len(range(0, n, s)) for n, s in zip(self.sizes, steps))
        return Grid(sizes, self.dx * steps[0], self.dt * steps[-1], self.origins)


@dataclass(frozen=True)
class Field:
    """Real-valued data on a :class:`Grid`. Values are stored read-only."""

    grid: Grid
    values: np.ndarray
    component_name: str = "u"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.shape != self.grid.sizes:
            raise DimensionMismatchError(
                f"values shape {values.shape} does not match grid {self.grid.sizes}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(f"field {self.component_name!r} has non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values, self.component_name)


@dataclass(frozen=True)
class NoiseSpec:
    sigma_nr: float
    seed: int = 0

    def __post_init__(self):
        if not self.sigma_nr >= 0:
            raise ValueError(f"sigma_nr must be >= 0, got {self.sigma_nr}")


def _as_array(f) -> np.ndarray:
    return f.values if isinstance(f, Field) else np.asarray(f, dtype=float)


def rms_norm(f) -> float:
    """Root-mean-square of all entries of a field (or array)."""
    a = _as_array(f)
    if a.size == 0:
        raise ValueError("rms_norm of an empty field")
    peak = float(np.max(np.abs(a)))
    if peak == 0.0 or not np.isfinite(peak):
        return peak
    # normalise first so squares neither underflow nor overflow
    return peak * float(np.sqrt(np.mean(np.square(a / peak))))


def add_noise(f: Field, spec: NoiseSpec) -> tuple[Field, float]:
    """Add i.i.d. Gaussian noise with standard deviation ``sigma_nr * rms(f)``.

    Returns the noisy field and the standard deviation used.
    """
    sigma = spec.sigma_nr * rms_norm(f)
    if sigma == 0.0:
        return f, 0.0
    rng = np.random.default_rng(spec.seed)
    eps = rng.normal(0.0, sigma, size=f.values.shape)
    return f.with_values(f.values + eps), sigma


def add_noise_components(fields: Sequence[Field], spec: NoiseSpec) -> tuple[list[Field], list[float]]:
    """Noise each component with its own variance, one child seed per component."""
    seeds = np.random.SeedSequence(spec.seed).spawn(len(fields))
    out, sigmas = [], []
    for f, ss in zip(fields, seeds):
        child = NoiseSpec(spec.sigma_nr, int(ss.generate_state(1)[0]))
        g, s = add_noise(f, child)
        out.append(g)
        sigmas.append(s)
    return out, sigmas


def empirical_noise_ratio(noisy, clean) -> float:
    a, b = _as_array(noisy), _as_array(clean)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    denom = rms_norm(b)
    if denom == 0.0:
        raise ZeroDivisionError("clean field is identically zero")
    return rms_norm(a - b) / denom


# ---------------------------------------------------------------- file I/O


def save_dataset(grid: Grid, fields: Sequence[Field], path) -> None:
    if not fields:
        raise ValueError("at least one component is required")
    if len(fields) > 255 or grid.ndim > 255:
        raise ValueError("too many components or axes for WSND v1")
    chunks = [_HEADER.pack(MAGIC, VERSION, grid.ndim, len(fields))]
    for n, h, o in zip(grid.sizes, grid.spacings, grid.origins):
        chunks.append(_AXIS.pack(n, h, o))
    for f in fields:
        values = f.values if isinstance(f, Field) else np.asarray(f, dtype=float)
        if values.shape != grid.sizes:
            raise DimensionMismatchError(
                f"component shape {values.shape} does not match grid {grid.sizes}"
            )
        chunks.append(np.ascontiguousarray(values, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_dataset(path, names: Sequence[str] | None = None) -> tuple[Grid, list[Field]]:
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a WSND file (bad magic)")
    if len(raw) < _HEADER.size:
        raise TruncatedError(f"{path}: header truncated")
    _, version, n_axes, n_comp = _HEADER.unpack_from(raw, 0)
    if version != VERSION:
        raise BadMagicError(f"{path}: unsupported WSND version {version}")
    if n_axes < 2 or n_comp < 1:
        raise DimensionMismatchError(f"{path}: need >= 2 axes and >= 1 component")
    offset = _HEADER.size
    if len(raw) < offset + n_axes * _AXIS.size:
        raise TruncatedError(f"{path}: axis table truncated")
    sizes, spacings, origins = [], [], []
    for _ in range(n_axes):
        n, h, o = _AXIS.unpack_from(raw, offset)
        offset += _AXIS.size
        sizes.append(n)
        spacings.append(h)
        origins.append(o)
    if len(set(spacings[:-1])) != 1:
        raise DimensionMismatchError(f"{path}: spatial spacings differ {spacings[:-1]}")
    count = int(np.prod(sizes))
    expected = offset + n_comp * count * 8
    if len(raw) < expected:
        raise TruncatedError(f"{path}: payload has {len(raw) - offset} bytes, expected {expected - offset}")
    if len(raw) > expected:
        raise DimensionMismatchError(f"{path}: {len(raw) - expected} trailing bytes after payload")
    try:
        grid = Grid(tuple(sizes), spacings[0], spacings[-1], tuple(origins))
    except ValueError as exc:
        raise DimensionMismatchError(f"{path}: {exc}") from None
    if names is None:
        names = component_names(n_comp)
    fields = []
    for c in range(n_comp):
        values = np.frombuffer(raw, dtype="<f8", count=count, offset=offset + c * count * 8)
        try:
            fields.append(Field(grid, values.reshape(sizes), names[c]))
        except ValueError as exc:
            raise DatasetError(f"{path}: {exc}") from None
    return grid, fields


def component_names(n: int) -> list[str]:
    if n <= len(DEFAULT_COMPONENT_NAMES):
        return list(DEFAULT_COMPONENT_NAMES[:n])
    return [f"u{i}" for i in range(n)]


def export_csv(field: Field, path) -> None:
    """Write a 1D-space field as CSV: one row per x, one column per time."""
    grid = field.grid
    if grid.spatial_dims != 1:
        raise ValueError("CSV export is only defined for one spatial dimension")
    x, t = grid.coords(0), grid.coords(1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + [repr(float(v)) for v in t])
        for xi, row in zip(x, field.values):
            w.writerow([repr(float(xi))] + [repr(float(v)) for v in row])
