"""Synthetic datasets: an analytic inviscid Burgers weak solution and an
ETDRK4 Fourier-spectral integrator for 1D periodic KdV and KS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Field, Grid


@dataclass(frozen=True)
class BurgersParams:
    """Shock-forming initial data: slope ``alpha`` and plateau height ``A``."""

    A: float = 1000.0
    alpha: float = 0.5

    def __post_init__(self):
        if self.A == 0:
            raise ValueError("A must be nonzero")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def shock_time(self) -> float:
        return 1.0 / self.alpha


def burgers_value(A: float, alpha: float, x, t):
    """Pointwise value of the shock-forming inviscid Burgers solution."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    plateau = t >= np.maximum(x / A + 1 / alpha, 2 * x / A + 1 / alpha)
    fan = ~plateau & (A * (t - 1 / alpha) < x) & (x <= 0)
    out = np.zeros(x.shape)
    out[plateau] = A
    # the plateau test catches t = 1/alpha with x <= 0, so 1 - alpha*t != 0 here
    out[fan] = -alpha * x[fan] / (1 - alpha * t[fan])
    return out if out.ndim else float(out)


def burgers_exact(params: BurgersParams, grid: Grid) -> Field:
    if grid.spatial_dims != 1:
        raise ValueError("Burgers solution is defined on a 1D+time grid")
    x, t = np.meshgrid(grid.coords(0), grid.coords(1), indexing="ij")
    return Field(grid, burgers_value(params.A, params.alpha, x, t))


def default_burgers_grid(variant: str = "exact") -> Grid:
    """256 x 256 grid on ``[-4000, 4000]`` in space, starting at ``t = dt``.

    ``variant="exact"`` uses ``dx = 8000/255`` and ``dt = 4/255``, for which
    the shock advances exactly a quarter cell per time step and lattice
    quadrature errors across the shock cancel. ``variant="nominal"`` uses the
    rounded spacings ``dx = 31.25``, ``dt = 0.0157``.
    """
    if variant == "exact":
        dx, dt = 8000.0 / 255, 4.0 / 255
    elif variant == "nominal":
        dx, dt = 31.25, 0.0157
    else:
        raise ValueError(f"unknown Burgers grid variant {variant!r}")
    return Grid((256, 256), dx, dt, origins=(-4000.0, dt))


def burgers_dataset(params: BurgersParams | None = None, variant: str = "exact") -> Field:
    return burgers_exact(params or BurgersParams(), default_burgers_grid(variant))


# ---------------------------------------------------------------- spectral


@dataclass(frozen=True)
class SpectralModel:
    """``u_t = L u - (1/2)(u^2)_x`` on a periodic interval.

    ``kind`` selects the linear part: ``"KdV"`` is ``-u_xxx`` and ``"KS"`` is
    ``-u_xx - u_xxxx``.
    """

    kind: str
    length: float
    origin: float = 0.0
    dealias: bool = False
    nonlinear: bool = True

    def __post_init__(self):
        if self.kind not in ("KdV", "KS"):
            raise ValueError(f"unknown spectral model {self.kind!r}")
        if not self.length > 0:
            raise ValueError("domain length must be positive")

    def wavenumbers(self, n: int) -> np.ndarray:
        k = np.fft.fftfreq(n, d=self.length / (2 * np.pi * n))
        if n % 2 == 0:
            k[n // 2] = 0.0  # odd derivatives of the Nyquist mode are not representable
        return k

    def symbol(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.kind == "KS":
            return (k**2 - k**4).astype(complex)
        return 1j * k**3


def _phi_coefficients(Lh: np.ndarray, h: float, n_contour: int = 32):
    """ETDRK4 coefficients by averaging over a circle of radius 1 about each
    ``h*L`` (avoids cancellation for small ``|h*L|``)."""
    r = np.exp(1j * np.pi * (np.arange(1, n_contour + 1) - 0.5) / n_contour)
    LR = Lh[:, None] + r[None, :]
    Q = h * np.mean((np.exp(LR / 2) - 1) / LR, axis=1)
    f1 = h * np.mean((-4 - LR + np.exp(LR) * (4 - 3 * LR + LR**2)) / LR**3, axis=1)
    f2 = h * np.mean((2 + LR + np.exp(LR) * (-2 + LR)) / LR**3, axis=1)
    f3 = h * np.mean((-4 - 3 * LR - LR**2 + np.exp(LR) * (4 - LR)) / LR**3, axis=1)
    # real-axis symbols give real coefficients up to rounding
    if np.all(np.abs(Lh.imag) == 0):
        Q, f1, f2, f3 = Q.real, f1.real, f2.real, f3.real
    return Q, f1, f2, f3


def etdrk4_simulate(model: SpectralModel, ic, nt: int, dt_sim: float, save_every: int = 1) -> Field:
    """Integrate ``nt`` steps of size ``dt_sim`` and keep every
    ``save_every``-th state (including the initial one).

    Raises
    ------
    FloatingPointError
        If the solution becomes non-finite; the message names the step.
    """
    u0 = np.asarray(getattr(ic, "values", ic), dtype=float).ravel()
    n = u0.size
    if n % 2:
        raise ValueError("initial condition length must be even")
    if nt < 1 or save_every < 1 or nt % save_every:
        raise ValueError("nt must be a positive multiple of save_every")
    if not dt_sim > 0:
        raise ValueError("time step must be positive")

    k = model.wavenumbers(n)
    L = model.symbol(k)
    E = np.exp(dt_sim * L)
    E2 = np.exp(dt_sim * L / 2)
    Q, f1, f2, f3 = _phi_coefficients(dt_sim * L, dt_sim)
    g = -0.5j * k
    if model.dealias:
        keep = np.abs(np.fft.fftfreq(n, d=1.0 / n)) < n / 3
    else:
        keep = None

    def N(v_hat):
        if not model.nonlinear:
            return np.zeros_like(v_hat)
        u = np.fft.ifft(v_hat).real
        out = g * np.fft.fft(u * u)
        return out * keep if keep is not None else out

    v = np.fft.fft(u0)
    frames = [u0.copy()]
    # overflow is caught by the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, nt + 1):
            Nv = N(v)
            a = E2 * v + Q * Nv
            Na = N(a)
            b = E2 * v + Q * Na
            Nb = N(b)
            c = E2 * a + Q * (2 * Nb - Nv)
            Nc = N(c)
            v = E * v + Nv * f1 + 2 * (Na + Nb) * f2 + Nc * f3
            if not np.all(np.isfinite(v)):
                raise FloatingPointError(f"solution blew up at step {step} (t={step * dt_sim:.6g})")
            if step % save_every == 0:
                frames.append(np.fft.ifft(v).real)
    values = np.stack(frames, axis=-1)
    grid = Grid((n, values.shape[1]), model.length / n, dt_sim * save_every, origins=(model.origin, 0.0))
    return Field(grid, values)


def periodic_coords(model: SpectralModel, n: int) -> np.ndarray:
    return model.origin + np.arange(n) * (model.length / n)


def kdv_two_soliton_ic(A: float, B: float, x) -> np.ndarray:
    """Superposed sech^2 profiles of heights ``3A^2`` and ``3B^2`` centred at
    ``x = -2`` and ``x = -1``."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    return 3 * A**2 / np.cosh(0.5 * A * (x + 2)) ** 2 + 3 * B**2 / np.cosh(0.5 * B * (x + 1)) ** 2


def ks_dataset(n: int = 256, nt: int = 1500, dt_sim: float = 0.1, save_every: int = 5,
               dealias: bool = False) -> Field:
    """Chaotic KS run on ``[0, 32 pi]``: 256 x 301 with ``dt = 0.5``."""
    model = SpectralModel("KS", 32 * math.pi, 0.0, dealias)
    x = periodic_coords(model, n)
    return etdrk4_simulate(model, np.cos(x / 16) * (1 + np.sin(x / 16)), nt, dt_sim, save_every)


def kdv_dataset(n: int = 400, nt: int = 2400, dt_sim: float = 2.5e-6, save_every: int = 4,
                A: float = 25.0, B: float = 16.0, dealias: bool = False) -> Field:
    """Two-soliton KdV run on ``[-pi, pi)``: 400 x 601 with ``dt = 1e-5``."""
    model = SpectralModel("KdV", 2 * math.pi, -math.pi, dealias)
    x = periodic_coords(model, n)
    return etdrk4_simulate(model, kdv_two_soliton_ic(A, B, x), nt, dt_sim, save_every)


GENERATORS = {
    "burgers": burgers_dataset,
    "ks": ks_dataset,
    "kdv": kdv_dataset,
}
