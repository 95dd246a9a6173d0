"""End-to-end discovery: configuration, the staged pipeline and noise sweeps.

Configuration files are plain ``key = value`` lines; ``#`` starts a comment.
Tuple values are comma separated. Example::

    dataset = burgers
    supports = 60, 60
    strides = 5, 5
    max_degree = 6
    max_dx = 6
"""

from __future__ import annotations

import csv
import functools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import synth
from .data import Field, NoiseSpec, add_noise_components, load_dataset
from .errors import ConfigError, PipelineError, WeakPDEError
from .library import ModelLibrary, polynomial_library, DerivativeIndex
from .metrics import all_metrics
from .mstls import default_lambda_grid, mstls_search, write_loss_curve
from .scaling import ScaleSet, scale_vector, scaled_system, scales_for
from .testfn import SeparableTestFunction, critical_wavenumber, get_test_fcns, support_from_changepoint
from .weakform import LinearSystem, assemble, subsample_query_points

BUILTIN_TRUTH = {
    "burgers": {"(u^2)_x": -0.5},
    "ks": {"(u^2)_x": -0.5, "u_xx": -1.0, "u_xxxx": -1.0},
    "kdv": {"(u^2)_x": -0.5, "u_xxx": -1.0},
}

# ------------------------------------------------------------------ config


def _ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(v) for v in text.split(","))


def _supports(text: str):
    return "auto" if text.strip().lower() == "auto" else _ints(text)


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "none") else float(text)


def _opt_ints(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else _ints(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _truth(text: str):
    text = text.strip()
    if text.lower() in ("", "none"):
        return None
    out = {}
    for item in text.split(","):
        label, _, value = item.strip().rpartition(":")
        if not label:
            raise ValueError(f"truth entry {item!r} is not label:value")
        out[label.strip()] = float(value)
    return out


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    if isinstance(value, dict):
        return ", ".join(f"{k}:{v!r}" for k, v in value.items())
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class DiscoveryConfig:
    """Everything needed to reproduce one discovery run.

    ``dataset`` is a built-in generator name (``burgers``, ``ks``, ``kdv``)
    or a path to a WSND file. ``supports`` is a tuple of half-widths ``m``
    per axis or ``"auto"`` (changepoint selection, requires ``tau_hat``).
    ``strides`` defaults to ``N // 50`` per axis.
    """

    dataset: str
    supports: tuple[int, ...] | str
    strides: tuple[int, ...] | None = None
    max_degree: int = 6
    trig: tuple[int, ...] = ()
    max_dx: int = 6
    lhs: tuple[int, ...] | None = None
    lhs_components: tuple[int, ...] | None = None
    tau: float = 1e-10
    tau_hat: float | None = None
    lambda_min: float = 1e-4
    lambda_max: float = 1.0
    lambda_count: int = 50
    noise: float = 0.0
    seed: int = 0
    precondition: bool = True
    truth: dict | None = field(default=None, compare=True, hash=False)
    write_system: bool = False
    dealias: bool = False
    burgers_grid: str = "exact"
    out: str = "out"

    def validate(self) -> "DiscoveryConfig":
        if not self.dataset:
            raise ConfigError("dataset must not be empty", key="dataset")
        if self.supports == "auto":
            if self.tau_hat is None:
                raise ConfigError("supports = auto requires tau_hat", key="tau_hat")
        elif len(self.supports) < 2 or any(m < 2 for m in self.supports):
            raise ConfigError("supports need one value >= 2 per axis", key="supports")
        if self.strides is not None and (len(self.strides) < 2 or any(s < 1 for s in self.strides)):
            raise ConfigError("strides need one value >= 1 per axis", key="strides")
        if not 0 < self.tau < 1:
            raise ConfigError("tau must lie in (0, 1)", key="tau")
        if self.tau_hat is not None and not self.tau_hat > 0:
            raise ConfigError("tau_hat must be positive", key="tau_hat")
        if not 0 < self.lambda_min <= self.lambda_max or self.lambda_count < 1:
            raise ConfigError("need 0 < lambda_min <= lambda_max and lambda_count >= 1", key="lambda_min")
        if self.lambda_count > 1 and self.lambda_min == self.lambda_max:
            raise ConfigError("lambda_min == lambda_max needs lambda_count = 1", key="lambda_count")
        if self.max_degree < 1 or self.max_dx < 0:
            raise ConfigError("need max_degree >= 1 and max_dx >= 0", key="max_degree")
        if self.noise < 0 or not math.isfinite(self.noise):
            raise ConfigError("noise must be a finite value >= 0", key="noise")
        if self.burgers_grid not in ("exact", "nominal"):
            raise ConfigError("burgers_grid must be exact or nominal", key="burgers_grid")
        return self


_PARSERS = {
    "dataset": str.strip,
    "supports": _supports,
    "strides": _opt_ints,
    "max_degree": int,
    "trig": _ints,
    "max_dx": int,
    "lhs": _opt_ints,
    "lhs_components": _opt_ints,
    "tau": float,
    "tau_hat": _opt_float,
    "lambda_min": float,
    "lambda_max": float,
    "lambda_count": int,
    "noise": float,
    "seed": int,
    "precondition": _bool,
    "truth": _truth,
    "write_system": _bool,
    "dealias": _bool,
    "burgers_grid": str.strip,
    "out": str.strip,
}
REQUIRED = ("dataset", "supports")


def parse_config_text(text: str) -> DiscoveryConfig:
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=lineno, key=key)
        value = value.strip()
        if key in REQUIRED and not value:
            raise ConfigError(f"required key {key!r} is empty", line=lineno, key=key)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno, key=key) from None
        lines[key] = lineno
    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}", key=key)
    cfg = DiscoveryConfig(**values)
    try:
        return cfg.validate()
    except ConfigError as exc:
        if exc.key in lines:
            raise ConfigError(str(exc), line=lines[exc.key], key=exc.key) from None
        raise


def parse_config(path) -> DiscoveryConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def serialize_config(cfg: DiscoveryConfig) -> str:
    return "".join(f"{f.name} = {_fmt(getattr(cfg, f.name))}\n" for f in fields(cfg))


# -------------------------------------------------------------- data input


@functools.lru_cache(maxsize=8)
def _generate(name: str, dealias: bool, burgers_grid: str) -> tuple[Field, ...]:
    if name == "burgers":
        return (synth.burgers_dataset(variant=burgers_grid),)
    if name == "ks":
        return (synth.ks_dataset(dealias=dealias),)
    return (synth.kdv_dataset(dealias=dealias),)


def load_clean(cfg: DiscoveryConfig) -> list[Field]:
    """Noise-free components named by the config (generated or read)."""
    if cfg.dataset in synth.GENERATORS:
        return list(_generate(cfg.dataset, cfg.dealias, cfg.burgers_grid))
    _, comps = load_dataset(cfg.dataset)
    return comps


def noisy_fields(clean: list[Field], sigma_nr: float, seed: int) -> tuple[list[Field], list[float]]:
    if sigma_nr == 0:
        return list(clean), [0.0] * len(clean)
    return add_noise_components(clean, NoiseSpec(sigma_nr, seed))


# ---------------------------------------------------------------- pipeline

STAGES = (
    ("data", "load or generate the dataset and add seeded noise"),
    ("library", "enumerate trial functions and derivative operators"),
    ("testfn", "build per-axis test functions (supports, degrees)"),
    ("scales", "compute gamma_u, gamma_x, gamma_t and mu"),
    ("query", "subsample query points"),
    ("assemble", "convolve to build b~ and G~"),
    ("mstls", "threshold search over the lambda grid"),
    ("unscale", "map coefficients to original units"),
    ("metrics", "compare with the true model when known"),
)


def stage_plan(cfg: DiscoveryConfig) -> list[str]:
    """Human-readable description of the stages, without computing."""
    out = []
    for i, (name, desc) in enumerate(STAGES, start=1):
        detail = ""
        if name == "data":
            detail = f" [{cfg.dataset}, noise={cfg.noise}, seed={cfg.seed}]"
        elif name == "testfn":
            detail = f" [supports={_fmt(cfg.supports)}, tau={cfg.tau}]"
        elif name == "mstls":
            detail = f" [{cfg.lambda_count} values in [{cfg.lambda_min}, {cfg.lambda_max}]]"
        out.append(f"{i}. {name}: {desc}{detail}")
    return out


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, (PipelineError, ConfigError)):
            return False
        if isinstance(exc, (WeakPDEError, ValueError, ArithmeticError, KeyError, OSError, np.linalg.LinAlgError)):
            raise PipelineError(self.name, exc) from exc
        return False


@dataclass
class EquationResult:
    lhs: str
    equation: str
    coefficients: dict
    w_hat: list
    w_tilde: list
    lambda_hat: float
    support: list
    loss_curve: list
    iterations: list
    rank_deficient: bool
    metrics: dict | None = None


@dataclass
class DiscoveryReport:
    equations: list
    labels: list
    G_shape: tuple
    kappa: float
    scales: dict
    supports: tuple
    degrees: tuple
    strides: tuple
    query_shape: tuple
    grid: dict
    noise_sigma: list
    config: dict
    wall_time: float = field(default=0.0, compare=False)
    system: LinearSystem | None = field(default=None, repr=False, compare=False)

    @property
    def primary(self) -> EquationResult:
        return self.equations[0]

    def as_dict(self) -> dict:
        return {
            "equations": [vars(e) for e in self.equations],
            "labels": list(self.labels),
            "G_shape": list(self.G_shape),
            "kappa": self.kappa,
            "scales": self.scales,
            "supports": list(self.supports),
            "degrees": list(self.degrees),
            "strides": list(self.strides),
            "query_shape": list(self.query_shape),
            "grid": self.grid,
            "noise_sigma": list(self.noise_sigma),
            "config": self.config,
        }

    def to_json(self) -> str:
        """Deterministic JSON (wall time is excluded; see :meth:`timing`)."""
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def timing(self) -> dict:
        return {"wall_time_sec": self.wall_time}

    def render(self) -> str:
        return "\n".join(e.equation for e in self.equations)


def build_library(cfg: DiscoveryConfig, spatial_dims: int, n_components: int) -> ModelLibrary:
    lib = polynomial_library(spatial_dims, cfg.max_degree, cfg.max_dx, n_components, cfg.trig)
    if cfg.lhs is not None:
        if len(cfg.lhs) != spatial_dims + 1:
            raise ConfigError(f"lhs needs {spatial_dims + 1} entries", key="lhs")
        lib = ModelLibrary(DerivativeIndex(cfg.lhs), lib.columns, lib.functions, lib.derivs, 0)
    return lib


def _select_supports(cfg, comps, orders):
    grid = comps[0].grid
    if cfg.supports != "auto":
        if len(cfg.supports) != grid.ndim:
            raise ConfigError(f"supports need {grid.ndim} values", key="supports")
        return tuple(cfg.supports), None
    ms, ps = [], []
    for d in range(grid.ndim):
        # the changepoint is estimated on the first component
        k = critical_wavenumber(comps[0].values, d).k_star
        m, p = support_from_changepoint(k, grid.sizes[d], cfg.tau_hat, cfg.tau, orders[d])
        ms.append(m)
        ps.append(p)
    return tuple(ms), tuple(ps)


def discover(cfg: DiscoveryConfig, fields_in: list[Field] | None = None,
             noise_seed: int | None = None, gammas: dict | None = None) -> DiscoveryReport:
    """Run the full pipeline.

    ``fields_in`` bypasses dataset loading and noise (already noisy data).
    ``gammas`` optionally overrides any of ``gamma_u``, ``gamma_x``,
    ``gamma_t``.
    """
    t0 = time.perf_counter()
    cfg.validate()
    with _Stage("data"):
        if fields_in is None:
            clean = load_clean(cfg)
            seed = cfg.seed if noise_seed is None else noise_seed
            comps, sigmas = noisy_fields(clean, cfg.noise, seed)
        else:
            comps, sigmas = list(fields_in), [0.0] * len(fields_in)
        grid = comps[0].grid
    with _Stage("library"):
        lib = build_library(cfg, grid.spatial_dims, len(comps))
        orders = lib.max_orders()
    with _Stage("testfn"):
        supports, degrees = _select_supports(cfg, comps, orders)
        axes = []
        for d in range(grid.ndim):
            p = None if degrees is None else degrees[d]
            axes.append(get_test_fcns(supports[d], cfg.tau, range(orders[d] + 1), grid.spacings[d],
                                      grid.sizes[d], p=p))
        tf = SeparableTestFunction(tuple(axes))
    with _Stage("scales"):
        if cfg.precondition:
            sc = scales_for(comps, lib, tf, grid.dx, grid.dt)
            if gammas:
                g = {"gamma_u": sc.gamma_u, "gamma_x": sc.gamma_x, "gamma_t": sc.gamma_t, **gammas}
                sc = ScaleSet(g["gamma_u"], g["gamma_x"], g["gamma_t"],
                              scale_vector(lib, g["gamma_u"], g["gamma_x"], g["gamma_t"]), sc.beta_bar)
        else:
            sc = ScaleSet(1.0, 1.0, 1.0, np.ones(len(lib)), lib.beta_bar)
    with _Stage("query"):
        strides = cfg.strides or tuple(max(1, n // 50) for n in grid.sizes)
        if len(strides) != grid.ndim:
            raise ConfigError(f"strides need {grid.ndim} values", key="strides")
        query = subsample_query_points(grid.sizes, supports, strides)
    lhs_components = cfg.lhs_components or tuple(range(len(comps)))
    with _Stage("assemble"):
        if cfg.precondition:
            systems = [scaled_system(comps, lib.with_lhs_component(c), tf, query, sc) for c in lhs_components]
        else:
            systems = [assemble(comps, lib.with_lhs_component(c), tf, query) for c in lhs_components]
        kappa = systems[0].condition_number()
    grid_lam = default_lambda_grid(cfg.lambda_min, cfg.lambda_max, cfg.lambda_count)
    equations = []
    truth = cfg.truth if cfg.truth is not None else BUILTIN_TRUTH.get(cfg.dataset)
    for c, system in zip(lhs_components, systems):
        clib = lib.with_lhs_component(c)
        with _Stage("mstls"):
            sol = mstls_search(system.G, system.b, grid_lam, sc.mu)
        with _Stage("unscale"):
            w = sc.mu * sol.w_hat
        metrics = None
        with _Stage("metrics"):
            if truth is not None and c == lhs_components[0]:
                metrics = all_metrics(w, clib.vector(truth))
        equations.append(EquationResult(
            lhs=clib.lhs_label(),
            equation=clib.render(w),
            coefficients={lib.labels[i]: float(w[i]) for i in sol.support},
            w_hat=[float(v) for v in w],
            w_tilde=[float(v) for v in sol.w_hat],
            lambda_hat=sol.lambda_hat,
            support=[lib.labels[i] for i in sol.support],
            loss_curve=[[float(a), float(b)] for a, b in sol.loss_curve],
            iterations=list(sol.iterations),
            rank_deficient=bool(sol.rank_deficient),
            metrics=metrics,
        ))
    report = DiscoveryReport(
        equations=equations,
        labels=list(lib.labels),
        G_shape=tuple(systems[0].shape),
        kappa=kappa,
        scales=sc.as_dict(),
        supports=supports,
        degrees=tf.degrees,
        strides=tuple(strides),
        query_shape=query.shape,
        grid={"sizes": list(grid.sizes), "dx": grid.dx, "dt": grid.dt, "origins": list(grid.origins)},
        noise_sigma=[float(s) for s in sigmas],
        # the output directory does not affect results
        config=json.loads(json.dumps({f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name != "out"})),
        system=systems[0],
    )
    report.wall_time = time.perf_counter() - t0
    return report


def write_outputs(report: DiscoveryReport, out_dir, write_system: bool = False) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.json", out / "losscurve.csv", out / "timing.json"]
    paths[0].write_text(report.to_json())
    write_loss_curve(report.primary.loss_curve, paths[1])
    paths[2].write_text(json.dumps(report.timing(), indent=2) + "\n")
    if write_system and report.system is not None:
        report.system.to_csv(out / "system.csv")
        paths.append(out / "system.csv")
    return paths


# ------------------------------------------------------------------ sweeps

SWEEP_COLUMNS = ("sigma_nr", "trials", "mean_tpr", "mean_e_inf", "mean_e_2", "mean_lambda_hat")


def sweep(cfg: DiscoveryConfig, noise_levels, trials: int, workers: int | None = None) -> list[dict]:
    """Noise ensembles: trial ``i`` at every level uses seed ``cfg.seed + i``.

    Trials run concurrently; results are aggregated in trial order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    truth = cfg.truth if cfg.truth is not None else BUILTIN_TRUTH.get(cfg.dataset)
    if truth is None:
        raise ConfigError("sweep needs a truth model", key="truth")
    with _Stage("data"):
        load_clean(cfg)  # fail early; generated data is cached for the trials

    def one(level, i):
        return discover(replace(cfg, noise=level, seed=cfg.seed + i, truth=truth)).primary

    rows = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for level in noise_levels:
            results = list(pool.map(lambda i: one(float(level), i), range(trials)))
            rows.append({
                "sigma_nr": float(level),
                "trials": trials,
                "mean_tpr": float(np.mean([r.metrics["tpr"] for r in results])),
                "mean_e_inf": float(np.mean([r.metrics["e_inf"] for r in results])),
                "mean_e_2": float(np.mean([r.metrics["e_2"] for r in results])),
                "mean_lambda_hat": float(np.mean([r.lambda_hat for r in results])),
            })
    return rows


def write_sweep_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
