"""Candidate model catalog: trial functions times derivative operators.

Columns are ordered derivative-major: for operators ``alpha^1..alpha^S`` and
functions ``f_1..f_J`` column ``(s-1)*J + j`` pairs ``alpha^s`` with ``f_j``,
with the identically-zero pairs (constant function under a derivative)
dropped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

SPATIAL_NAMES = ("x", "y", "z")


def axis_names(spatial_dims: int) -> tuple[str, ...]:
    if spatial_dims <= len(SPATIAL_NAMES):
        return SPATIAL_NAMES[:spatial_dims] + ("t",)
    return tuple(f"x{d + 1}" for d in range(spatial_dims)) + ("t",)


@dataclass(frozen=True)
class TrialFunction:
    """Pointwise nonlinearity ``f_j``.

    ``kind`` is ``"monomial"`` (``exponents`` per component) or ``"sin"`` /
    ``"cos"`` applied to ``multiplier * u_component``.
    """

    kind: str
    exponents: tuple[int, ...] = ()
    component: int = 0
    multiplier: int = 1
    n_components: int = 1
    names: tuple[str, ...] = ("u",)

    def __post_init__(self):
        if self.kind == "monomial":
            if any(e < 0 for e in self.exponents):
                raise ValueError("monomial exponents must be >= 0")
            object.__setattr__(self, "n_components", len(self.exponents))
        elif self.kind in ("sin", "cos"):
            if self.multiplier < 1:
                raise ValueError("trig multiplier must be >= 1")
            if not 0 <= self.component < self.n_components:
                raise ValueError("trig component index out of range")
        else:
            raise ValueError(f"unknown trial function kind {self.kind!r}")
        if len(self.names) < self.n_components:
            from .data import component_names
            object.__setattr__(self, "names", tuple(component_names(self.n_components)))

    @property
    def beta(self) -> int:
        """Homogeneity power; 0 for trig functions."""
        return sum(self.exponents) if self.kind == "monomial" else 0

    @property
    def is_constant(self) -> bool:
        return self.kind == "monomial" and self.beta == 0

    @property
    def is_monomial(self) -> bool:
        return self.kind == "monomial"

    @property
    def label(self) -> str:
        if self.kind == "monomial":
            if self.beta == 0:
                return "1"
            parts = []
            for name, e in zip(self.names, self.exponents):
                if e == 1:
                    parts.append(name)
                elif e > 1:
                    parts.append(f"{name}^{e}")
            return "".join(parts)
        arg = self.names[self.component]
        if self.multiplier != 1:
            arg = f"{self.multiplier}{arg}"
        return f"{self.kind}({arg})"

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class DerivativeIndex:
    """Multi-index ``(a_1, ..., a_D, a_t)`` of a partial derivative."""

    alpha: tuple[int, ...]

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        if any(a < 0 for a in alpha):
            raise ValueError("derivative orders must be >= 0")
        if sum(1 for a in alpha if a) > 1:
            raise ValueError(f"cross derivatives are not supported: {alpha}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def order(self) -> int:
        return sum(self.alpha)

    @property
    def spatial_order(self) -> int:
        return sum(self.alpha[:-1])

    @property
    def time_order(self) -> int:
        return self.alpha[-1]

    def subscript(self) -> str:
        names = axis_names(len(self.alpha) - 1)
        return "".join(n * a for n, a in zip(names, self.alpha))


def monomials(n_components: int, max_degree: int, min_degree: int = 0,
              names: Sequence[str] | None = None,
              require: int | None = None) -> list[TrialFunction]:
    """All monomials of total degree in ``[min_degree, max_degree]``.

    Ordered by total degree, then lexicographically descending in the first
    component (``u^2, uv, v^2``). ``require`` keeps only monomials containing
    that component.
    """
    if names is None:
        from .data import component_names
        names = component_names(n_components)
    out = []
    for deg in range(min_degree, max_degree + 1):
        combos = [e for e in itertools.product(range(deg, -1, -1), repeat=n_components) if sum(e) == deg]
        for e in combos:
            if require is not None and e[require] == 0:
                continue
            out.append(TrialFunction("monomial", tuple(e), names=tuple(names)))
    return out


def trig_functions(multipliers: Sequence[int], component: int = 0, n_components: int = 1,
                   names: Sequence[str] | None = None) -> list[TrialFunction]:
    kw = {} if names is None else {"names": tuple(names)}
    out = []
    for k in multipliers:
        out.append(TrialFunction("sin", component=component, multiplier=k, n_components=n_components, **kw))
        out.append(TrialFunction("cos", component=component, multiplier=k, n_components=n_components, **kw))
    return out


def derivative_indices(spatial_dims: int, max_order: int, time_orders: Sequence[int] = ()) -> list[DerivativeIndex]:
    """Identity, then ``d_x^1..d_x^max``, ``d_y^1..``, ..., then time orders."""
    n = spatial_dims + 1
    out = [DerivativeIndex((0,) * n)]
    for d in range(spatial_dims):
        for a in range(1, max_order + 1):
            alpha = [0] * n
            alpha[d] = a
            out.append(DerivativeIndex(tuple(alpha)))
    for a in time_orders:
        if a > 0:
            out.append(DerivativeIndex((0,) * spatial_dims + (a,)))
    return out


@dataclass(frozen=True)
class Column:
    deriv: DerivativeIndex
    function: TrialFunction

    @property
    def label(self) -> str:
        f = self.function.label
        sub = self.deriv.subscript()
        if not sub:
            return f
        if len(f) > 1 and not f.startswith(("sin", "cos")):
            f = f"({f})"
        return f"{f}_{sub}"


@dataclass(frozen=True)
class ModelLibrary:
    """Ordered catalog of ``(operator, function)`` columns plus the LHS."""

    lhs: DerivativeIndex
    columns: tuple[Column, ...]
    functions: tuple[TrialFunction, ...] = field(default=())
    derivs: tuple[DerivativeIndex, ...] = field(default=())
    lhs_component: int = 0

    @property
    def S(self) -> int:
        return len(self.derivs)

    @property
    def J(self) -> int:
        return len(self.functions)

    def __len__(self):
        return len(self.columns)

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.columns]

    @property
    def spatial_dims(self) -> int:
        return len(self.lhs.alpha) - 1

    @property
    def beta_bar(self) -> int:
        return max((c.function.beta for c in self.columns), default=0)

    @property
    def has_trig(self) -> bool:
        return any(not c.function.is_monomial for c in self.columns)

    def max_orders(self) -> tuple[int, ...]:
        """Largest derivative order per axis over the LHS and all columns."""
        alphas = [self.lhs.alpha] + [c.deriv.alpha for c in self.columns]
        return tuple(int(max(col)) for col in zip(*alphas))

    def lhs_label(self) -> str:
        names = self.functions[0].names if self.functions else ("u",)
        return f"{names[self.lhs_component]}_{self.lhs.subscript()}"

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def vector(self, coefficients: dict) -> np.ndarray:
        """Dense coefficient vector from a ``{label: value}`` mapping."""
        w = np.zeros(len(self.columns))
        labels = self.labels
        for k, v in coefficients.items():
            if k not in labels:
                raise KeyError(f"term {k!r} is not in the library")
            w[labels.index(k)] = v
        return w

    def render(self, w, precision: int = 4) -> str:
        """Printable equation such as ``u_t = -0.5 (u^2)_x``."""
        terms = []
        for c, wj in zip(self.columns, w):
            if wj == 0:
                continue
            coef = f"{wj:.{precision}g}"
            if not terms:
                terms.append(f"{coef} {c.label}")
            elif wj < 0:
                terms.append(f"- {coef[1:]} {c.label}")
            else:
                terms.append(f"+ {coef} {c.label}")
        rhs = " ".join(terms) if terms else "0"
        return f"{self.lhs_label()} = {rhs}"

    def with_lhs_component(self, component: int) -> "ModelLibrary":
        return ModelLibrary(self.lhs, self.columns, self.functions, self.derivs, component)


def enumerate_columns(functions: Sequence[TrialFunction], derivs: Sequence[DerivativeIndex],
                      lhs: DerivativeIndex | None = None, lhs_component: int = 0,
                      rule: Callable[[DerivativeIndex, TrialFunction], bool] | None = None) -> ModelLibrary:
    """Build the column catalog.

    ``rule(deriv, function)`` may veto pairs (degree-restricted catalogs).
    Pairs of the constant function with a nonzero derivative are always
    excluded since they vanish identically.
    """
    functions = list(functions)
    derivs = list(derivs)
    if not functions or not derivs:
        raise ValueError("need at least one function and one operator")
    zero_order = [d for d in derivs if d.order == 0]
    if len(zero_order) != 1:
        raise ValueError("the zero-order operator must appear exactly once")
    if len(set(functions)) != len(functions) or len(set(derivs)) != len(derivs):
        raise ValueError("duplicate (operator, function) pairs in library")
    n_axes = len(derivs[0].alpha)
    if any(len(d.alpha) != n_axes for d in derivs):
        raise ValueError("operators disagree on the number of axes")
    if lhs is None:
        lhs = DerivativeIndex((0,) * (n_axes - 1) + (1,))
    columns = []
    for d in derivs:
        for f in functions:
            if f.is_constant and d.order > 0:
                continue
            if rule is not None and not rule(d, f):
                continue
            columns.append(Column(d, f))
    return ModelLibrary(lhs, tuple(columns), tuple(functions), tuple(derivs), lhs_component)


def eval_trial(f: TrialFunction, fields, gamma_u: float = 1.0) -> np.ndarray:
    """Evaluate ``f`` pointwise on component arrays.

    ``gamma_u`` is the amplitude scale already applied to ``fields``: trig
    functions act on the unscaled amplitude ``fields / gamma_u`` while
    monomials act on the scaled data directly.
    """
    arrays = [np.asarray(getattr(u, "values", u), dtype=float) for u in fields]
    if len(arrays) != f.n_components:
        raise ValueError(f"{f.label} expects {f.n_components} components, got {len(arrays)}")
    if f.kind == "monomial":
        out = np.ones_like(arrays[0])
        for a, e in zip(arrays, f.exponents):
            if e:
                out = out * a**e
        return out
    arg = f.multiplier * arrays[f.component] / gamma_u
    return np.sin(arg) if f.kind == "sin" else np.cos(arg)


def polynomial_library(spatial_dims: int = 1, max_degree: int = 6, max_dx: int = 6,
                       n_components: int = 1, trig: Sequence[int] = (),
                       lhs_time_order: int = 1, lhs_component: int = 0,
                       names: Sequence[str] | None = None) -> ModelLibrary:
    """Monomials up to ``max_degree`` (plus optional trig) against pure spatial
    derivatives up to ``max_dx`` on each axis."""
    funcs = monomials(n_components, max_degree, names=names)
    if trig:
        funcs += trig_functions(trig, 0, n_components, names=names)
    derivs = derivative_indices(spatial_dims, max_dx)
    lhs = DerivativeIndex((0,) * spatial_dims + (lhs_time_order,))
    return enumerate_columns(funcs, derivs, lhs, lhs_component)
