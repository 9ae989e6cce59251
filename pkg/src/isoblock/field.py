"""Vector fields on R^n defined by text expressions, plus a small catalog."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import expr
from .dual import Dual, lift
from .errors import InputError, ParseError


@dataclass(frozen=True)
class Jet:
    point: np.ndarray
    value: np.ndarray
    jacobian: np.ndarray


@dataclass(frozen=True, eq=False)
class FieldDef:
    """An immutable n-component vector field.

    Parameters are substituted at parse time; ``params`` is kept only for
    reporting and re-parsing.
    """

    n: int
    components: tuple
    params: tuple = ()
    name: str | None = None
    _compiled: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if len(self.components) != self.n:
            raise InputError(f"expected {self.n} components, got {len(self.components)}")
        object.__setattr__(self, "_compiled", tuple(expr.compile_node(c) for c in self.components))

    def __eq__(self, other):
        return (
            isinstance(other, FieldDef)
            and self.n == other.n
            and self.components == other.components
            and self.params == other.params
        )

    def __hash__(self):
        return hash((self.n, self.components, self.params))

    @property
    def param_map(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def source(self) -> str:
        return ", ".join(expr.to_source(c) for c in self.components)

    def _components_at(self, coords):
        shape = np.shape(coords[0])
        out = []
        for f in self._compiled:
            v = f(coords)
            out.append(np.broadcast_to(np.asarray(v, dtype=float), shape))
        return np.stack(out)

    def __call__(self, p) -> np.ndarray:
        return self.eval(p)

    def eval(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n,):
            raise InputError(f"point must have dimension {self.n}, got shape {p.shape}")
        return self._components_at(list(p))

    def eval_many(self, points) -> np.ndarray:
        """Evaluate at an ``(m, n)`` array of points; returns ``(m, n)``."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.n:
            raise InputError(f"points must have shape (m, {self.n}), got {pts.shape}")
        return self._components_at(list(pts.T)).T

    def jacobian(self, p) -> Jet:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n,):
            raise InputError(f"point must have dimension {self.n}, got shape {p.shape}")
        values, jac = self.jacobian_many(p[None, :])
        return Jet(point=p, value=values[0], jacobian=jac[0])

    def jacobian_many(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Values ``(m, n)`` and Jacobians ``(m, n, n)`` by forward-mode AD."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.n:
            raise InputError(f"points must have shape (m, {self.n}), got {pts.shape}")
        m, n = pts.shape
        seeds = Dual.variables(pts.T)
        values = np.empty((m, n))
        jac = np.empty((m, n, n))
        for i, f in enumerate(self._compiled):
            d = lift(f(seeds), n, (m,))
            values[:, i] = d.val
            jac[:, i, :] = np.asarray(d.grad).T
        return values, jac

    def scaled(self, c: float) -> "FieldDef":
        """The field c*F, as a new FieldDef."""
        comps = tuple(expr.BinOp("*", expr.Num(float(abs(c))), x) for x in self.components)
        if c < 0:
            comps = tuple(expr.Neg(x) for x in comps)
        return FieldDef(self.n, comps, self.params, None)

    def reversed(self) -> "FieldDef":
        return FieldDef(self.n, tuple(expr.Neg(c) for c in self.components), self.params,
                        f"-({self.name})" if self.name else None)


def parse_field(source: str, n: int, params: Mapping[str, float] | None = None,
                name: str | None = None) -> FieldDef:
    if n < 1:
        raise InputError("dimension must be a positive integer")
    params = {k: float(v) for k, v in (params or {}).items()}
    comps = expr.parse_expressions(source, n, params)
    if len(comps) != n:
        raise ParseError(f"expected {n} comma-separated components, got {len(comps)}")
    return FieldDef(n, tuple(comps), tuple(sorted(params.items())), name)


# -- catalog ----------------------------------------------------------------

CATALOG_NAMES = ("lorenz", "saddle2", "attractor(n)", "repeller(n)", "limit_cycle",
                 "segment_flow", "even_field")

_FIXED = {
    "lorenz": ("sigma*(y-x), r*x-y-x*z, x*y-b*z", 3, {"sigma": 10.0, "b": 8.0 / 3.0, "r": 24.0}),
    "saddle2": ("x, -y", 2, {}),
    "limit_cycle": ("x*(1-(x^2+y^2))-y, y*(1-(x^2+y^2))+x", 2, {}),
    "segment_flow": ("1-x^2, -y", 2, {}),
    "even_field": ("x^2-y^2, 2*x*y", 2, {}),
}

_SIZED = re.compile(r"^(attractor|repeller)\((\d+)\)$")


def catalog(name: str, overrides: Mapping[str, float] | None = None) -> FieldDef:
    """Built-in fields. ``attractor(n)`` is F(x) = -x and ``repeller(n)`` is F(x) = x."""
    overrides = dict(overrides or {})
    key = name.strip()
    m = _SIZED.match(key)
    if m:
        kind, n = m.group(1), int(m.group(2))
        if n < 1:
            raise InputError(f"dimension must be positive in {name!r}")
        sign = "-" if kind == "attractor" else ""
        source = ", ".join(f"{sign}x{i + 1}" for i in range(n))
        defaults = {}
    elif key in _FIXED:
        source, n, defaults = _FIXED[key]
    else:
        raise InputError(f"unknown catalog field {name!r}; known: {', '.join(CATALOG_NAMES)}")
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise InputError(f"{key} has no parameters {sorted(unknown)}")
    params = {**defaults, **overrides}
    return parse_field(source, n, params, name=key)


def random_polynomial_field(rng, n: int = 2, degree: int = 3) -> FieldDef:
    """Polynomial field with standard normal coefficients on every monomial of total degree <= ``degree``."""
    names = list(expr.coordinate_names(n))[:n]
    monos = [m for m in itertools.product(range(degree + 1), repeat=n) if sum(m) <= degree]
    comps = []
    for _ in range(n):
        terms = []
        for m in monos:
            c = float(rng.standard_normal())
            factors = [f"{c!r}"] + [f"{v}^{k}" for v, k in zip(names, m) if k]
            terms.append("*".join(factors))
        comps.append(" + ".join(terms))
    return parse_field(", ".join(comps), n, name=f"random polynomial (degree {degree})")
