"""Compact regions of R^n used as candidate isolating blocks.

Text form (shared with the CLI)::

    ball:cx,cy[,cz]:r
    box:lo1,lo2[,lo3]:hi1,hi2[,hi3]
    shell:cx,cy[,cz]:rin:rout
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cubical
from .cubical import CubeSet
from .errors import InputError


def _vec(values, name) -> tuple:
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise InputError(f"{name} must be a list of numbers") from None
    if not out:
        raise InputError(f"{name} must not be empty")
    if not all(np.isfinite(out)):
        raise InputError(f"{name} must be finite")
    return out


class _Region:
    def contains(self, points) -> np.ndarray:
        return self.level(points) <= 0


@dataclass(frozen=True)
class Ball(_Region):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        if not self.radius > 0:
            raise InputError("ball radius must be positive")

    @property
    def n(self) -> int:
        return len(self.center)

    def level(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(p - np.asarray(self.center), axis=1) - self.radius

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def spec(self) -> str:
        return f"ball:{_fmt(self.center)}:{self.radius:g}"

    def is_symmetric(self) -> bool:
        return all(c == 0 for c in self.center)


@dataclass(frozen=True)
class Box(_Region):
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo, hi = _vec(self.lo, "lo corner"), _vec(self.hi, "hi corner")
        if len(lo) != len(hi):
            raise InputError("box corners have different dimensions")
        if not all(a < b for a, b in zip(lo, hi)):
            raise InputError("box requires lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return len(self.lo)

    def level(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.max(np.maximum(np.asarray(self.lo) - p, p - np.asarray(self.hi)), axis=1)

    def bounding_box(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def spec(self) -> str:
        return f"box:{_fmt(self.lo)}:{_fmt(self.hi)}"

    def is_symmetric(self) -> bool:
        return all(a == -b for a, b in zip(self.lo, self.hi))


@dataclass(frozen=True)
class Shell(_Region):
    center: tuple
    inner: float
    outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        if not 0 < self.inner < self.outer:
            raise InputError("shell requires 0 < inner < outer radius")

    @property
    def n(self) -> int:
        return len(self.center)

    def level(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.linalg.norm(p - np.asarray(self.center), axis=1)
        return np.maximum(self.inner - r, r - self.outer)

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.outer, c + self.outer

    def spec(self) -> str:
        return f"shell:{_fmt(self.center)}:{self.inner:g}:{self.outer:g}"

    def is_symmetric(self) -> bool:
        return all(c == 0 for c in self.center)


@dataclass(frozen=True)
class CubeRegion(_Region):
    """A union of grid cubes. Its level function is only a sign (+1 / -1)."""

    cubes: CubeSet

    def __post_init__(self):
        if len(self.cubes) == 0:
            raise InputError("cube region is empty")

    @property
    def n(self) -> int:
        return self.cubes.n

    def level(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        idx = self.cubes.cell_of(p)
        inside = np.array([tuple(i) in self.cubes.cells for i in idx.tolist()], dtype=bool)
        return np.where(inside, -1.0, 1.0)

    def bounding_box(self):
        arr = self.cubes.array
        return arr.min(axis=0) * self.cubes.h, (arr.max(axis=0) + 1) * self.cubes.h

    def spec(self) -> str:
        return f"cubes:{len(self.cubes)}@{self.cubes.h:g}"

    def is_symmetric(self) -> bool:
        mirrored = {tuple(-v - 1 for v in c) for c in self.cubes.cells}
        return mirrored == set(self.cubes.cells)


Region = Ball | Box | Shell | CubeRegion


def _fmt(values) -> str:
    return ",".join(f"{v:g}" for v in values)


def diameter(region) -> float:
    lo, hi = region.bounding_box()
    return float(np.linalg.norm(np.asarray(hi) - np.asarray(lo)))


def parse_region(text: str):
    """Parse the region mini-grammar, e.g. ``ball:0,0,0:60`` or ``box:-1,-1:1,1``."""
    parts = text.strip().split(":")
    kind = parts[0].strip().lower()

    def nums(s, what):
        try:
            return [float(v) for v in s.split(",")]
        except ValueError:
            raise InputError(f"bad {what} in region {text!r}") from None

    try:
        if kind == "ball" and len(parts) == 3:
            (r,) = nums(parts[2], "radius")
            return Ball(tuple(nums(parts[1], "center")), r)
        if kind == "box" and len(parts) == 3:
            return Box(tuple(nums(parts[1], "lo corner")), tuple(nums(parts[2], "hi corner")))
        if kind == "shell" and len(parts) == 4:
            (rin,) = nums(parts[2], "inner radius")
            (rout,) = nums(parts[3], "outer radius")
            return Shell(tuple(nums(parts[1], "center")), rin, rout)
    except ValueError as exc:  # wrong number of radii
        raise InputError(f"bad region {text!r}: {exc}") from None
    raise InputError(
        f"bad region {text!r}; expected ball:c1,..:r, box:lo1,..:hi1,.. or shell:c1,..:rin:rout"
    )


def rasterize(region, h: float) -> CubeSet:
    if isinstance(region, CubeRegion):
        if region.cubes.h != h:
            raise InputError("cube region lives on a different grid")
        return region.cubes
    return cubical.rasterize(region, h)
