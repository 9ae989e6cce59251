"""Numerical flow of a vector field: integration, exit times, limit sets.

Everything here is a sampled approximation. Nothing is validated in the
interval-arithmetic sense, and asymptotic sets and omega-limit estimates
are labeled as approximations wherever they are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cubical import CubeSet
from .errors import IntegrationError, InputError
from .field import FieldDef
from .region import rasterize

# Dormand-Prince 5(4) tableau (fields are autonomous, so the nodes c_i are not needed)
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B4

MAX_STEPS = 200_000


def hermite(t0, y0, f0, t1, y1, f1, t):
    """Cubic Hermite interpolation on [t0, t1] (works on broadcastable arrays)."""
    dt = t1 - t0
    s = (t - t0) / dt
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * dt * f0 + h01 * y1 + h11 * dt * f1


@dataclass
class Trajectory:
    """An integrated orbit.

    ``times`` is elapsed flow time (strictly increasing, starting at 0);
    the signed time of sample ``k`` is ``direction * times[k]``.
    """

    times: np.ndarray
    points: np.ndarray
    derivs: np.ndarray
    status: str  # completed | left-region | step-failure
    direction: int = 1
    message: str = ""

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]

    def at(self, s: float) -> np.ndarray:
        """Dense output at elapsed time ``s`` by cubic Hermite interpolation."""
        if not self.times[0] <= s <= self.times[-1]:
            raise ValueError(f"time {s} outside integrated range [0, {self.times[-1]}]")
        k = int(np.searchsorted(self.times, s, side="right")) - 1
        k = min(max(k, 0), len(self.times) - 2)
        if len(self.times) == 1:
            return self.points[0]
        return hermite(self.times[k], self.points[k], self.derivs[k],
                       self.times[k + 1], self.points[k + 1], self.derivs[k + 1], s)


def _rhs(f: FieldDef, direction: int):
    if direction > 0:
        return f.eval_many
    return lambda y: -f.eval_many(y)


def _initial_step(y, d, span, tol):
    d0 = np.max(np.abs(y), axis=1)
    d1 = np.max(np.abs(d), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(d1 > 1e-12, 0.01 * np.maximum(d0, 1e-3) / d1, 1e-3)
    h = np.minimum(h, 0.1 * span) * min(1.0, (tol / 1e-6) ** 0.2)
    return np.maximum(h, 1e-10 * span)


def propagate(rhs, y0, span, tol, *, clip=True, on_step=None, record=False):
    """Advance a batch of states by DOPRI5 with per-row adaptive steps.

    rhs: maps an ``(m, n)`` array of states to derivatives.
    span: elapsed time to integrate (> 0, shared by all rows).
    clip: shorten the final step to land on ``span``. With ``clip=False``
        the step sequence of a row is independent of ``span`` and the row
        stops after the first step reaching or passing it.
    on_step: optional ``callback(rows, t0, y0, f0, t1, y1, f1) -> keep`` run
        after each accepted step for the rows in ``rows``; rows whose
        ``keep`` is False stop with status ``stopped``.
    record: keep every accepted step (needed to build Trajectory objects).

    Returns ``(t, y, status, history)``; status per row is ``completed``,
    ``stopped`` or ``step-failure``.
    """
    y = np.array(y0, dtype=float, copy=True)
    m, n = y.shape
    t = np.zeros(m)
    d = rhs(y)
    h = _initial_step(y, d, span, tol)
    status = np.array(["running"] * m, dtype=object)
    history = [[(0.0, y[i].copy(), d[i].copy())] for i in range(m)] if record else None
    active = np.ones(m, dtype=bool)
    bad = ~np.all(np.isfinite(d), axis=1)
    status[bad] = "step-failure"
    active &= ~bad
    steps = 0
    while active.any():
        steps += 1
        if steps > MAX_STEPS:
            status[active] = "step-failure"
            break
        rows = np.flatnonzero(active)
        yr, dr, tr = y[rows], d[rows], t[rows]
        hr = h[rows].copy()
        if clip:
            hr = np.minimum(hr, span - tr)
        k = [dr]
        for s in range(1, 7):
            inc = sum(a * kk for a, kk in zip(_A[s], k))
            k.append(rhs(yr + hr[:, None] * inc))
        y_new = yr + hr[:, None] * sum(b * kk for b, kk in zip(_B, k) if b != 0)
        err = hr[:, None] * sum(e * kk for e, kk in zip(_E, k) if e != 0)
        scale = tol * (1.0 + np.maximum(np.abs(yr), np.abs(y_new)))
        with np.errstate(invalid="ignore"):
            enorm = np.max(np.abs(err) / scale, axis=1)
        finite = np.all(np.isfinite(y_new), axis=1) & np.isfinite(enorm)
        accept = finite & (enorm <= 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(enorm > 0, 0.9 * enorm ** -0.2, 5.0)
        factor = np.clip(np.nan_to_num(factor, nan=0.2), 0.2, 5.0)
        factor = np.where(accept, factor, np.minimum(factor, 1.0))
        factor = np.where(finite, factor, 0.25)
        h_next = hr * factor

        acc_rows = rows[accept]
        if len(acc_rows):
            f_new = k[6][accept]  # FSAL: last stage is F(y_new)
            t0, y0r, f0 = tr[accept], yr[accept], dr[accept]
            t1 = t0 + hr[accept]
            y1 = y_new[accept]
            t[acc_rows], y[acc_rows], d[acc_rows] = t1, y1, f_new
            if record:
                for j, i in enumerate(acc_rows):
                    history[i].append((t1[j], y1[j].copy(), f_new[j].copy()))
            if on_step is not None:
                keep = np.asarray(on_step(acc_rows, t0, y0r, f0, t1, y1, f_new), dtype=bool)
                stopped = acc_rows[~keep]
                status[stopped] = "stopped"
                active[stopped] = False
            done = acc_rows[(t1 >= span * (1 - 1e-14)) & active[acc_rows]]
            status[done] = "completed"
            active[done] = False

        h[rows] = h_next
        tiny = rows[h_next < 1e-13 * np.maximum(1.0, tr)]
        tiny = tiny[active[tiny]]
        status[tiny] = "step-failure"
        active[tiny] = False
    return t, y, status, history


def integrate(f: FieldDef, x0, t_span, tol: float = 1e-9, *, region=None) -> Trajectory:
    """Integrate from ``x0`` over ``t_span = (0, T)``; ``T < 0`` integrates backward.

    If ``region`` is given, integration stops at the first step ending
    outside it (status ``left-region``).
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    t0, t1 = (0.0, float(t_span)) if np.isscalar(t_span) else map(float, t_span)
    if t0 != 0.0:
        raise InputError("t_span must start at 0")
    if not math.isfinite(t1) or t1 == 0:
        raise InputError("t_span must be finite and non-empty")
    x0 = np.asarray(x0, dtype=float).reshape(1, -1)
    if x0.shape[1] != f.n:
        raise InputError(f"initial point must have dimension {f.n}")
    direction = 1 if t1 > 0 else -1

    def inside(rows, t0_, y0_, f0_, t1_, y1_, f1_):
        return region.contains(y1_)

    on_step = inside if region is not None else None

    _, _, status, hist = propagate(_rhs(f, direction), x0, abs(t1), tol, on_step=on_step, record=True)
    ts = np.array([h[0] for h in hist[0]])
    ys = np.array([h[1] for h in hist[0]])
    ds = np.array([h[2] for h in hist[0]])
    st = {"completed": "completed", "stopped": "left-region"}.get(status[0], "step-failure")
    traj = Trajectory(ts, ys, ds, st, direction)
    if st == "step-failure":
        raise IntegrationError("step size underflow or non-finite state", ts[-1] * direction, ys[-1])
    return traj


def exit_time(f: FieldDef, region, x, t_max: float, tol: float = 1e-10,
              time_tol: float = 1e-9) -> float:
    """First time the forward orbit of ``x`` crosses out of ``region``.

    The crossing is bracketed between integration steps and refined by
    bisection of the region's level function along the cubic Hermite
    interpolant. Returns ``math.inf`` if the orbit stays in the region up
    to ``t_max``.
    """
    x = np.asarray(x, dtype=float)
    if t_max <= 0:
        raise InputError("t_max must be positive")
    if not region.contains(x)[0]:
        raise InputError("starting point is not in the region")
    traj = integrate(f, x, (0.0, t_max), tol, region=region)
    if traj.status == "completed":
        return math.inf
    k = len(traj.times) - 2
    a, b = traj.times[k], traj.times[k + 1]
    pa, pb = traj.points[k], traj.points[k + 1]
    fa, fb = traj.derivs[k], traj.derivs[k + 1]

    def g(s):
        return region.level(hermite(a, pa, fa, b, pb, fb, s))[0]

    lo, hi = a, b
    while hi - lo > time_tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def flow_to(f: FieldDef, x, t: float, tol: float = 1e-10) -> np.ndarray:
    """The time-``t`` image of ``x``."""
    if t == 0:
        return np.asarray(x, dtype=float)
    return integrate(f, x, (0.0, t), tol).final


def omega_estimate(f: FieldDef, x, burn_in: float, window: float, samples: int = 200,
                   tol: float = 1e-9) -> np.ndarray:
    """Heuristic omega-limit approximation: orbit samples over [burn_in, burn_in + window]."""
    if burn_in <= 0 or window <= 0:
        raise InputError("burn_in and window must be positive")
    traj = integrate(f, x, (0.0, burn_in + window), tol)
    ts = np.linspace(burn_in, burn_in + window, samples)
    return np.array([traj.at(s) for s in ts])


@dataclass
class AsymptoticSet:
    """Cells whose center orbit stays in the region over the signed horizon.

    This is a sampled approximation of the negative (``direction='negative'``)
    or positive asymptotic set, never a rigorous enclosure.
    """

    region: object
    cells: CubeSet
    horizon: float
    direction: str
    indeterminate: CubeSet = field(default=None)
    label: str = "approximation"


def orbit_stays(f: FieldDef, region, points, horizon: float, direction: int, tol=1e-7,
                sample_dt=None):
    """Which orbits stay in ``region`` for elapsed time ``horizon``.

    Membership is tested at every integration step endpoint and, when
    ``sample_dt`` is set, on the Hermite interpolant at multiples of it.
    Steps are not clipped at the horizon, so the checks made for a shorter
    horizon are a subset of those made for a longer one.

    Returns ``(stays, failed)`` boolean arrays.
    """
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    stays = region.contains(pts)
    if m == 0:
        return stays, np.zeros(0, dtype=bool)

    def on_step(rows, t0, y0, f0, t1, y1, f1):
        # every step handed here starts before the horizon
        keep = region.contains(y1)
        if sample_dt:
            lo = np.ceil(t0 / sample_dt)
            hi = np.floor(np.minimum(t1, horizon) / sample_dt)
            for j in np.flatnonzero(keep & (hi >= lo)):
                s = np.arange(lo[j], hi[j] + 1)[:, None] * sample_dt
                p = hermite(t0[j], y0[j], f0[j], t1[j], y1[j], f1[j], s)
                keep[j] = bool(region.contains(p).all())
        return keep

    idx = np.flatnonzero(stays)
    failed = np.zeros(m, dtype=bool)
    if len(idx):
        _, _, status, _ = propagate(_rhs(f, direction), pts[idx], horizon, tol, clip=False,
                                    on_step=on_step)
        stays[idx] = status == "completed"
        failed[idx] = status == "step-failure"
        stays[idx[failed[idx]]] = False
    return stays, failed


def asymptotic_approx(f: FieldDef, region, resolution: float, T: float,
                      direction: str = "negative", tol: float = 1e-7) -> AsymptoticSet:
    """Approximate N^- (``negative``) or N^+ (``positive``) on a grid of cell centers."""
    if resolution <= 0 or T <= 0:
        raise InputError("resolution and T must be positive")
    if direction not in ("negative", "positive"):
        raise InputError("direction must be 'negative' or 'positive'")
    cubes = rasterize(region, resolution)
    sign = -1 if direction == "negative" else 1
    stays, failed = orbit_stays(f, region, cubes.centers(), T, sign, tol)
    arr = cubes.array
    return AsymptoticSet(
        region=region,
        cells=CubeSet.from_array(cubes.n, resolution, arr[stays]),
        horizon=T,
        direction=direction,
        indeterminate=CubeSet.from_array(cubes.n, resolution, arr[failed]),
    )
