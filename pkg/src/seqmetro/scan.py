"""Grid scans and derivative-free maximization over waiting times.

The strategy is always grid first, then local refinement from the best
grid point, so "global" statements hold only up to the grid resolution.
Among equal maxima the smallest waiting time wins.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .fisher import FisherReport
from .models import thermo_f21

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"axis {self.name!r} needs at least 2 points, got {self.count}")
        if not self.min < self.max:
            raise ValueError(f"axis {self.name!r} needs min < max, got [{self.min}, {self.max}]")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and not self.min > 0:
            raise ValueError(f"log-spaced axis {self.name!r} needs min > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class Record:
    point: tuple
    value: float
    result: object = None
    flags: tuple = ()
    error: str | None = None


@dataclass(frozen=True)
class ScanGrid:
    axes: tuple
    records: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "records", tuple(self.records))

    @classmethod
    def tau(cls, tmin: float = 0.05, tmax: float = 20.0, count: int = 200, log: bool = True) -> "ScanGrid":
        return cls((Axis("gtau", tmin, tmax, count, "log" if log else "linear"),))

    def points(self) -> list[tuple]:
        mesh = np.meshgrid(*[a.values() for a in self.axes], indexing="ij")
        return [tuple(float(m[idx]) for m in mesh) for idx in np.ndindex(mesh[0].shape)]

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    @property
    def coords(self) -> np.ndarray:
        return np.array([r.point for r in self.records])

    def best(self) -> Record:
        """Record with the largest finite value; ties go to the earliest point."""
        vals = np.where(np.isfinite(self.values), self.values, -np.inf)
        return self.records[int(np.argmax(vals))]


@dataclass(frozen=True)
class OptResult:
    argmax: tuple
    value: float
    method: str
    iterations: int
    converged: bool
    flags: tuple = ()
    extras: dict = field(default_factory=dict, compare=False)


def _value_of(res) -> float:
    if isinstance(res, FisherReport):
        return float(res.F_2g1)
    return float(res)


def scan(f: Callable, grid: ScanGrid, near_zero_rel: float = 0.1) -> ScanGrid:
    """Evaluate ``f(*point)`` on every grid point.

    Failures are recorded per point (value NaN, message in ``error``) and
    the scan continues. On 1-D grids interior local minima lower than
    ``near_zero_rel`` times the scan maximum get the ``"near-zero-fi"`` flag.
    """
    records = []
    for pt in grid.points():
        try:
            res = f(*pt)
            val = _value_of(res)
            flags = tuple(res.flags) if isinstance(res, FisherReport) else ()
            records.append(Record(pt, val, res, flags))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            records.append(Record(pt, float("nan"), None, ("evaluation-failed",), str(exc)))
    if len(grid.axes) == 1 and near_zero_rel is not None:
        records = _flag_dips(records, near_zero_rel)
    return replace(grid, records=tuple(records))


def scan_1d(f: Callable[[float], object], grid: ScanGrid, near_zero_rel: float = 0.1) -> ScanGrid:
    if len(grid.axes) != 1:
        raise ValueError("scan_1d needs a one-axis grid")
    return scan(f, grid, near_zero_rel)


def _flag_dips(records: list[Record], rel: float) -> list[Record]:
    v = np.array([r.value for r in records])
    finite = np.isfinite(v)
    if not finite.any():
        return records
    vmax = v[finite].max()
    out = list(records)
    for i in range(1, len(v) - 1):
        if not (finite[i - 1] and finite[i] and finite[i + 1]):
            continue
        if v[i] <= v[i - 1] and v[i] <= v[i + 1] and v[i] < rel * vmax:
            out[i] = replace(out[i], flags=out[i].flags + ("near-zero-fi",))
    return out


def local_maxima(values: Sequence[float]) -> list[int]:
    """Indices of strict interior local maxima (plateaus count once)."""
    v = np.asarray(values, dtype=float)
    idx = []
    i = 1
    while i < len(v) - 1:
        if v[i] > v[i - 1]:
            j = i
            while j < len(v) - 1 and v[j + 1] == v[i]:
                j += 1
            if j < len(v) - 1 and v[j + 1] < v[i]:
                idx.append(i)
            i = j + 1
        else:
            i += 1
    return idx


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-4,
                   max_iter: int = 500) -> tuple[float, float, int]:
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x), iterations)``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        it += 1
        if fc >= fd:      # ties move left: smaller argument preferred
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc >= fd else (d, fd)
    return x, fx, it


def maximize_1d(f: Callable[[float], float], grid: ScanGrid | Sequence[float],
                tol: float = 1e-4) -> OptResult:
    """Grid pre-scan then golden-section refinement around the best point.

    ``grid`` is a 1-D ``ScanGrid`` (evaluated here if it has no records)
    or a sequence of abscissae. If the best grid point is an endpoint the
    boundary is returned with the ``"boundary"`` flag.
    """
    if isinstance(grid, ScanGrid):
        if not grid.records:
            grid = scan(lambda t: f(t), grid, near_zero_rel=None)
        xs = grid.coords[:, 0]
        ys = grid.values
    else:
        xs = np.asarray(grid, dtype=float)
        ys = np.array([f(x) for x in xs])
    ys_safe = np.where(np.isfinite(ys), ys, -np.inf)
    i = int(np.argmax(ys_safe))
    if i == 0 or i == len(xs) - 1:
        return OptResult((float(xs[i]),), float(ys[i]), "grid", len(xs), False, ("boundary",))
    x, fx, it = golden_section(f, float(xs[i - 1]), float(xs[i + 1]), tol)
    if fx < ys[i]:
        x, fx = float(xs[i]), float(ys[i])
    return OptResult((float(x),), float(fx), "golden-section", it, True)


def maximize_2d(f: Callable[[float, float], float], start: Sequence[float],
                step: Sequence[float] | float | None = None, tol: float = 1e-4,
                max_iter: int = 500, upper: float | None = None) -> OptResult:
    """Nelder-Mead maximization of ``f(tau_g, tau_e)`` with ``0 <= tau (<= upper)``.

    Converged means the final simplex diameter is below ``tol``.
    """
    x0 = np.asarray(start, dtype=float)
    if step is None:
        step = np.maximum(0.1 * np.abs(x0), 0.05)
    step = np.broadcast_to(np.asarray(step, dtype=float), x0.shape)
    simplex = np.vstack([x0] + [x0 + np.eye(len(x0))[k] * step[k] for k in range(len(x0))])

    def clamp(x):
        x = np.maximum(x, 0.0)
        return x if upper is None else np.minimum(x, upper)

    def neg(x):
        return -f(*clamp(x))

    res = minimize(neg, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": tol / 4, "fatol": 1e-15,
                            "maxiter": max_iter, "maxfev": 4 * max_iter})
    simplex = res.final_simplex[0]
    diam = max(np.linalg.norm(a - b) for a in simplex for b in simplex)
    best = clamp(res.x)
    val = float(f(*best))
    start_val = float(f(*clamp(x0)))
    flags = []
    if start_val > val:
        best, val = clamp(x0), start_val
    converged = bool(diam < tol)
    if not converged:
        flags.append("not-converged")
    return OptResult(tuple(float(v) for v in best), val, "nelder-mead", int(res.nit), converged,
                     tuple(flags), {"simplex_diameter": float(diam)})


def best_on_grid_2d(f: Callable[[float, float], float], xs: Sequence[float],
                    ys: Sequence[float]) -> tuple[tuple[float, float], float]:
    best, best_pt = -np.inf, None
    for x in xs:
        for y in ys:
            v = f(x, y)
            if v > best:
                best, best_pt = v, (float(x), float(y))
    return best_pt, float(best)


# --------------------------------------------------------------------------- thermometry schedules

def thermo_f_star(model, grid: ScanGrid | None = None, tol: float = 1e-4) -> OptResult:
    """``F* = max_tau F_{2|1}`` with a common waiting time."""
    grid = ScanGrid.tau() if grid is None else grid
    return maximize_1d(lambda t: thermo_f21(model, t, t), grid, tol)


def thermo_f_sharp(model, star: OptResult | None = None, grid: Sequence[float] | None = None,
                   tol: float = 1e-4, max_iter: int = 500, upper: float = 60.0) -> OptResult:
    """``F# = max_{tau_g, tau_e} F_{2|1}`` with outcome-conditioned waiting times.

    Starts from the best point of a 2-D grid (which includes the diagonal
    optimum of ``star``); restarts once from the Nelder-Mead result.
    """
    if star is None:
        star = thermo_f_star(model)
    if grid is None:
        grid = np.geomspace(0.05, upper, 40)

    def obj(tg, te):
        return thermo_f21(model, tg, te)

    pt, val = best_on_grid_2d(obj, grid, grid)
    t_star = star.argmax[0]
    if star.value >= val:
        pt, val = (t_star, t_star), star.value
    res = maximize_2d(obj, pt, tol=tol, max_iter=max_iter, upper=upper)
    res2 = maximize_2d(obj, res.argmax, tol=tol, max_iter=max_iter, upper=upper)
    if res2.value > res.value:
        res = replace(res2, iterations=res.iterations + res2.iterations)
    if res.value < star.value:
        res = replace(res, argmax=(t_star, t_star), value=star.value)
    return res
