"""Backward sup-expectation recursion for scaled random walks.

The recursion starts from the terminal function and, one level at a time,
replaces each value by the largest expectation of the next level over the
family, with steps scaled by ``1/sqrt(n)``. Two execution modes:

* ``lattice`` (used whenever the family has a common support step ``c``):
  level ``k`` lives on the cone ``{j * c/sqrt(n) : |j| <= k * m}`` where
  ``m`` is the largest support point in lattice units. Every lookup is an
  exact shift, so the origin value carries no interpolation error, only
  float rounding (documented <= 1e-12 at desk scale). Rate experiments run
  exclusively in this mode; even a small interpolation bias would pollute
  slope fits for exponents as small as 1/6.
* ``grid``: a fixed uniform grid with linear interpolation. Positions that
  step beyond the grid are priced by the terminal function itself; far from
  the evaluation cone the solution hugs the terminal data, so with a half
  width of at least ``8 * sigma_bar`` the boundary bias is Gaussian-tail
  negligible. Smaller grids are refused.

Determinism contract: per-point sums run over ascending support, members are
reduced with a pointwise max in fixed order after all expectations are
formed, and levels are sequential. Vectorization across points preserves the
sequential result bit for bit.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import GridTooSmallError, LabError
from .families import DiscreteDist, Family
from .fields import GridSpec, ValueField
from .payoffs import Payoff

FLOAT_ROUNDING = 1e-12  # documented rounding envelope for desk-scale n


class ModeMismatchError(LabError, ValueError):
    """Lattice mode requested for a family without a common lattice step."""


def _lattice_offsets(dist: DiscreteDist, step: float) -> tuple[int, ...]:
    offsets = []
    for s in dist.support:
        j = round(s / step)
        if abs(s - j * step) > 1e-9 * max(1.0, abs(s)):
            raise ModeMismatchError(f"support point {s} is off the lattice {step}*Z")
        offsets.append(int(j))
    return tuple(offsets)


def _expect_lattice(values: np.ndarray, dist: DiscreteDist, offsets, reach: int):
    width = values.size - 2 * reach
    out = None
    for p, off in zip(dist.probs, offsets):  # ascending support
        seg = values[reach + off : reach + off + width]
        if out is None:
            out = p * seg
        else:
            out += p * seg
    return out


def _expect_grid(values, x, dist: DiscreteDist, n: int, payoff: Payoff):
    root = math.sqrt(n)
    out = None
    for p, s in zip(dist.probs, dist.support):  # ascending support
        pos = x + (s / root)
        vals = np.interp(pos, x, values)
        if s != 0.0:
            lo = pos < x[0]
            hi = pos > x[-1]
            if lo.any():
                vals[lo] = payoff(pos[lo])
            if hi.any():
                vals[hi] = payoff(pos[hi])
        term = p * vals
        out = term if out is None else out + term
    return out


def step_expectation(
    values,
    dist: DiscreteDist,
    n: int,
    mode: str,
    *,
    lattice_step: float | None = None,
    x_points=None,
    payoff: Payoff | None = None,
):
    """Expected next-level slice ``E values(x + xi / sqrt(n))`` for one law.

    Lattice mode returns a slice shrunk by ``m`` points on each side, where
    ``m`` is the largest absolute support offset; grid mode returns a
    same-length slice with off-grid positions priced by the terminal
    function.
    """
    values = np.asarray(values, dtype=float)
    if mode == "lattice":
        if lattice_step is None:
            raise ModeMismatchError("lattice mode requires a lattice step")
        offsets = _lattice_offsets(dist, lattice_step)
        reach = max(abs(o) for o in offsets)
        if values.size <= 2 * reach:
            raise GridTooSmallError("slice shorter than one step's reach")
        return _expect_lattice(values, dist, offsets, reach)
    if mode == "grid":
        if x_points is None or payoff is None:
            raise ValueError("grid mode requires x_points and payoff")
        return _expect_grid(values, np.asarray(x_points, dtype=float), dist, n, payoff)
    raise ValueError(f"unknown mode {mode!r}")


def resolve_mode(family: Family, mode: str | None) -> str:
    if mode is None:
        return "lattice" if family.lattice_step is not None else "grid"
    if mode == "lattice" and family.lattice_step is None:
        raise ModeMismatchError("family has no common lattice step")
    if mode not in ("lattice", "grid"):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def default_grid(family: Family, n: int, center: float = 0.0) -> GridSpec:
    """Grid used when no spec is given: step 1/n, half width ``8 * sigma_bar``."""
    hw = 8.0 * family.sigma_bar + abs(center)
    return GridSpec(step=1.0 / n, half_width=max(hw, 1.0), center=center)


def _march(family: Family, payoff: Payoff, n: int, mode: str, grid, collect):
    """Run the backward loop, handing each level (k, x, values) to ``collect``."""
    if int(n) != n or n < 1:
        raise ValueError(f"need integer n >= 1, got {n}")
    n = int(n)
    if mode == "lattice":
        step = family.lattice_step
        delta = step / math.sqrt(n)
        member_offsets = [_lattice_offsets(d, step) for d in family.members]
        reach = max(max(abs(o) for o in offs) for offs in member_offsets)
        k = n
        x = np.arange(-k * reach, k * reach + 1) * delta
        cur = np.asarray(payoff(x), dtype=float)
        collect(k, x, cur)
        for k in range(n - 1, -1, -1):
            best = None
            for dist, offs in zip(family.members, member_offsets):
                e = _expect_lattice(cur, dist, offs, reach)
                best = e if best is None else np.maximum(best, e)
            cur = best
            collect(k, np.arange(-k * reach, k * reach + 1) * delta, cur)
        return delta, cur

    grid = grid or default_grid(family, n)
    if grid.half_width + 1e-12 < 8.0 * family.sigma_bar + abs(grid.center):
        raise GridTooSmallError(
            f"half width {grid.half_width} below 8*sigma_bar + |center| = "
            f"{8.0 * family.sigma_bar + abs(grid.center)}"
        )
    x = grid.points()
    if x.size < 3:
        raise GridTooSmallError("grid needs at least 3 points")
    cur = np.asarray(payoff(x), dtype=float)
    collect(n, x, cur)
    for k in range(n - 1, -1, -1):
        best = None
        for dist in family.members:
            e = _expect_grid(cur, x, dist, n, payoff)
            best = e if best is None else np.maximum(best, e)
        cur = best
        collect(k, x, cur)
    return grid.step, cur


def solve_recursion(
    family: Family,
    payoff: Payoff,
    n: int,
    mode: str | None = None,
    grid: GridSpec | None = None,
) -> ValueField:
    """Full backward solve keeping every level; memory is O(n^2) on lattices."""
    mode = resolve_mode(family, mode)
    xs: list[np.ndarray] = [None] * (n + 1)
    values: list[np.ndarray] = [None] * (n + 1)

    def collect(k, x, v):
        xs[k] = x
        values[k] = np.array(v, dtype=float, copy=True)

    h, _ = _march(family, payoff, n, mode, grid, collect)
    return ValueField(
        mode=mode,
        n=int(n),
        h=h,
        times=np.arange(n + 1) / n,
        xs=xs,
        values=values,
    )


def origin_value(
    family: Family,
    payoff: Payoff,
    n: int,
    mode: str | None = None,
    grid: GridSpec | None = None,
) -> float:
    """Initial-time value at x = 0 without storing the field (O(n) memory)."""
    mode = resolve_mode(family, mode)
    _, final = _march(family, payoff, n, mode, grid, lambda k, x, v: None)
    if mode == "lattice":
        return float(final[final.size // 2])
    pts = (grid or default_grid(family, n)).points()
    return float(np.interp(0.0, pts, final))
