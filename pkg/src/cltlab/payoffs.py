"""Built-in terminal test functions with certified Holder regularity.

The catalogue is closed on purpose: each entry ships with the exponent
``beta`` for which ``|f(x) - f(y)| <= |x - y|**beta`` holds with constant
exactly 1, plus a convexity flag set analytically. The solvers trust the
certificates; :func:`holder_audit` and :func:`convexity_audit` re-check them
numerically so a miscatalogued entry cannot slip through silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Payoff:
    """Terminal function with a certified Holder exponent and constant <= 1."""

    kind: str
    beta: float
    convex: bool
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    params: tuple = ()

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = self.fn(arr)
        if arr.ndim == 0:
            return float(out)
        return np.asarray(out, dtype=float)


def abs_payoff() -> Payoff:
    return Payoff("abs", 1.0, True, np.abs)


def abs_pow_payoff(beta: float) -> Payoff:
    """``|x|**beta``; attains the Holder-beta constant 1 exactly."""
    beta = float(beta)
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return Payoff(
        "abs_pow", beta, beta == 1.0, lambda a: np.abs(a) ** beta, (("beta", beta),)
    )


def neg_abs_payoff() -> Payoff:
    return Payoff("neg_abs", 1.0, False, lambda a: -np.abs(a))


def cosine_payoff() -> Payoff:
    # slope of cos is bounded by 1, so beta = 1 with constant 1 holds
    return Payoff("cosine_scaled", 1.0, False, np.cos)


def piecewise_linear_payoff(knots, values) -> Payoff:
    """Knot interpolation, constant beyond the end knots.

    Slopes must stay within [-1, 1] so the Lipschitz certificate (beta = 1,
    constant 1) holds globally. Because the extension is flat, the function
    is convex only when the slope sequence 0, m_1, ..., m_k, 0 is
    nondecreasing.
    """
    kx = np.asarray(knots, dtype=float)
    ky = np.asarray(values, dtype=float)
    if kx.ndim != 1 or kx.shape != ky.shape or kx.size < 2:
        raise ValueError("need matching 1-d knots/values with >= 2 points")
    if not np.all(np.diff(kx) > 0):
        raise ValueError("knots must be strictly increasing")
    slopes = np.diff(ky) / np.diff(kx)
    if np.any(np.abs(slopes) > 1.0 + 1e-12):
        raise ValueError("piecewise-linear slopes must stay within [-1, 1]")
    ext = np.concatenate(([0.0], slopes, [0.0]))
    convex = bool(np.all(np.diff(ext) >= -1e-15))
    return Payoff(
        "piecewise_linear",
        1.0,
        convex,
        lambda a: np.interp(a, kx, ky),
        (("knots", tuple(kx)), ("values", tuple(ky))),
    )


@dataclass(frozen=True)
class HolderReport:
    max_ratio: float
    passed: bool
    worst_pair: tuple[float, float]
    pairs: int


def holder_audit(
    payoff: Payoff,
    beta: float,
    num_pairs: int = 512,
    x_range: tuple[float, float] = (-4.0, 4.0),
    seed: int = 0,
) -> HolderReport:
    """Sampled check of ``|f(x) - f(y)| <= |x - y|**beta`` with constant 1.

    Pairs are drawn deterministically from ``seed``; the report carries the
    worst ratio and passes when it stays below ``1 + 1e-9``.
    """
    if num_pairs < 1:
        raise ValueError("num_pairs must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = x_range
    xy = rng.uniform(lo, hi, size=(num_pairs, 2))
    gap = np.abs(xy[:, 0] - xy[:, 1])
    keep = gap > 1e-9
    xs, ys, gap = xy[keep, 0], xy[keep, 1], gap[keep]
    ratios = np.abs(payoff(xs) - payoff(ys)) / gap ** beta
    worst = int(np.argmax(ratios))
    max_ratio = float(ratios[worst])
    return HolderReport(
        max_ratio=max_ratio,
        passed=max_ratio <= 1.0 + 1e-9,
        worst_pair=(float(xs[worst]), float(ys[worst])),
        pairs=int(keep.sum()),
    )


@dataclass(frozen=True)
class ConvexityReport:
    max_excess: float
    midpoint_convex: bool


def convexity_audit(
    payoff: Payoff,
    num_pairs: int = 512,
    x_range: tuple[float, float] = (-4.0, 4.0),
    seed: int = 0,
) -> ConvexityReport:
    """Midpoint test ``f((x+y)/2) <= (f(x)+f(y))/2`` on sampled pairs."""
    rng = np.random.default_rng(seed)
    lo, hi = x_range
    xy = rng.uniform(lo, hi, size=(num_pairs, 2))
    xs, ys = xy[:, 0], xy[:, 1]
    excess = payoff((xs + ys) / 2.0) - (payoff(xs) + payoff(ys)) / 2.0
    max_excess = float(np.max(excess))
    return ConvexityReport(max_excess=max_excess, midpoint_convex=max_excess <= 1e-12)


def make_payoff(kind: str, *, beta=None, knots=None, values=None) -> Payoff:
    if kind == "abs":
        return abs_payoff()
    if kind == "abs_pow":
        if beta is None:
            raise ValueError("abs_pow needs beta")
        return abs_pow_payoff(beta)
    if kind == "neg_abs":
        return neg_abs_payoff()
    if kind == "cosine_scaled":
        return cosine_payoff()
    if kind == "piecewise_linear":
        if knots is None or values is None:
            raise ValueError("piecewise_linear needs knots and values")
        return piecewise_linear_payoff(knots, values)
    raise ValueError(f"unknown payoff kind {kind!r}")


def payoff_from_config(cfg: dict) -> Payoff:
    """Load a payoff from ``{"phi": kind, ...params}``."""
    if not isinstance(cfg, dict) or "phi" not in cfg:
        raise ValueError('payoff config must be an object with a "phi" key')
    return make_payoff(
        cfg["phi"],
        beta=cfg.get("beta"),
        knots=cfg.get("knots"),
        values=cfg.get("values"),
    )
