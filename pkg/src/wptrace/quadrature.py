"""Composite Gauss-Legendre quadrature refined by panel halving."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

ORDER = 16


@dataclass(frozen=True)
class QuadResult:
    value: float
    err: float
    panels: int


@lru_cache(maxsize=None)
def _panel_rule(panels: int, order: int = ORDER):
    """Nodes and weights on [0, 1] for ``panels`` equal panels."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = (x + 1) / 2
    w = w / 2
    edges = np.arange(panels) / panels
    nodes = (edges[:, None] + x[None, :] / panels).ravel()
    weights = np.tile(w / panels, panels)
    return nodes, weights


def _converged(new, old, tol_abs, tol_rel):
    return abs(new - old) <= max(tol_abs, tol_rel * abs(new))


def integrate_1d(f, a, b, tol_abs=1e-10, tol_rel=1e-12, max_panels=1024) -> QuadResult:
    """Integrate vectorized ``f`` over [a, b]."""
    if b <= a:
        return QuadResult(0.0, 0.0, 0)
    old, panels = None, 1
    while True:
        t, w = _panel_rule(panels)
        val = float(np.sum(w * f(a + (b - a) * t)) * (b - a))
        if old is not None and (_converged(val, old, tol_abs, tol_rel) or panels >= max_panels):
            return QuadResult(val, abs(val - old), panels)
        old, panels = val, panels * 2


def integrate_2d(f, a, b, inner, tol_abs=1e-10, tol_rel=1e-12, max_panels=256,
                 sqrt_end=False) -> QuadResult:
    """Integrate ``f(x, y)`` over a <= x <= b, lo(x) <= y <= hi(x).

    ``inner(x)`` returns ``(lo, hi)`` arrays.  With ``sqrt_end`` the outer
    variable is x = b - (b - a)(1 - t)^2, so an inner range closing like
    sqrt(b - x) at x = b becomes smooth in t.
    """
    if b <= a:
        return QuadResult(0.0, 0.0, 0)
    old, panels = None, 1
    while True:
        t, wt = _panel_rule(panels)
        if sqrt_end:
            x = b - (b - a) * (1 - t) ** 2
            jac = 2 * (b - a) * (1 - t)
        else:
            x = a + (b - a) * t
            jac = np.full_like(t, b - a)
        lo, hi = inner(x)
        s, ws = _panel_rule(panels)
        y = lo[:, None] + (hi - lo)[:, None] * s[None, :]
        vals = f(np.broadcast_to(x[:, None], y.shape), y)
        inner_int = (vals * ws[None, :]).sum(axis=1) * (hi - lo)
        val = float(np.sum(wt * jac * inner_int))
        if old is not None and (_converged(val, old, tol_abs, tol_rel) or panels >= max_panels):
            return QuadResult(val, abs(val - old), panels)
        old, panels = val, panels * 2
