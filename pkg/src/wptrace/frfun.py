"""Friedman-Ramanujan functions.

f is in F^{K,N} when |f(l) - p(l) e^l| <= c (l+1)^{N-1} e^{l/2} with deg p < K.
An :class:`FRFunction` stores an exact exponential polynomial plus optional
samples on the uniform grid [0, l_max]; the exact part is moved through P,
L and convolution in closed form, the samples by trapezoid rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.stats import qmc

from . import kernels
from .fexpr import ExpPoly, parse

ONE = Fraction(1)


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FRFunction:
    exact: ExpPoly
    h: float = 1e-3
    lmax: float = 40.0
    rem: Optional[np.ndarray] = field(default=None, compare=False)
    K: int = 0
    N: int = 1

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid step must be positive")
        if self.lmax < 10:
            raise ValueError("l_max must be at least 10")
        n = self.size
        if abs((n - 1) * self.h - self.lmax) > 1e-9 * self.lmax:
            raise ValueError("l_max must be a multiple of the grid step")
        if self.rem is not None:
            rem = np.asarray(self.rem, dtype=float)
            if rem.shape != (n,):
                raise ValueError(f"remainder must have {n} samples")
            object.__setattr__(self, "rem", rem)

    # -- construction --------------------------------------------------------
    @classmethod
    def from_expr(cls, text: str, h=1e-3, lmax=40.0, K=None, N=1) -> "FRFunction":
        e = parse(text)
        if K is None:
            K = len(e.part(ONE))
        return cls(e, h, lmax, None, K, N)

    @classmethod
    def from_samples(cls, values, h, K=0, N=1) -> "FRFunction":
        values = np.asarray(values, dtype=float)
        return cls(ExpPoly(), h, h * (len(values) - 1), values, K, N)

    @property
    def size(self) -> int:
        return int(round(self.lmax / self.h)) + 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.lmax, self.size)

    @property
    def principal(self) -> np.ndarray:
        """Coefficients (ascending) of p in p(l) e^l, truncated to degree < K."""
        p = self.exact.part(ONE)[: self.K]
        return np.array([float(c) for c in p])

    def values(self) -> np.ndarray:
        v = self.exact(self.grid)
        return v + self.rem if self.rem is not None else v

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        v = self.exact(x)
        if self.rem is not None:
            v = v + np.interp(x, self.grid, self.rem)
        return v

    def _like(self, exact, rem, K=None, N=None):
        return FRFunction(exact, self.h, self.lmax, rem,
                          self.K if K is None else K, self.N if N is None else N)

    def __add__(self, other: "FRFunction"):
        _same_grid(self, other)
        rem = _add_opt(self.rem, other.rem)
        return self._like(self.exact + other.exact, rem, max(self.K, other.K), max(self.N, other.N))

    def scale(self, c) -> "FRFunction":
        c = Fraction(c) if not isinstance(c, float) else Fraction(repr(c))
        return self._like(ExpPoly.const(c) * self.exact,
                          None if self.rem is None else float(c) * self.rem)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def remainder(self, K=None) -> np.ndarray:
        """f - p e^l on the grid, with p the degree < K part of the e^l coefficient."""
        K = self.K if K is None else K
        p = self.exact.part(ONE)
        high = (Fraction(0),) * K + p[K:] if len(p) > K else ()
        rest = self.exact.without(ONE) + ExpPoly({ONE: high})
        v = rest(self.grid)
        return v + self.rem if self.rem is not None else v


def _add_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _same_grid(f, g):
    if not (math.isclose(f.h, g.h, rel_tol=1e-12) and math.isclose(f.lmax, g.lmax, rel_tol=1e-12)):
        raise GridMismatch(f"grid mismatch: (h={f.h}, l_max={f.lmax}) vs (h={g.h}, l_max={g.lmax})")


def apply_P(f: FRFunction) -> FRFunction:
    """P f (x) = int_0^x f."""
    rem = None
    if f.rem is not None:
        rem = integrate.cumulative_trapezoid(f.rem, dx=f.h, initial=0.0)
    return f._like(f.exact.integral(), rem)


def apply_L(f: FRFunction) -> FRFunction:
    """L = Id - P."""
    pf = apply_P(f)
    rem = None if f.rem is None else f.rem - pf.rem
    return f._like(f.exact - pf.exact, rem)


def apply_op(f: FRFunction, ops: str) -> FRFunction:
    """Apply a word in P and L, rightmost first: ``'LLP'`` is L(L(P f))."""
    for op in reversed(ops.upper()):
        if op == "P":
            f = apply_P(f)
        elif op == "L":
            f = apply_L(f)
        else:
            raise ValueError(f"unknown operator {op!r}")
    return f


def convolve(f1: FRFunction, f2: FRFunction) -> FRFunction:
    """(f1 * f2)(l) = int_0^l f1(s) f2(l - s) ds."""
    _same_grid(f1, f2)
    exact = f1.exact.convolve(f2.exact)
    rem = None
    if f1.rem is not None or f2.rem is not None:
        x = f1.grid
        a = f1.exact(x)
        b = f2.exact(x)
        rem = np.zeros_like(x)
        if f1.rem is not None:
            rem = rem + kernels.trapz_convolve(f1.rem, b + (f2.rem if f2.rem is not None else 0), f1.h)
        if f2.rem is not None:
            rem = rem + kernels.trapz_convolve(a, f2.rem, f1.h)
    return FRFunction(exact, f1.h, f1.lmax, rem, f1.K + f2.K, f1.N + f2.N)


def _envelope(x, N):
    return (x + 1.0) ** (N - 1) * np.exp(x / 2)


def fr_norm(f: FRFunction, K: int, N: int) -> float:
    """||p||_inf + sup |f - p e^l| / ((l+1)^{N-1} e^{l/2}) over the grid."""
    p = f.exact.part(ONE)[:K]
    pn = max((abs(float(c)) for c in p), default=0.0)
    r = f.remainder(K)
    return pn + float(np.max(np.abs(r) / _envelope(f.grid, N)))


def weak_fr_norm(f: FRFunction, K: int, N: int) -> float:
    """As :func:`fr_norm` with |f - p e^l| replaced by its running integral."""
    p = f.exact.part(ONE)[:K]
    pn = max((abs(float(c)) for c in p), default=0.0)
    cum = integrate.cumulative_trapezoid(np.abs(f.remainder(K)), dx=f.h, initial=0.0)
    return pn + float(np.max(cum / _envelope(f.grid, N)))


def growth_slope(x, y, lo, N: int = 1) -> float:
    """Slope of log(running max of |y| / ((x+1)^{N-1} e^{x/2})) against x on [lo, max x]."""
    mask = x >= lo
    ratio = np.abs(y[mask]) / _envelope(x[mask], N)
    env = np.maximum.accumulate(ratio)
    if not np.all(env > 0):
        env = env + np.finfo(float).tiny
    slope, _ = np.polyfit(x[mask], np.log(env), 1)
    return float(slope)


def check_charFR(f: FRFunction, K: int, N: int, lo: float = 5.0, tol: float = 0.01) -> dict:
    """Is L^K f a remainder?  Reports its norm in R^N and the normalized growth slope."""
    g = f
    for _ in range(K):
        g = apply_L(g)
    vals = g.values()
    slope = growth_slope(g.grid, vals, lo, N)
    norm = float(np.max(np.abs(vals) / _envelope(g.grid, N)))
    principal = [str(c) for c in g.exact.part(ONE)]
    return {"K": K, "N": N, "lo": lo, "lmax": f.lmax, "h": f.h, "growth_slope": slope,
            "remainder_norm": norm, "principal_of_LKf": principal, "passes": slope <= tol}


# -- pseudo-convolutions --------------------------------------------------------

@dataclass(frozen=True)
class PseudoConvSpec:
    """Level function ``h`` and weight ``phi`` on R_{>=0}^n (vectorized over the last axis).

    ``a`` is the cutoff of the box [a, inf)^n on which the classes E and the
    comparison estimate are probed; the pseudo-convolution itself integrates
    over the whole non-negative orthant.
    """

    n: int
    h: Callable
    phi: Callable
    a: float = 1.0
    dh_dx1: Optional[Callable] = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("cutoff a must be positive")
        if self.n < 1:
            raise ValueError("arity must be positive")


class RootError(RuntimeError):
    pass


def _dh1(spec, x):
    if spec.dh_dx1 is not None:
        return spec.dh_dx1(x)
    eps = 1e-6 * max(1.0, abs(x[0]))
    xp, xm = np.array(x, dtype=float), np.array(x, dtype=float)
    if x[0] > eps:
        xp[0] += eps
        xm[0] -= eps
        return (spec.h(xp) - spec.h(xm)) / (2 * eps)
    xp[0] += eps
    x2 = np.array(x, dtype=float)
    x2[0] += 2 * eps
    return (-3 * spec.h(np.array(x, dtype=float)) + 4 * spec.h(xp) - spec.h(x2)) / (2 * eps)


def _solve_x1(spec, ell, tail):
    def g(x1):
        return spec.h(np.concatenate(([x1], tail))) - ell
    lo, hi = 0.0, 1.0
    glo = g(lo)
    if glo > 0:
        return None
    while g(hi) < 0:
        hi *= 2
        if hi > 1e6:
            raise RootError(f"no root of h(x1, ...) = {ell} in [0, {hi}]")
    try:
        return optimize.brentq(g, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps)
    except ValueError as exc:
        raise RootError(f"root finder failed on bracket [{lo}, {hi}]: {exc}") from None


def _upper(spec, ell, k, tail):
    """Largest x_k >= 0 with h(0, ..., 0, x_k, tail) <= ell."""
    def g(t):
        x = np.zeros(spec.n)
        x[k] = t
        x[k + 1:] = tail
        return spec.h(x) - ell
    if g(0.0) > 0:
        return None
    hi = 1.0
    while g(hi) < 0:
        hi *= 2
        if hi > 1e6:
            raise RootError(f"level set unbounded in x_{k + 1}")
    return optimize.brentq(g, 0.0, hi, xtol=1e-12)


def pseudo_convolve(fs: Sequence, spec: PseudoConvSpec, ell_grid, epsabs=1e-11, epsrel=1e-11):
    """Integral of phi * prod f_i(x_i) over {h = l} against dx/dl, for each l in the grid.

    x_1 is solved from the others with a bracketing root finder; the
    measure is dx_2...dx_n / (dh/dx_1).
    """
    if len(fs) != spec.n:
        raise ValueError(f"need {spec.n} functions, got {len(fs)}")
    ells = np.atleast_1d(np.asarray(ell_grid, dtype=float))
    out = np.empty(len(ells))

    def inner(ell, k, tail):
        # integrate over x_{k+1} (0-based k >= 1) with x_{k+2..n} = tail fixed
        if k == 0:
            x1 = _solve_x1(spec, ell, tail)
            if x1 is None:
                return 0.0
            x = np.concatenate(([x1], tail))
            d = _dh1(spec, x)
            if not d > 0:
                raise RootError(f"dh/dx1 = {d} is not positive at {x}")
            val = spec.phi(x) / d
            for fi, xi in zip(fs, x):
                val = val * fi(xi)
            return float(val)
        ub = _upper(spec, ell, k, tail)
        if ub is None or ub == 0.0:
            return 0.0
        res, _ = integrate.quad(lambda t: inner(ell, k - 1, np.concatenate(([t], tail))),
                                0.0, ub, epsabs=epsabs, epsrel=epsrel, limit=200)
        return res

    for i, ell in enumerate(ells):
        if spec.n == 1:
            out[i] = inner(ell, 0, np.zeros(0))
        else:
            out[i] = inner(ell, spec.n - 1, np.zeros(0))
    return out


def comparison_l0(spec: PseudoConvSpec, samples: int = 4096, width: float = 30.0, seed: int = 0) -> float:
    """Empirical sup of sum(x) - h(x) on [a, a + width]^n, faces included; never negative."""
    sob = qmc.Sobol(spec.n, scramble=True, seed=seed)
    m = int(math.ceil(math.log2(max(samples, 2))))
    pts = spec.a + width * sob.random_base2(m)
    faces = []
    for j in range(spec.n):
        f = pts.copy()
        f[:, j] = spec.a
        faces.append(f)
    corner = np.full((1, spec.n), spec.a)
    allp = np.vstack([pts, *faces, corner])
    defect = np.array([np.sum(x) - spec.h(x) for x in allp])
    return float(max(0.0, defect.max()))


def _mixed_partial(fun, x, alpha, step):
    """Central difference of d^alpha fun at x, alpha in {0,1}^n."""
    idx = [i for i, a in enumerate(alpha) if a]
    total = 0.0
    for signs in range(2 ** len(idx)):
        y = np.array(x, dtype=float)
        sgn = 1.0
        for b, i in enumerate(idx):
            if (signs >> b) & 1:
                y[i] -= step
                sgn = -sgn
            else:
                y[i] += step
        total += sgn * fun(y)
    return total / (2 * step) ** len(idx)


def class_E_check(phi: Callable, n: int, a: float, alphas=None, bound: float = 1e3,
                  width: float = 30.0, points: int = 9) -> dict:
    """sup e^{alpha.x} |d^alpha phi| on a grid of [a, a + width]^n, for alpha in {0,1}^n \\ {0}.

    Each derivative is taken from a ladder of steps with Richardson
    extrapolation; the step whose estimate is most stable is kept.
    """
    if alphas is None:
        alphas = [tuple((m >> i) & 1 for i in range(n)) for m in range(1, 2 ** n)]
    axis = np.linspace(a, a + width, points)
    grid = np.array(np.meshgrid(*([axis] * n), indexing="ij")).reshape(n, -1).T
    steps = [0.4 * 0.5 ** k for k in range(8)]
    sups, max_fd_err = {}, 0.0
    for alpha in alphas:
        if len(alpha) != n or not any(alpha):
            raise ValueError(f"bad multi-index {alpha}")
        best = 0.0
        for x in grid:
            ests = [_mixed_partial(phi, x, alpha, s) for s in steps]
            rich = [(4 * ests[k + 1] - ests[k]) / 3 for k in range(len(steps) - 1)]
            errs = [abs(rich[k + 1] - rich[k]) for k in range(len(rich) - 1)]
            k = int(np.argmin(errs))
            w = math.exp(float(np.dot(alpha, x)))
            best = max(best, float(w * abs(rich[k + 1])))
            max_fd_err = max(max_fd_err, float(w * errs[k]))
        sups["".join(map(str, alpha))] = best
    worst = max(sups.values())
    return {"n": n, "a": a, "width": width, "sups": sups, "fd_error": max_fd_err,
            "bound": bound, "passes": bool(worst <= bound)}


def class_calE_check(h: Callable, n: int, a: float, **kw) -> dict:
    """h is in the class calE when h - sum(x) is in E."""
    return class_E_check(lambda x: h(x) - np.sum(x), n, a, **kw)
