"""Length of a generalized eight in (L, theta) coordinates.

Two evaluators of cosh(l/2) for the loop through a starting label: the
signed expansion over sign patterns, and half the trace of the product of
a^{eps_k L_k} w^{theta_k}.  They agree identically; the expansion is the
formula under test, the trace is the oracle.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from . import hypgeom, kernels
from .diagram import Diagram, Label, all_labels, filling_signature, relabel, theta_support

MAX_EXPANSION_R = 8
LOG_SWITCH = 600.0


@dataclass(frozen=True)
class CoordPoint:
    """Bar lengths ``L`` (indexed by bar, 1-based) and theta per label."""

    L: Tuple[float, ...]
    theta: Dict[Label, float]

    def __post_init__(self):
        if any(not (x > 0 and math.isfinite(x)) for x in self.L):
            raise ValueError("bar lengths must be positive and finite")
        if any(not math.isfinite(t) for t in self.theta.values()):
            raise ValueError("theta entries must be finite")

    @classmethod
    def from_arrays(cls, L: Sequence[float], theta: Sequence[float]) -> "CoordPoint":
        """``theta`` in canonical label order (1,+), (1,-), (2,+), ..."""
        r = len(L)
        if len(theta) != 2 * r:
            raise ValueError(f"need {2 * r} theta values, got {len(theta)}")
        return cls(tuple(float(x) for x in L),
                   {q: float(t) for q, t in zip(all_labels(r), theta)})


@dataclass(frozen=True)
class DensityValue:
    rhs_density: float
    lhs_factor: float


def random_points(d: Diagram, n: int, rng, L_range=(0.0, 5.0), theta_range=(-5.0, 5.0)):
    """Random CoordPoints with L uniform in (lo, hi] and theta uniform in the range."""
    lo, hi = L_range
    Ls = hi - (hi - lo) * rng.random((n, d.r))
    ths = rng.uniform(*theta_range, size=(n, 2 * d.r))
    return [CoordPoint.from_arrays(a, b) for a, b in zip(Ls, ths)]


def y_lengths(d: Diagram, p: CoordPoint) -> Dict[str, float]:
    """y_lambda = sum of theta over endpoint labels on lambda."""
    return {cid: float(sum(p.theta[q] for q in theta_support(d, cid))) for cid in d.component_ids}


def sequence(d: Diagram, p: CoordPoint, q0: Label = (1, 1)):
    """(theta_k, eps_k L_k) along the loop through q0."""
    seq = relabel(d, q0)
    theta = np.array([p.theta[q] for q in seq])
    s = np.array([eps * p.L[j - 1] for j, eps in seq])
    return theta, s


def _scale(theta, s):
    return float(np.sum(np.abs(theta)) + np.sum(np.abs(s)))


def _check_r(theta):
    if len(theta) > 2 * MAX_EXPANSION_R:
        raise ValueError(f"expansion refused for loops with more than {2 * MAX_EXPANSION_R} "
                         f"bar crossings (2^(m-1) terms); use the trace evaluator")


def log_expansion(theta, s) -> Tuple[float, int]:
    """(log|value|, sign) of the expansion, using a signed log-sum-exp."""
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    _check_r(theta)
    delta, rho = kernels.sign_patterns(len(theta))
    a = np.abs(theta) / 2
    # log cosh(a), log |sinh(a)|
    lc = a + np.log1p(np.exp(-2 * a)) - math.log(2)
    with np.errstate(divide="ignore"):
        ls = a + np.log1p(-np.exp(-2 * a)) - math.log(2)
    sgn_sh = np.sign(theta)
    plus = delta == 1
    logs = np.where(plus, lc, ls).sum(axis=1)
    sign = np.where(plus, 1.0, sgn_sh).prod(axis=1)
    arg = np.abs(0.5 * (rho * s).sum(axis=1))
    logs = logs + arg + np.log1p(np.exp(-2 * arg)) - math.log(2)
    keep = sign != 0
    logs, sign = logs[keep], sign[keep]
    if len(logs) == 0:
        return -math.inf, 0
    top = logs.max()
    total = float(np.sum(sign * np.exp(logs - top)))
    if total == 0:
        return -math.inf, 0
    return top + math.log(abs(total)), int(np.sign(total))


def log_trace_half(theta, s) -> Tuple[float, int]:
    """(log|value|, sign) of (1/2) Tr, renormalizing the running product."""
    m = np.eye(2)
    logscale = 0.0
    for t, x in zip(theta, s):
        h = x / 2
        # a^x = e^{|h|} diag(e^{h-|h|}, e^{-h-|h|})
        m = m @ np.diag([math.exp(h - abs(h)), math.exp(-h - abs(h))])
        logscale += abs(h)
        c = abs(t) / 2
        sg = math.copysign(1.0, t)
        # w^t = e^{c}/2 [[1+e^{-2c}, sg(1-e^{-2c})], ...]
        e2 = math.exp(-2 * c)
        m = m @ np.array([[1 + e2, sg * (1 - e2)], [sg * (1 - e2), 1 + e2]]) / 2
        logscale += c
        norm = np.abs(m).max()
        m /= norm
        logscale += math.log(norm)
    tr = 0.5 * (m[0, 0] + m[1, 1])
    if tr == 0:
        return -math.inf, 0
    return logscale + math.log(abs(tr)), int(np.sign(tr))


def _from_log(lv, sign):
    if sign == 0:
        return 0.0
    return sign * math.exp(lv) if lv < 709.7 else sign * math.inf


def cosh_half_expansion(d: Diagram, p: CoordPoint, q0: Label = (1, 1)) -> float:
    theta, s = sequence(d, p, q0)
    _check_r(theta)
    if _scale(theta, s) > LOG_SWITCH:
        return _from_log(*log_expansion(theta, s))
    return float(kernels.expansion(theta[None], s[None])[0])


def cosh_half_trace(d: Diagram, p: CoordPoint, q0: Label = (1, 1)) -> float:
    """Signed (1/2) Tr of the move product; equals cosh(l/2) for a hyperbolic loop."""
    theta, s = sequence(d, p, q0)
    if _scale(theta, s) > LOG_SWITCH:
        return _from_log(*log_trace_half(theta, s))
    return float(kernels.trace_half(theta[None], s[None])[0])


def batch_arrays(d: Diagram, points, q0: Label = (1, 1)):
    pairs = [sequence(d, p, q0) for p in points]
    return np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])


def geodesic_length(d: Diagram, p: CoordPoint, q0: Label = (1, 1)) -> float:
    v = abs(cosh_half_trace(d, p, q0))
    if v <= 1.0:
        raise hypgeom.NonHyperbolicError(f"|Tr|/2 = {v} <= 1")
    return 2.0 * math.acosh(v)


def oracle_report(d: Diagram, samples: int, seed: int, q0: Label = (1, 1)) -> dict:
    """Compare expansion and trace on random points; JSON-ready record."""
    rng = np.random.default_rng(seed)
    pts = random_points(d, samples, rng)
    theta, s = batch_arrays(d, pts, q0)
    _check_r(theta[0])
    ex = kernels.expansion(theta, s)
    tr = kernels.trace_half(theta, s)
    err = np.abs(ex - tr) / np.abs(tr)
    return {"diagram_id": d.name, "samples": samples, "max_rel_err": float(err.max()), "seed": seed}


def report_json(record: dict) -> str:
    return json.dumps(record, sort_keys=True)


# -- figure-eight chart -----------------------------------------------------

def figure_eight_point(x1, x2, x3) -> CoordPoint:
    """Coordinates of the figure-eight in the pants with boundary (x1, x2, x3)."""
    L = hypgeom.hexagon_ortho_length(x1, x2, x3)
    return CoordPoint((float(L),), {(1, 1): float(x2), (1, -1): float(x1)})


def wp_density(d: Diagram, p: CoordPoint, x: Sequence[float]) -> DensityValue:
    """Both sides of the density identity: 2^{#beta} prod sinh^2(y/2) prod sinh(L)
    and 2^{n_S} prod sinh(x_j/2)."""
    ys = y_lengths(d, p)
    bad = {k: v for k, v in ys.items() if not v > 0}
    if bad:
        raise hypgeom.DomainError(f"non-positive boundary lengths {bad}: outside the geodesic chart",
                                  min(bad.values()))
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("boundary lengths must be positive")
    sig = filling_signature(d)
    if len(x) != sig.n:
        raise ValueError(f"expected {sig.n} boundary lengths, got {len(x)}")
    rhs = 2.0 ** len(ys) * np.prod([math.sinh(y / 2) ** 2 for y in ys.values()]) \
        * np.prod([math.sinh(L) for L in p.L])
    lhs = 2.0 ** sig.n * float(np.prod(np.sinh(x / 2)))
    return DensityValue(float(rhs), lhs)


def _chart_inverse(v):
    """(L, theta+, theta-) -> (x1, x2, x3) on the figure-eight chart."""
    L, tp, tm = v
    return np.array([tm, tp, hypgeom.hexagon_x3(tm, tp, L)])


def fd_jacobian(fun, v, step):
    """Five-point central differences, column by column."""
    v = np.asarray(v, dtype=float)
    cols = []
    for i in range(len(v)):
        e = np.zeros_like(v)
        e[i] = step
        cols.append((fun(v - 2 * e) - 8 * fun(v - e) + 8 * fun(v + e) - fun(v + 2 * e)) / (12 * step))
    return np.array(cols).T


def density_ratio_r1(d: Diagram, x, step=3e-3) -> float:
    """lhs_factor * |det d(x)/d(L, theta)| / rhs_density at the pants x."""
    p = figure_eight_point(*x)
    dv = wp_density(d, p, x)
    L, tp, tm = p.L[0], p.theta[(1, 1)], p.theta[(1, -1)]
    v = np.array([L, tp, tm])
    # keep cosh(x3/2) away from 1 under the stencil's perturbations
    s1, s2, c1, c2 = math.sinh(tm / 2), math.sinh(tp / 2), math.cosh(tm / 2), math.cosh(tp / 2)
    grad = math.sinh(L) * s1 * s2 + 0.5 * (abs(math.cosh(L) * c1 * s2 - s1 * c2)
                                           + abs(math.cosh(L) * s1 * c2 - c1 * s2))
    h = step * min(1.0, (math.cosh(x[2] / 2) - 1) / grad)
    jac = abs(np.linalg.det(fd_jacobian(_chart_inverse, v, h)))
    return dv.lhs_factor * jac / dv.rhs_density


def density_check_r1(d: Diagram, samples: int, seed: int, lo=0.5, hi=6.0) -> dict:
    """Measure the density ratio on random pants; report its spread and nearest power of two."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(lo, hi, size=(samples, 3))
    ratios = np.array([density_ratio_r1(d, x) for x in xs])
    c = float(np.median(ratios))
    spread = float((ratios.max() - ratios.min()) / abs(c))
    k = round(math.log2(c))
    return {"diagram_id": d.name, "samples": samples, "seed": seed, "constant": c,
            "rel_spread": spread, "power_of_two": int(k),
            "power_of_two_rel_err": abs(c - 2.0 ** k) / 2.0 ** k}


def jacobian_fd_check_r1(x1, x2, x3, step=1e-4) -> dict:
    """Central difference of x3 -> L against 2 sinh(L) sinh(x1/2) sinh(x2/2) / sinh(x3/2)."""
    for v in (x1, x2, x3):
        if not v > 0:
            raise ValueError("lengths must be positive")
    if x3 - step <= 0:
        raise ValueError(f"step {step} too large for x3 = {x3}")
    Lp = hypgeom.hexagon_ortho_length(x1, x2, x3 + step)
    Lm = hypgeom.hexagon_ortho_length(x1, x2, x3 - step)
    dLdx3 = (Lp - Lm) / (2 * step)
    if dLdx3 == 0 or not math.isfinite(dLdx3):
        raise ValueError("finite difference underflow near a degenerate hexagon")
    L = hypgeom.hexagon_ortho_length(x1, x2, x3)
    analytic = 2 * math.sinh(L) * math.sinh(x1 / 2) * math.sinh(x2 / 2) / math.sinh(x3 / 2)
    fd = 1.0 / dLdx3
    return {"x": [x1, x2, x3], "L": L, "fd": fd, "analytic": analytic,
            "rel_err": abs(fd - analytic) / abs(analytic), "step": step}
