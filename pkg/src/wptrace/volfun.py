"""Volume functions of local types.

Realizations enumerate how a filled surface S with signature (g_S, n_S)
sits inside a closed surface of genus g: a partition of the boundary labels
of S into blocks, each block closed off by a surface of genus g_i, or by a
cylinder when (g_i, n_i) = (0, 2).  The distribution

    Phi_g^S(x) = x_1 ... x_{n_S} * sum_R prod_i V_{g_i, n_i}(x_{I_i})

weights the level sets of the length function; cylinder blocks carry
delta(x_i - x_j) / x_i and are integrated exactly, one dimension lower.
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import hypgeom
from .diagram import FillingSignature
from .pipoly import CYLINDER, PiPolynomial, VolumeTable, lookup
from .quadrature import QuadResult, integrate_1d, integrate_2d


class MissingEntries(KeyError):
    def __init__(self, missing):
        self.missing = sorted(set(missing))
        super().__init__(f"volume table lacks entries {self.missing}")


class FitError(ValueError):
    def __init__(self, msg, cond):
        super().__init__(f"{msg} (condition number {cond:.3e})")
        self.cond = cond


@dataclass(frozen=True)
class Realization:
    blocks: Tuple[Tuple[int, ...], ...]
    genera: Tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.blocks)

    def factor_strings(self) -> List[str]:
        return [f"V({gi},{len(b)})[{','.join(f'x{j}' for j in b)}]"
                for gi, b in zip(self.genera, self.blocks)]

    def __str__(self):
        return "*".join(self.factor_strings())


def _set_partitions(n: int):
    """Set partitions of {1..n}, blocks ordered by their minimum."""
    def rec(i, blocks):
        if i > n:
            yield tuple(tuple(b) for b in blocks)
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()
    yield from rec(1, [])


def _compositions(total: int, lows: Sequence[int]):
    """Tuples (a_i >= lows[i]) with sum equal to ``total``, in lexicographic order."""
    if not lows:
        if total == 0:
            yield ()
        return
    rest = sum(lows[1:])
    for a in range(lows[0], total - rest + 1):
        for tail in _compositions(total - a, lows[1:]):
            yield (a,) + tail


def euler_budget(sig: FillingSignature, g: int) -> int:
    return (2 * g - 2) - (2 * sig.g - 2 + sig.n)


def enumerate_realizations(sig: FillingSignature, g: int) -> List[Realization]:
    """All realizations of S in genus g: sum_i (2 g_i - 2 + n_i) equals the Euler budget."""
    if g < 2:
        raise ValueError("ambient genus must be at least 2")
    budget = euler_budget(sig, g)
    out = []
    if budget < 0:
        return out
    for blocks in _set_partitions(sig.n):
        # 2 sum g_i = budget - sum (n_i - 2)
        twice = budget - sum(len(b) - 2 for b in blocks)
        if twice < 0 or twice % 2:
            continue
        lows = [1 if len(b) == 1 else 0 for b in blocks]
        for genera in _compositions(twice // 2, lows):
            out.append(Realization(blocks, genera))
    return out


@dataclass(frozen=True)
class PhiTerm:
    realization: Realization
    dirac_pairs: Tuple[Tuple[int, int], ...]
    poly: PiPolynomial  # product of the non-cylinder factors, in n_S variables

    @property
    def matched(self):
        return {i for p in self.dirac_pairs for i in p}

    def prefactor_indices(self, n: int) -> List[int]:
        """Indices left in x_1...x_n after each cylinder's 1/x_i cancels x_i."""
        drop = {i for i, _ in self.dirac_pairs}
        return [j for j in range(1, n + 1) if j not in drop]


@dataclass(frozen=True)
class PhiExpression:
    n: int
    terms: Tuple[PhiTerm, ...]

    def term_multiset(self) -> Counter:
        return Counter(str(t.realization) for t in self.terms)

    def regular_poly(self) -> PiPolynomial:
        total = PiPolynomial.zero(self.n)
        for t in self.terms:
            if not t.dirac_pairs:
                total = total + t.poly
        return total

    def dirac_groups(self) -> Dict[Tuple[Tuple[int, int], ...], PiPolynomial]:
        out: Dict[Tuple[Tuple[int, int], ...], PiPolynomial] = {}
        for t in self.terms:
            if t.dirac_pairs:
                out[t.dirac_pairs] = out.get(t.dirac_pairs, PiPolynomial.zero(self.n)) + t.poly
        return out

    def evaluate_regular(self, *x):
        """The non-distributional part, prefactor included."""
        pref = 1.0
        for v in x:
            pref = pref * np.asarray(v, dtype=float)
        return pref * self.regular_poly()(*x)


def phi_S(table: VolumeTable, sig: FillingSignature, g: int) -> PhiExpression:
    reals = enumerate_realizations(sig, g)
    missing = []
    terms = []
    for R in reals:
        poly = PiPolynomial.constant(sig.n)
        pairs = []
        for gi, b in zip(R.genera, R.blocks):
            v = lookup(table, gi, len(b))
            if v is CYLINDER:
                pairs.append((b[0], b[1]))
            elif v is None:
                missing.append((gi, len(b)))
            else:
                poly = poly * v.extend(tuple(j - 1 for j in b), sig.n)
        terms.append(PhiTerm(R, tuple(pairs), poly))
    if missing:
        raise MissingEntries(missing)
    return PhiExpression(sig.n, tuple(terms))


def _need(table, keys):
    missing = [k for k in keys if lookup(table, *k) is None]
    if missing:
        raise MissingEntries(missing)


def v_simple(table: VolumeTable, g: int, ell):
    """l V_{g-1,2}(l, l) + l sum_{i=1}^{g-1} V_{i,1}(l) V_{g-i,1}(l)."""
    if g < 2:
        raise ValueError("genus must be at least 2")
    _need(table, [(g - 1, 2)] + [(i, 1) for i in range(1, g)])
    ell = np.asarray(ell, dtype=float)
    total = lookup(table, g - 1, 2)(ell, ell)
    for i in range(1, g):
        total = total + lookup(table, i, 1)(ell) * lookup(table, g - i, 1)(ell)
    out = ell * total
    return float(out) if out.ndim == 0 else out


def v_simple_from_phi(table: VolumeTable, g: int, ell):
    """Integral of Phi_g^{(0,2)} over the level set x_1 = x_2 = l against V_{0,2}.

    The cylinder measure delta(x_1 - x_2) / x_1 dx_1 dx_2 restricted to
    x_1 = l leaves Phi(l, l) / l.
    """
    phi = phi_S(table, FillingSignature(0, 2), g)
    if phi.dirac_groups():
        raise AssertionError("cylinder complement cannot contain a further cylinder for g >= 2")
    ell = np.asarray(ell, dtype=float)
    out = phi.evaluate_regular(ell, ell) / ell
    return float(out) if np.ndim(out) == 0 else out


# -- figure-eight level sets -----------------------------------------------

@dataclass(frozen=True)
class PopValue:
    value: float
    err: float
    parts: Dict[str, float]


def _acosh(c):
    return 2.0 * hypgeom.acosh1p(np.maximum(np.asarray(c, dtype=float) - 1.0, 0.0))


def _pop_primary(phi: PhiExpression, ell, tol, half):
    C = float(hypgeom.ch(ell))
    M = 0.5 * (C - 1)
    P = phi.regular_poly()

    def x3_of(x1, x2):
        return _acosh(C - 2 * hypgeom.ch(x1) * hypgeom.ch(x2))

    def f(x1, x2):
        x3 = x3_of(x1, x2)
        # x3 / sinh(x3/2) -> 2 as x3 -> 0
        ratio = np.where(x3 > 1e-300, x3 / np.sinh(np.maximum(x3, 1e-300) / 2), 2.0)
        return x1 * x2 * ratio * P(x1, x2, x3)

    X1 = float(_acosh(M))
    if half:
        Xd = float(_acosh(math.sqrt(M)))
        r = integrate_2d(f, 0.0, Xd, lambda x: (x, _acosh(M / hypgeom.ch(x))), tol, 1e-12)
        reg = QuadResult(2 * r.value, 2 * r.err, r.panels)
    else:
        reg = integrate_2d(f, 0.0, X1, lambda x: (np.zeros_like(x), _acosh(M / hypgeom.ch(x))),
                           tol, 1e-12, sqrt_end=True)
    parts = {"regular": reg.value}
    err = reg.err
    for pairs, Q in phi.dirac_groups().items():
        (a, b), = pairs
        k = ({1, 2, 3} - {a, b}).pop()
        if k == 3:
            def h(s, Q=Q):
                x3 = _acosh(C - 2 * hypgeom.ch(s) ** 2)
                ratio = np.where(x3 > 1e-300, x3 / np.sinh(np.maximum(x3, 1e-300) / 2), 2.0)
                return s * ratio * Q(s, s, x3)
            res = integrate_1d(h, 0.0, float(_acosh(math.sqrt(M))), tol, 1e-12)
        else:
            def h(s, Q=Q, k=k):
                cs = hypgeom.ch(s)
                xk = _acosh((C - cs) / (2 * cs))
                ratio = np.where(xk > 1e-300, xk / np.sinh(np.maximum(xk, 1e-300) / 2), 2.0)
                args = [s, s, s]
                args[k - 1] = xk
                return s * ratio * Q(*args) / (2 * cs)
            res = integrate_1d(h, 0.0, float(_acosh(C / 3)), tol, 1e-12)
        parts[f"dirac{a}{b}"] = res.value
        err += res.err
    return parts, err


def _pop_alternate(phi: PhiExpression, ell, tol):
    C = float(hypgeom.ch(ell))
    M = 0.5 * (C - 1)
    P = phi.regular_poly()

    def f(x2, x3):
        c2 = hypgeom.ch(x2)
        x1 = _acosh((C - hypgeom.ch(x3)) / (2 * c2))
        ratio = np.where(x1 > 1e-300, x1 / np.sinh(np.maximum(x1, 1e-300) / 2), 2.0)
        return ratio * x2 * x3 * P(x1, x2, x3) / (2 * c2)

    reg = integrate_2d(f, 0.0, float(_acosh(M)),
                       lambda x2: (np.zeros_like(x2), _acosh(C - 2 * hypgeom.ch(x2))),
                       tol, 1e-12, sqrt_end=True)
    parts = {"regular": reg.value}
    err = reg.err
    for pairs, Q in phi.dirac_groups().items():
        (a, b), = pairs
        k = ({1, 2, 3} - {a, b}).pop()
        if k == 3:
            # x1 = x2 = s solved from x3
            def h(x3, Q=Q):
                cs = np.sqrt((C - hypgeom.ch(x3)) / 2)
                s = _acosh(cs)
                ratio = np.where(s > 1e-300, s / np.sinh(np.maximum(s, 1e-300) / 2), 2.0)
                return ratio * x3 * Q(s, s, x3) / (4 * cs)
            res = integrate_1d(h, 0.0, float(_acosh(C - 2)), tol, 1e-12)
        elif k == 2:
            # x1 = x3 = s solved from x2
            def h(x2, Q=Q):
                d = 2 * hypgeom.ch(x2) + 1
                s = _acosh(C / d)
                ratio = np.where(s > 1e-300, s / np.sinh(np.maximum(s, 1e-300) / 2), 2.0)
                return ratio * x2 * Q(s, x2, s) / d
            res = integrate_1d(h, 0.0, float(_acosh(M)), tol, 1e-12)
        else:
            # x2 = x3 = s, x1 solved from s
            def h(s, Q=Q):
                cs = hypgeom.ch(s)
                x1 = _acosh((C - cs) / (2 * cs))
                ratio = np.where(x1 > 1e-300, x1 / np.sinh(np.maximum(x1, 1e-300) / 2), 2.0)
                return s * ratio * Q(x1, s, s) / (2 * cs)
            res = integrate_1d(h, 0.0, float(_acosh(C / 3)), tol, 1e-12)
        parts[f"dirac{a}{b}"] = res.value
        err += res.err
    return parts, err


def v_pop_type(table: VolumeTable, g: int, ell: float, which: str = "figure_eight",
               n_T: int = 1, tol: float = 1e-8, form: str = "primary", half: bool = False) -> PopValue:
    """Volume function of the figure-eight local type in genus g.

    sinh(l/2)/n_T times the integral of Phi_g^P(x) / sinh(x_3/2) over
    cosh(x_1/2) cosh(x_2/2) <= M(l), with cylinder terms on their own level sets.
    ``form='alternate'`` integrates over (x_2, x_3) instead.
    """
    if which not in ("figure_eight", "figure-eight"):
        raise ValueError(f"unsupported local type {which!r}")
    if n_T < 1:
        raise ValueError("n_T must be a positive integer")
    if float(hypgeom.eight_bound(ell)) <= 1.0:
        raise hypgeom.DomainError("empty domain: M(l) <= 1", float(hypgeom.eight_bound(ell)) - 1.0)
    phi = phi_S(table, FillingSignature(0, 3), g)
    if form == "primary":
        parts, err = _pop_primary(phi, ell, tol, half)
    elif form == "alternate":
        if half:
            raise ValueError("half-domain integration is only offered for the primary form")
        parts, err = _pop_alternate(phi, ell, tol)
    else:
        raise ValueError(f"unknown form {form!r}")
    scale = float(np.sinh(ell / 2)) / n_T
    parts = {k: scale * v for k, v in parts.items()}
    return PopValue(sum(parts.values()), scale * err, parts)


# -- 1/g expansions -----------------------------------------------------------

@dataclass(frozen=True)
class ExpansionFit:
    k_min: int
    K: int
    coefficients: Dict[int, np.ndarray]
    residual: np.ndarray
    cond: float

    def to_json_dict(self):
        return {"k_min": self.k_min, "K": self.K, "cond": self.cond,
                "coefficients": {str(k): v.tolist() for k, v in self.coefficients.items()},
                "residual": self.residual.tolist()}


def expansion_fit(samples: Dict[int, Sequence[float]], K: int, k_min: int = 0,
                  max_cond: float = 1e12) -> ExpansionFit:
    """Least-squares fit of sum_{k=k_min}^K f_k / g^k, independently per grid point."""
    gs = sorted(samples)
    need = K - k_min + 2
    if len(gs) < need:
        raise ValueError(f"need at least {need} genera, got {len(gs)}")
    Y = np.array([np.atleast_1d(np.asarray(samples[g], dtype=float)) for g in gs])
    ks = np.arange(k_min, K + 1)
    A = np.array([[float(g) ** (-k) for k in ks] for g in gs])
    # column scaling keeps the condition number meaningful
    scale = np.linalg.norm(A, axis=0)
    cond = float(np.linalg.cond(A / scale))
    if not np.isfinite(cond) or cond > max_cond:
        raise FitError("ill-conditioned Vandermonde system", cond)
    coef, *_ = np.linalg.lstsq(A / scale, Y, rcond=None)
    coef = coef / scale[:, None]
    resid = np.sqrt(np.mean((A @ coef - Y) ** 2, axis=0))
    return ExpansionFit(k_min, K, {int(k): coef[i] for i, k in enumerate(ks)}, resid, cond)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ell", "value", "err_estimate", "g", "type"])
    for r in rows:
        w.writerow([repr(float(r[0])), repr(float(r[1])), repr(float(r[2])), int(r[3]), r[4]])
    return buf.getvalue()
