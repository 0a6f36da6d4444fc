"""Hyperbolic trigonometry and the PSL(2, R) moves a^t, w^t, k^theta.

Every hyperbolic function here takes the *full* length and halves it
internally through :func:`half`, so ``ch(x)`` means cosh(x/2).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

PARABOLIC_TOL = 1e-12


class NonHyperbolicError(ValueError):
    """Raised for elliptic or parabolic elements (|Tr| <= 2)."""


class DomainError(ValueError):
    """Input outside the domain of an inverse; ``margin`` is the signed violation."""

    def __init__(self, msg, margin):
        super().__init__(f"{msg} (margin {margin:.3e})")
        self.margin = margin


def half(x):
    return 0.5 * x


def ch(x):
    return np.cosh(half(x))


def sh(x):
    return np.sinh(half(x))


def acosh1p(u):
    """arccosh(1 + u) without cancellation for small u >= 0."""
    u = np.asarray(u, dtype=float)
    out = np.log1p(u + np.sqrt(u * (u + 2.0)))
    return float(out) if out.ndim == 0 else out


class MoveKind(enum.Enum):
    GEODESIC = "a"
    PERPENDICULAR = "w"
    ROTATION = "k"

    @classmethod
    def parse(cls, tag):
        if isinstance(tag, cls):
            return tag
        for kind in cls:
            if tag in (kind.value, kind.name, kind.name.lower()):
                return kind
        raise ValueError(f"unknown move {tag!r}; expected one of a, w, k")


@dataclass(frozen=True)
class Mat2:
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def trace(self) -> float:
        return self.a + self.d

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])


def move_matrix(kind, t: float) -> Mat2:
    """a^t = diag(e^{t/2}, e^{-t/2}); w^t = [[ch, sh], [sh, ch]](t/2);
    k^t = [[cos, sin], [-sin, cos]](t/2)."""
    kind = MoveKind.parse(kind)
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"move parameter must be finite, got {t}")
    h = half(t)
    if kind is MoveKind.GEODESIC:
        return Mat2(math.exp(h), 0.0, 0.0, math.exp(-h))
    if kind is MoveKind.PERPENDICULAR:
        return Mat2(math.cosh(h), math.sinh(h), math.sinh(h), math.cosh(h))
    return Mat2(math.cos(h), math.sin(h), -math.sin(h), math.cos(h))


def product(moves) -> Mat2:
    """Left-to-right product of ``(kind, t)`` pairs."""
    m = Mat2.identity()
    for kind, t in moves:
        m = m @ move_matrix(kind, t)
    return m


def trace_to_cosh_half_length(m: Mat2) -> float:
    """cosh(l/2) = |Tr M| / 2 for a hyperbolic element."""
    tr = abs(m.trace())
    if tr <= 2.0 + PARABOLIC_TOL:
        kind = "parabolic" if tr >= 2.0 - PARABOLIC_TOL else "elliptic"
        raise NonHyperbolicError(f"{kind} element: |Tr| = {tr!r}")
    return 0.5 * tr


def length_from_trace(m: Mat2) -> float:
    return 2.0 * math.acosh(trace_to_cosh_half_length(m))


def _positive(*xs):
    for x in xs:
        if not np.all(np.asarray(x) > 0):
            raise ValueError("lengths must be positive")


def hexagon_cosh(x1, x2, x3):
    """cosh L for the orthogeodesic between boundaries 1 and 2 of a pair of pants."""
    _positive(x1, x2, x3)
    return (ch(x1) * ch(x2) + ch(x3)) / (sh(x1) * sh(x2))


def hexagon_ortho_length(x1, x2, x3):
    """Orthogeodesic length L >= 0 from the right-angled hexagon relation."""
    _positive(x1, x2, x3)
    # cosh L - 1 = (cosh((x1-x2)/2) + cosh(x3/2)) / (sinh(x1/2) sinh(x2/2))
    u = (np.cosh(half(np.asarray(x1) - np.asarray(x2))) + ch(x3)) / (sh(x1) * sh(x2))
    return acosh1p(u)


def hexagon_x3(x1, x2, L):
    """Inverse of the hexagon relation in x3."""
    _positive(x1, x2)
    c3 = np.cosh(L) * sh(x1) * sh(x2) - ch(x1) * ch(x2)
    if np.any(c3 < 1.0 - 1e-12):
        raise DomainError("no pair of pants with these (x1, x2, L)", float(np.min(c3) - 1.0))
    out = 2.0 * acosh1p(np.maximum(c3 - 1.0, 0.0))
    return float(out) if np.ndim(out) == 0 else out


def eight_cosh_half(x1, x2, x3):
    """cosh(l/2) = 2 cosh(x1/2) cosh(x2/2) + cosh(x3/2)."""
    return 2.0 * ch(x1) * ch(x2) + ch(x3)


def eight_length(x1, x2, x3):
    """Length of the figure-eight filling a pair of pants with boundary (x1, x2, x3)."""
    _positive(x1, x2, x3)
    out = 2.0 * np.arccosh(eight_cosh_half(x1, x2, x3))
    return float(out) if np.ndim(out) == 0 else out


def eight_bound(ell):
    """M(l) = (cosh(l/2) - 1) / 2."""
    return 0.5 * (ch(ell) - 1.0)


def x3_of(ell, x1, x2):
    """Exact inverse of :func:`eight_length` in x3."""
    # cosh(x3/2) - 1 = 2 (M - c1 c2)
    u = 2.0 * (eight_bound(ell) - ch(x1) * ch(x2))
    if np.any(u < -1e-12 * np.maximum(1.0, np.abs(eight_bound(ell)))):
        raise DomainError("cosh(x1/2) cosh(x2/2) exceeds M(l)", float(np.min(u)) / 2.0)
    out = 2.0 * acosh1p(np.maximum(u, 0.0))
    return float(out) if np.ndim(out) == 0 else out
