"""Exact polynomials with coefficients in Q[pi], and Weil-Petersson volume tables.

A volume polynomial V_{g,n}(x_1, ..., x_n) has coefficients of the form
(num/den) * pi**m.  Terms are keyed by (alpha, m) so that sums of polynomials
with different pi-gradings stay representable; a polynomial coming from a
volume table has a single pi power per monomial.

Volume tables are read from a JSON document::

    [{"g": 1, "n": 1, "source": "...",
      "terms": [{"alpha": [2], "pi_power": 0, "num": 1, "den": 48},
                {"alpha": [0], "pi_power": 2, "num": 1, "den": 12}]}]
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

import mpmath
import numpy as np

# 40 significant digits; coefficients are rounded to double only once.
_MP_DPS = 40

Alpha = Tuple[int, ...]
TermKey = Tuple[Alpha, int]


class TableError(ValueError):
    """Raised when a volume table document or entry is invalid."""


class PiGradingWarning(UserWarning):
    """A monomial's pi power differs from 2(3g-3+n) - degree."""


@dataclass(frozen=True)
class PiRational:
    """The number (numerator/denominator) * pi**pi_power, kept in lowest terms."""

    numerator: int
    denominator: int = 1
    pi_power: int = 0

    def __post_init__(self):
        num, den, m = int(self.numerator), int(self.denominator), int(self.pi_power)
        if den == 0:
            raise ZeroDivisionError("denominator is zero")
        if m < 0:
            raise ValueError("pi_power must be non-negative")
        if den < 0:
            num, den = -num, -den
        g = gcd(abs(num), den)
        num, den = num // g, den // g
        if num == 0:
            den, m = 1, 0
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "pi_power", m)

    @classmethod
    def from_fraction(cls, q: Fraction, pi_power: int = 0) -> "PiRational":
        return cls(q.numerator, q.denominator, pi_power)

    @property
    def rational(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __mul__(self, other: "PiRational") -> "PiRational":
        return PiRational(
            self.numerator * other.numerator,
            self.denominator * other.denominator,
            self.pi_power + other.pi_power,
        )

    def __float__(self) -> float:
        with mpmath.workdps(_MP_DPS):
            v = mpmath.mpf(self.numerator) / self.denominator * mpmath.pi ** self.pi_power
            return float(v)

    def __str__(self):
        q = str(self.rational)
        if self.pi_power == 0:
            return q
        return f"{q}*pi^{self.pi_power}"


class PiPolynomial:
    """Polynomial in ``num_vars`` real variables with Q[pi] coefficients.

    Immutable.  ``terms`` maps ``(alpha, pi_power)`` to a non-zero Fraction.
    Calling the polynomial evaluates it in floating point; numpy arrays
    broadcast.
    """

    __slots__ = ("_num_vars", "_terms", "_float_cache", "_hash")

    def __init__(self, num_vars: int, terms: Optional[Mapping[TermKey, Fraction]] = None):
        if num_vars < 1:
            raise ValueError("num_vars must be positive")
        clean: Dict[TermKey, Fraction] = {}
        for (alpha, m), c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != num_vars:
                raise ValueError(
                    f"multi-index {alpha} has length {len(alpha)}, expected {num_vars}")
            if any(a < 0 for a in alpha) or m < 0:
                raise ValueError(f"negative exponent in term {alpha}, pi^{m}")
            c = Fraction(c)
            if c == 0:
                continue
            key = (alpha, int(m))
            clean[key] = clean.get(key, Fraction(0)) + c
            if clean[key] == 0:
                del clean[key]
        self._num_vars = num_vars
        self._terms = clean
        self._float_cache = None
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, num_vars: int, value: Union[int, Fraction, PiRational] = 1) -> "PiPolynomial":
        if isinstance(value, PiRational):
            return cls(num_vars, {((0,) * num_vars, value.pi_power): value.rational})
        return cls(num_vars, {((0,) * num_vars, 0): Fraction(value)})

    @classmethod
    def zero(cls, num_vars: int) -> "PiPolynomial":
        return cls(num_vars)

    @classmethod
    def monomial(cls, alpha: Iterable[int], coeff: Union[int, Fraction] = 1, pi_power: int = 0) -> "PiPolynomial":
        alpha = tuple(alpha)
        return cls(len(alpha), {(alpha, pi_power): Fraction(coeff)})

    # -- accessors ----------------------------------------------------------
    @property
    def num_vars(self) -> int:
        return self._num_vars

    @property
    def terms(self) -> Dict[TermKey, Fraction]:
        return dict(self._terms)

    def coefficients(self) -> Iterator[Tuple[Alpha, PiRational]]:
        """Yield ``(alpha, PiRational)`` pairs in canonical order."""
        for (alpha, m) in sorted(self._terms):
            yield alpha, PiRational.from_fraction(self._terms[(alpha, m)], m)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(alpha) for alpha, _ in self._terms)

    def __len__(self):
        return len(self._terms)

    # -- arithmetic ---------------------------------------------------------
    def _check_compatible(self, other: "PiPolynomial"):
        if not isinstance(other, PiPolynomial):
            return NotImplemented
        if other.num_vars != self.num_vars:
            raise ValueError(
                f"variable-count mismatch: {self.num_vars} vs {other.num_vars}")
        return None

    def __add__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return PiPolynomial(self.num_vars, out)

    def __neg__(self):
        return PiPolynomial(self.num_vars, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PiPolynomial(self.num_vars, {k: c * other for k, c in self._terms.items()})
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        out: Dict[TermKey, Fraction] = {}
        for (a1, m1), c1 in self._terms.items():
            for (a2, m2), c2 in other._terms.items():
                key = (tuple(i + j for i, j in zip(a1, a2)), m1 + m2)
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return PiPolynomial(self.num_vars, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PiPolynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, frozenset(self._terms.items())))
        return self._hash

    def extend(self, positions: Tuple[int, ...], num_vars: int) -> "PiPolynomial":
        """Re-embed into ``num_vars`` variables; variable i goes to ``positions[i]``."""
        if len(positions) != self.num_vars:
            raise ValueError("positions must have one entry per variable")
        out = {}
        for (alpha, m), c in self._terms.items():
            new = [0] * num_vars
            for i, a in zip(positions, alpha):
                new[i] = a
            out[(tuple(new), m)] = c
        return PiPolynomial(num_vars, out)

    # -- evaluation ---------------------------------------------------------
    def _float_terms(self):
        if self._float_cache is None:
            acc: Dict[Alpha, mpmath.mpf] = {}
            with mpmath.workdps(_MP_DPS):
                for (alpha, m), c in self._terms.items():
                    v = mpmath.mpf(c.numerator) / c.denominator * mpmath.pi ** m
                    acc[alpha] = acc.get(alpha, mpmath.mpf(0)) + v
                items = sorted(acc.items())
                alphas = np.array([a for a, _ in items], dtype=int).reshape(len(items), self.num_vars)
                coeffs = np.array([float(v) for _, v in items], dtype=float)
            self._float_cache = (alphas, coeffs)
        return self._float_cache

    def __call__(self, *x):
        if len(x) == 1 and self.num_vars != 1 and np.ndim(x[0]) == 1 and len(x[0]) == self.num_vars:
            x = tuple(x[0])
        if len(x) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} arguments, got {len(x)}")
        alphas, coeffs = self._float_terms()
        xs = [np.asarray(v, dtype=float) for v in x]
        shape = np.broadcast(*xs).shape if xs else ()
        total = np.zeros(shape)
        for alpha, c in zip(alphas, coeffs):
            term = np.full(shape, c)
            for xi, a in zip(xs, alpha):
                if a:
                    term = term * xi ** a
            total = total + term
        if total.ndim == 0:
            return float(total)
        return total

    def __repr__(self):
        if not self._terms:
            return f"PiPolynomial({self.num_vars}, 0)"
        parts = []
        for alpha, coeff in self.coefficients():
            mono = "*".join(f"x{i + 1}^{a}" for i, a in enumerate(alpha) if a)
            parts.append(f"({coeff})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def combine(p: PiPolynomial, q: PiPolynomial, op: str) -> PiPolynomial:
    """Exact ``p + q`` (``op='add'``) or ``p * q`` (``op='mul'``)."""
    if p.num_vars != q.num_vars:
        raise ValueError(f"variable-count mismatch: {p.num_vars} vs {q.num_vars}")
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op!r}; expected 'add' or 'mul'")


def evaluate(p: PiPolynomial, x) -> float:
    """Evaluate ``p`` at the point ``x`` (a sequence of length ``p.num_vars``)."""
    x = tuple(x)
    if len(x) != p.num_vars:
        raise ValueError(f"dimension mismatch: point has {len(x)} coordinates, "
                         f"polynomial has {p.num_vars} variables")
    return float(p(*x))


# ---------------------------------------------------------------------------
# volume tables
# ---------------------------------------------------------------------------

class _Cylinder:
    """V_{0,2}(x, y) = delta(x - y) / x; never a polynomial."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "CYLINDER"


CYLINDER = _Cylinder()


def is_stable(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


def check_signature(g: int, n: int):
    if g < 0 or n < 0:
        raise ValueError(f"negative signature ({g}, {n})")
    if not is_stable(g, n) and (g, n) != (0, 2):
        raise ValueError(f"unstable signature ({g}, {n})")


def validate_entry(g: int, n: int, poly: PiPolynomial, lint: bool = True):
    """Structural checks for V_{g,n}.  Raises TableError naming the entry."""
    where = f"entry (g={g}, n={n})"
    if (g, n) == (0, 2):
        raise TableError(f"{where}: the cylinder (0,2) is a sentinel and cannot be stored")
    if n < 1 or not is_stable(g, n):
        raise TableError(f"{where}: unstable signature")
    if poly.num_vars != n:
        raise TableError(f"{where}: polynomial has {poly.num_vars} variables, expected {n}")
    bound = 2 * (3 * g - 3 + n)
    for (alpha, m) in poly.terms:
        if any(a % 2 for a in alpha):
            raise TableError(f"{where}: odd exponent in monomial {list(alpha)}")
        if sum(alpha) > bound:
            raise TableError(f"{where}: degree overflow, monomial {list(alpha)} "
                             f"has degree {sum(alpha)} > {bound}")
        if lint and m != bound - sum(alpha):
            warnings.warn(f"{where}: monomial {list(alpha)} carries pi^{m}, "
                          f"grading suggests pi^{bound - sum(alpha)}", PiGradingWarning)


@dataclass
class VolumeTable:
    entries: Dict[Tuple[int, int], PiPolynomial] = field(default_factory=dict)
    provenance: Dict[Tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        for (g, n), poly in self.entries.items():
            validate_entry(g, n, poly)

    def add(self, g: int, n: int, poly: PiPolynomial, source: str = ""):
        if (g, n) in self.entries:
            raise TableError(f"duplicate entry (g={g}, n={n})")
        validate_entry(g, n, poly)
        self.entries[(g, n)] = poly
        self.provenance[(g, n)] = source

    def __contains__(self, key):
        return key in self.entries

    def __eq__(self, other):
        if not isinstance(other, VolumeTable):
            return NotImplemented
        return self.entries == other.entries and self.provenance == other.provenance


def lookup(table: VolumeTable, g: int, n: int):
    """V_{g,n} from ``table``; CYLINDER for (0,2); None when absent."""
    check_signature(g, n)
    if (g, n) == (0, 2):
        return CYLINDER
    return table.entries.get((g, n))


def _as_int(value, what, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise TableError(f"{where}: field {what!r} must be an integer, got {value!r}")
    return value


def load_table(text: str) -> VolumeTable:
    """Parse and validate a volume-table JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TableError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, list):
        raise TableError("top level must be a list of entries")
    table = VolumeTable()
    for idx, entry in enumerate(doc):
        where = f"entry #{idx}"
        if not isinstance(entry, dict):
            raise TableError(f"{where}: expected an object")
        for key in ("g", "n", "terms"):
            if key not in entry:
                raise TableError(f"{where}: missing field {key!r}")
        g = _as_int(entry["g"], "g", where)
        n = _as_int(entry["n"], "n", where)
        where = f"entry (g={g}, n={n})"
        if (g, n) in table.entries:
            raise TableError(f"duplicate entry (g={g}, n={n})")
        terms = {}
        for t in entry["terms"]:
            alpha = t.get("alpha")
            if not isinstance(alpha, list):
                raise TableError(f"{where}: term without an 'alpha' list")
            alpha = tuple(_as_int(a, "alpha", where) for a in alpha)
            if len(alpha) != n:
                raise TableError(f"{where}: multi-index {list(alpha)} has length {len(alpha)}, expected {n}")
            m = _as_int(t.get("pi_power", 0), "pi_power", where)
            num = _as_int(t.get("num"), "num", where)
            den = _as_int(t.get("den", 1), "den", where)
            if den <= 0:
                raise TableError(f"{where}: non-positive denominator {den}")
            if (alpha, m) in terms:
                raise TableError(f"{where}: repeated term {list(alpha)}, pi^{m}")
            terms[(alpha, m)] = Fraction(num, den)
        try:
            poly = PiPolynomial(n, terms)
        except ValueError as exc:
            raise TableError(f"{where}: {exc}") from None
        table.add(g, n, poly, str(entry.get("source", "")))
    return table


def dump_table(table: VolumeTable) -> str:
    """Canonical JSON: entries sorted by (g, n), terms by (alpha, pi_power)."""
    out = []
    for (g, n) in sorted(table.entries):
        poly = table.entries[(g, n)]
        terms = []
        for (alpha, m) in sorted(poly.terms):
            c = poly.terms[(alpha, m)]
            terms.append({"alpha": list(alpha), "pi_power": m,
                          "num": c.numerator, "den": c.denominator})
        out.append({"g": g, "n": n, "terms": terms,
                    "source": table.provenance.get((g, n), "")})
    return json.dumps(out, indent=1) + "\n"


def read_table(path) -> VolumeTable:
    with open(path, encoding="utf-8") as fh:
        return load_table(fh.read())


def bundled_table() -> VolumeTable:
    """The small volume table shipped with the package."""
    from importlib import resources

    text = resources.files("wptrace.data").joinpath("volumes.json").read_text(encoding="utf-8")
    return load_table(text)


def total_volume(table: VolumeTable, g: int) -> PiRational:
    """V_g from V_{g,1} through the dilaton relation.

    ``dV_{g,1}/dL (2 pi i) = 2 pi i (2g - 2) V_g``; each coefficient
    c * pi^m * L^{2k} contributes c * 2k * (2 pi)^{2k-2} * (-1)^{k-1} * pi^m / (2g-2).
    """
    if g < 2:
        raise ValueError("total volume needs g >= 2")
    poly = lookup(table, g, 1)
    if poly is None:
        raise KeyError(f"table has no entry (g={g}, n=1)")
    acc: Dict[int, Fraction] = {}
    for (alpha, m), c in poly.terms.items():
        k = alpha[0] // 2
        if k == 0:
            continue
        val = c * 2 * k * Fraction(2) ** (2 * k - 2) * (-1) ** (k - 1) / (2 * g - 2)
        power = m + 2 * k - 2
        acc[power] = acc.get(power, Fraction(0)) + val
    acc = {m: v for m, v in acc.items() if v != 0}
    if len(acc) != 1:
        raise ValueError(f"V_{g} is not a single rational multiple of a pi power: {acc}")
    (m, v), = acc.items()
    return PiRational.from_fraction(v, m)
