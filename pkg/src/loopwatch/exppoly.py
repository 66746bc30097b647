"""Finite sums of terms ``a * z**(c0 + sum_i c_i * x_i)``.

Every entry of a power of the polynomial matrix lives in this algebra: the
constant part of an exponent is a real sum of measured weights and the
integer coefficients count how often (and in which direction) a walk uses
each suspect arc whose correction ``x_i`` is still unknown.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import NumericOverflowError, UsageError

EXP_TOL = 1e-9
COEF_TOL = 1e-12
# exp(709.78) is the largest finite double
MAX_LOG = 700.0


class AffineExponent(NamedTuple):
    constant: float
    coeffs: tuple[tuple[int, int], ...] = ()

    @classmethod
    def make(cls, constant: float, coeffs: dict[int, int] | Iterable[tuple[int, int]] = ()) -> AffineExponent:
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        merged: dict[int, int] = {}
        for var, c in items:
            if var < 0:
                raise ValueError("variable indices are nonnegative")
            merged[var] = merged.get(var, 0) + int(c)
        return cls(float(constant), tuple(sorted((k, v) for k, v in merged.items() if v)))

    def plus(self, other: AffineExponent) -> AffineExponent:
        if not other.coeffs:
            return AffineExponent(self.constant + other.constant, self.coeffs)
        if not self.coeffs:
            return AffineExponent(self.constant + other.constant, other.coeffs)
        return AffineExponent.make(self.constant + other.constant, self.coeffs + other.coeffs)

    def negated(self) -> AffineExponent:
        return AffineExponent(-self.constant, tuple((k, -v) for k, v in self.coeffs))

    def value(self, x: Sequence[float] = ()) -> float:
        total = self.constant
        for var, c in self.coeffs:
            try:
                total += c * x[var]
            except IndexError:
                raise UsageError(f"no value supplied for variable x{var}") from None
        return total

    def render(self) -> str:
        parts = [f"{self.constant:.12g}"]
        for var, c in self.coeffs:
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {abs(c)}*x{var}")
        return " ".join(parts)


Term = tuple[AffineExponent, float]


def _canonical(raw: Iterable[Term], exp_tol: float, coef_tol: float) -> tuple[Term, ...]:
    items = sorted(raw, key=lambda t: (t[0].coeffs, t[0].constant))
    merged: list[Term] = []
    i = 0
    while i < len(items):
        exp, _ = items[i]
        group = [items[i][1]]
        j = i + 1
        while (
            j < len(items)
            and items[j][0].coeffs == exp.coeffs
            and items[j][0].constant - exp.constant <= exp_tol
        ):
            group.append(items[j][1])
            j += 1
        coef = math.fsum(group) if len(group) > 1 else group[0]
        if abs(coef) > coef_tol:
            merged.append((exp, coef))
        i = j
    merged.sort(key=lambda t: (-t[0].constant, t[0].coeffs))
    return tuple(merged)


class ExpPoly:
    """Immutable canonical sum of exponential terms.

    Terms whose exponents share integer coefficients and whose constants
    differ by at most ``exp_tol`` are merged; coefficients within
    ``coef_tol`` of zero are dropped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Term] = (), *, exp_tol: float = EXP_TOL, coef_tol: float = COEF_TOL):
        self.terms: tuple[Term, ...] = _canonical(
            ((e if isinstance(e, AffineExponent) else AffineExponent.make(*e), float(c)) for e, c in terms),
            exp_tol,
            coef_tol,
        )

    @classmethod
    def monomial(cls, constant: float = 0.0, coeffs: dict[int, int] | None = None, coef: float = 1.0) -> ExpPoly:
        return cls([(AffineExponent.make(constant, coeffs or {}), coef)])

    @classmethod
    def const(cls, value: float) -> ExpPoly:
        return cls([(AffineExponent(0.0), value)])

    @property
    def num_vars(self) -> int:
        return max((var + 1 for e, _ in self.terms for var, _ in e.coeffs), default=0)

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def isclose(self, other: ExpPoly, exp_tol: float = EXP_TOL, coef_tol: float = 1e-9) -> bool:
        if len(self.terms) != len(other.terms):
            return False
        for (ea, ca), (eb, cb) in zip(self.terms, other.terms):
            if ea.coeffs != eb.coeffs or abs(ea.constant - eb.constant) > exp_tol:
                return False
            if abs(ca - cb) > coef_tol * max(1.0, abs(ca), abs(cb)):
                return False
        return True

    def __add__(self, other: ExpPoly | float) -> ExpPoly:
        return ep_add(self, _lift(other))

    __radd__ = __add__

    def __neg__(self) -> ExpPoly:
        return ExpPoly((e, -c) for e, c in self.terms)

    def __sub__(self, other: ExpPoly | float) -> ExpPoly:
        return ep_add(self, -_lift(other))

    def __rsub__(self, other: float) -> ExpPoly:
        return ep_add(_lift(other), -self)

    def __mul__(self, other: ExpPoly | float) -> ExpPoly:
        if isinstance(other, ExpPoly):
            return ep_mul(self, other)
        return ExpPoly((e, c * other) for e, c in self.terms)

    __rmul__ = __mul__

    def __call__(self, z: float, x: Sequence[float] = ()) -> float:
        return ep_eval(self, z, x)

    def fold(self, z: float) -> ExpPoly:
        """Absorb the constant exponents into the coefficients at a fixed ``z``.

        The result is a sum ``b * z**(c . x)`` with one term per distinct
        integer coefficient vector and evaluates identically at ``z``.
        """
        _check_base(z)
        lz = math.log(z)
        folded = []
        for e, c in self.terms:
            # z ** c is exact for integer c where exp(c * ln z) is not
            folded.append((AffineExponent(0.0, e.coeffs), c * _safe_pow(z, e.constant, lz)))
        return ExpPoly(folded)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for k, (e, c) in enumerate(self.terms):
            body = f"{abs(c):.12g}*z^({e.render()})"
            if k == 0:
                out.append(body if c >= 0 else "-" + body)
            else:
                out.append(("+ " if c >= 0 else "- ") + body)
        return " ".join(out)

    def __repr__(self) -> str:
        return f"ExpPoly({self})"


ZERO = ExpPoly()
ONE = ExpPoly.const(1.0)


def _lift(value: ExpPoly | float) -> ExpPoly:
    return value if isinstance(value, ExpPoly) else ExpPoly.const(float(value))


def ep_add(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    return ExpPoly(a.terms + b.terms)


def ep_mul(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    return ExpPoly((ea.plus(eb), ca * cb) for ea, ca in a.terms for eb, cb in b.terms)


def _check_base(z: float) -> None:
    if not z > 0 or not math.isfinite(z):
        raise ValueError(f"z must be a finite positive real, got {z!r}")


def _safe_pow(z: float, exponent: float, lz: float) -> float:
    if exponent * lz > MAX_LOG:
        raise NumericOverflowError(
            f"z**L overflows (L*ln z = {exponent * lz:.1f}); gauge_fix the network before evaluating"
        )
    return z**exponent


def _check_arity(p: ExpPoly, x: Sequence[float]) -> None:
    if p.num_vars > len(x):
        raise UsageError(f"polynomial uses {p.num_vars} variables but {len(x)} values were given")


def ep_eval(p: ExpPoly, z: float, x: Sequence[float] = ()) -> float:
    """Evaluate at real ``z > 0`` and correction vector ``x``.

    Each term is range-checked through L * ln z before forming z**L, and the
    terms are summed with ``math.fsum``, which is exact up to the final
    rounding and therefore independent of term order.
    """
    _check_base(z)
    _check_arity(p, x)
    lz = math.log(z)
    return math.fsum(c * _safe_pow(z, e.value(x), lz) for e, c in p.terms)


def ep_gradient(p: ExpPoly, z: float, x: Sequence[float] = ()) -> np.ndarray:
    """Partial derivatives with respect to each correction variable."""
    _check_base(z)
    _check_arity(p, x)
    lz = math.log(z)
    parts: list[list[float]] = [[] for _ in range(len(x))]
    for e, c in p.terms:
        if not e.coeffs:
            continue
        val = c * lz * _safe_pow(z, e.value(x), lz)
        for var, k in e.coeffs:
            parts[var].append(k * val)
    return np.array([math.fsum(g) for g in parts], dtype=float)


def ep_is_constant(p: ExpPoly, exp_tol: float = EXP_TOL) -> tuple[bool, float]:
    """Whether all mass sits on the zero exponent, and that mass."""
    if not p.terms:
        return True, 0.0
    if len(p.terms) == 1:
        e, c = p.terms[0]
        if not e.coeffs and abs(e.constant) <= exp_tol:
            return True, c
    return False, math.nan


def ep_max_constant_exponent(p: ExpPoly) -> tuple[float, float]:
    """Largest exponent of a variable-free polynomial and its coefficient."""
    if any(e.coeffs for e, _ in p.terms):
        raise UsageError("polynomial has variable-bearing terms")
    if not p.terms:
        return 0.0, 0.0
    # canonical order is descending constant
    e, c = p.terms[0]
    return e.constant, c
