"""Spectra of A(z) recovered from traces of its powers.

The power sums s_k = tr A(z)**k, k = 1..n, determine the characteristic
polynomial.  When the loop law holds every trace equals the closed-walk
count of the underlying graph, so the spectrum does not depend on z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .matrix import adjacency, build_poly_matrix, numeric_eval
from .network import WeightedDigraph, gauge_fix_all

CLUSTER_TOL = 1e-6
IMAG_TOL = 1e-6
# candidate radius and acceptance level for verified multiple roots
MERGE_RADII = tuple(10.0 ** (k / 4) for k in range(-24, -3))
MULTIPLE_ROOT_TOL = 1e-8
SPLIT_SCALE = 700.0
EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class PowerSums:
    s: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.s)


@dataclass(frozen=True)
class MonicPolynomial:
    """Coefficients of z**n .. z**0; the first is always 1."""

    coeffs: tuple[float, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z: complex) -> complex:
        return np.polyval(self.coeffs, z)


@dataclass(frozen=True)
class Spectrum:
    z: float
    eigenvalues: tuple[float, ...]
    imag: tuple[float, ...]

    @property
    def is_real(self) -> bool:
        return all(abs(b) <= IMAG_TOL for b in self.imag)

    def as_complex(self) -> np.ndarray:
        return np.array(self.eigenvalues) + 1j * np.array(self.imag)

    def multiplicities(self) -> list[tuple[float, int]]:
        out: list[tuple[float, int]] = []
        for lam in self.eigenvalues:
            if out and abs(out[-1][0] - lam) <= CLUSTER_TOL:
                out[-1] = (out[-1][0], out[-1][1] + 1)
            else:
                out.append((lam, 1))
        return out

    def to_dict(self) -> dict:
        d = {"z": self.z, "eigenvalues": list(self.eigenvalues), "real": self.is_real}
        if not self.is_real:
            d["imag"] = list(self.imag)
        return d


def _numeric_matrix(G: WeightedDigraph, z: float, gauge: bool) -> np.ndarray:
    if not z > 0:
        raise ValueError(f"z must be positive, got {z!r}")
    if z == 1:
        return adjacency(G)
    H = gauge_fix_all(G) if gauge else G
    return numeric_eval(build_poly_matrix(H), z)


def power_sums(G: WeightedDigraph, z: float, gauge: bool = True) -> PowerSums:
    A = _numeric_matrix(G, z, gauge)
    P = np.eye(G.n)
    s = []
    for _ in range(G.n):
        P = P @ A
        s.append(float(np.trace(P)))
    return PowerSums(tuple(s))


def charpoly_from_power_sums(p: PowerSums | Sequence[float]) -> MonicPolynomial:
    """Monic polynomial whose roots have the given power sums (Newton's identities)."""
    s = list(p.s if isinstance(p, PowerSums) else p)
    n = len(s)
    e = [1.0]
    for k in range(1, n + 1):
        acc = math.fsum((-1) ** (i - 1) * e[k - i] * s[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    return MonicPolynomial(tuple((-1) ** k * e[k] for k in range(n + 1)))


def _laplace_det(rows: tuple[tuple[float, ...], ...]) -> float:
    """Determinant by cofactor expansion along the first row, memoised on column sets."""
    size = len(rows)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: frozenset[int]) -> float:
        if row == size:
            return 1.0
        total = 0.0
        for pos, col in enumerate(sorted(cols)):
            a = rows[row][col]
            if a:
                total += (-1) ** pos * a * minor(row + 1, cols - {col})
        return total

    return minor(0, frozenset(range(size)))


def gould_matrix(p: PowerSums | Sequence[float]) -> list[list[float]]:
    """Rows 2..n+1 of the (n+1)-square determinant matrix; row 1 holds z**n .. 1."""
    s = list(p.s if isinstance(p, PowerSums) else p)
    n = len(s)
    rows = []
    for i in range(1, n + 1):
        row = [0.0] * (n + 1)
        for j in range(i):
            row[j] = s[i - 1 - j]
        row[i] = float(i)
        rows.append(row)
    return rows


def charpoly_from_gould_determinant(p: PowerSums | Sequence[float]) -> MonicPolynomial:
    """Same polynomial as ``charpoly_from_power_sums``, via det C(z) / n!.

    Expanding det C(z) along its first row (z**n, ..., z, 1) gives the
    coefficient of z**(n-j) as (-1)**j times the minor with column j removed.
    Limited to n <= 8.
    """
    rows = gould_matrix(p)
    n = len(rows)
    if n > 8:
        raise ValueError("explicit determinant expansion is limited to n <= 8")
    coeffs = []
    for j in range(n + 1):
        minor = tuple(tuple(r[c] for c in range(n + 1) if c != j) for r in rows)
        coeffs.append((-1) ** j * _laplace_det(minor) / math.factorial(n))
    return MonicPolynomial(tuple(coeffs))


def _cluster(values: np.ndarray) -> np.ndarray:
    """Replace each cluster of nearly equal roots by its mean.

    A root of multiplicity m perturbed by rounding splits into m roots
    spread as eps**(1/m) around the true value; their mean is accurate to eps.
    """
    order = sorted(values, key=lambda c: (-c.real, -c.imag))
    out: list[complex] = []
    group: list[complex] = []
    for c in order:
        if group and abs(c - group[0]) > CLUSTER_TOL:
            out.extend([sum(group) / len(group)] * len(group))
            group = []
        group.append(c)
    out.extend([sum(group) / len(group)] * len(group))
    return np.array(out, dtype=complex)


def _reproduces(coeffs: np.ndarray, values: list[complex]) -> bool:
    """Backward-error test: does prod(x - v) match ``coeffs`` to rounding level?

    Each coefficient is compared against the same coefficient of
    prod(x + |v|), which bounds its magnitude.
    """
    rebuilt = np.poly(values)
    bound = np.poly(-np.abs(np.asarray(values)))
    return bool(np.all(np.abs(rebuilt - coeffs) <= MULTIPLE_ROOT_TOL * bound))


def _polish(coeffs: np.ndarray, mu: complex, m: int, radius: float) -> complex:
    """Newton on the (m-1)-th derivative, where an m-fold root is simple."""
    d = np.polyder(coeffs, m - 1)
    dd = np.polyder(d)
    start = mu
    for _ in range(30):
        slope = np.polyval(dd, mu)
        if slope == 0:
            break
        step = np.polyval(d, mu) / slope
        mu -= step
        if abs(step) <= 4e-16 * max(1.0, abs(mu)):
            break
    # a runaway iteration means the group was not one multiple root
    return mu if np.isfinite(mu) and abs(mu - start) <= radius * max(1.0, abs(start)) else start


def _linkage_groups(order: list[complex], radius: float) -> list[list[int]]:
    """Single-linkage groups: chains of roots closer than ``radius`` (relative)."""
    parent = list(range(len(order)))

    def find(k: int) -> int:
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if abs(order[a] - order[b]) <= radius * max(1.0, abs(order[a]), abs(order[b])):
                parent[find(b)] = find(a)
    groups: dict[int, list[int]] = {}
    for k in range(len(order)):
        groups.setdefault(find(k), []).append(k)
    return list(groups.values())


def _merge_multiple(coeffs: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Merge wider clusters that behave as multiple roots.

    Rounding splits an m-fold root by roughly eps**(1/m), which exceeds the
    plain clustering radius once m >= 2.  For a ladder of radii the roots are
    grouped by single linkage and every group is replaced by its polished
    centre.  A grouping counts only if the merged roots still reproduce the
    polynomial; the passing grouping with the fewest distinct roots wins.
    """
    order = list(values)
    best, best_distinct = order, len(order)
    for radius in MERGE_RADII:
        groups = _linkage_groups(order, radius)
        if len(groups) >= best_distinct:
            continue
        trial = list(order)
        for g in groups:
            centre = sum(order[k] for k in g) / len(g)
            spread = max(abs(order[k] - centre) for k in g)
            # an m-fold root splits by about eps**(1/m); wider groups are distinct roots
            if len(g) > 1 and spread <= SPLIT_SCALE * EPS ** (1 / len(g)) * max(1.0, abs(centre)):
                mu = _polish(coeffs, centre, len(g), radius)
                if abs(mu.imag) <= IMAG_TOL:
                    mu = complex(mu.real, 0.0)
                for k in g:
                    trial[k] = mu
        if _reproduces(coeffs, trial):
            best, best_distinct = trial, len(groups)
    return np.array(best, dtype=complex)


def roots(poly: MonicPolynomial) -> np.ndarray:
    """Roots via eigenvalues of the companion matrix, clustered, sorted descending."""
    if poly.degree == 0:
        return np.zeros(0, dtype=complex)
    coeffs = np.asarray(poly.coeffs, dtype=float)
    raw = np.roots(coeffs)
    # np.roots strips trailing zero coefficients into zero roots
    raw = np.concatenate([raw, np.zeros(poly.degree - len(raw))])
    return _cluster(_merge_multiple(coeffs, _cluster(raw.astype(complex))))


def _spectrum_from(values: np.ndarray, z: float) -> Spectrum:
    values = sorted(values, key=lambda c: (-c.real, -c.imag))
    re = tuple(0.0 if abs(c.real) < 1e-12 else float(c.real) for c in values)
    im = tuple(0.0 if abs(c.imag) <= IMAG_TOL else float(c.imag) for c in values)
    return Spectrum(float(z), re, im)


def spectrum(G: WeightedDigraph, z: float, gauge: bool = True) -> Spectrum:
    """Eigenvalues of A(z) from its power sums; non-real pairs are kept and flagged."""
    if G.n == 0:
        return Spectrum(float(z), (), ())
    return _spectrum_from(roots(charpoly_from_power_sums(power_sums(G, z, gauge))), z)


def direct_spectrum(G: WeightedDigraph, z: float, gauge: bool = True) -> Spectrum:
    """Cross-check path: eigenvalues of the evaluated matrix itself."""
    if G.n == 0:
        return Spectrum(float(z), (), ())
    return _spectrum_from(_cluster(np.linalg.eigvals(_numeric_matrix(G, z, gauge)).astype(complex)), z)


def spectrum_distance(a: Spectrum, b: Spectrum) -> float:
    """Sum of |a_i - b_i| over eigenvalues paired in descending order."""
    return float(np.sum(np.abs(a.as_complex() - b.as_complex())))


def spectrum_deviation(G: WeightedDigraph, z: float, gauge: bool = True) -> float:
    if not z > 0 or z == 1:
        raise ValueError(f"z must be positive and different from 1, got {z!r}")
    return spectrum_distance(spectrum(G, z, gauge), spectrum(G, 1.0))
