"""Gross-error detection and correction.

Detection evaluates the diagonal deviations of A(z)**r against A(1)**r.
Correction attaches an unknown offset x_i to each suspect baseline and
minimises e(x) = tr A(z)**r - tr A(1)**r, a positively weighted sum of
exponentials of affine forms and therefore convex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DisconnectedError, MinimizationError, TermBudgetExceeded, UsageError
from .exppoly import ExpPoly, ep_eval, ep_gradient
from .matrix import (
    MAX_SUSPECTS,
    DeviationSeries,
    adjacency,
    build_poly_matrix,
    numeric_eval,
    power_diagonals,
    symbolic_power,
)
from .network import Arc, WeightedDigraph, adjust_arc, gauge_fix_all, remove_arcs
from .spectral import spectrum_deviation

EPS_CLEAN = 1e-9
DEFAULT_TAU = 1e-2
VERDICTS = ("clean", "minor", "gross")

SuspectLike = Arc | tuple[str, str]


@dataclass(frozen=True)
class DiagnosticsReport:
    series: DeviationSeries
    first_failing_r: int | None
    vertex_ranking: tuple[tuple[str, float], ...]
    spectrum_deviation: float | None
    verdict: str
    tau: float
    vertices: tuple[str, ...] = ()

    @property
    def max_vertex_deviation(self) -> float:
        return self.vertex_ranking[0][1] if self.vertex_ranking else 0.0

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "tau": self.tau,
            "first_failing_r": self.first_failing_r,
            "vertices": list(self.vertices),
            "vertex_ranking": [{"vertex": v, "deviation": d} for v, d in self.vertex_ranking],
            "spectrum_deviation": self.spectrum_deviation,
            "deviations": self.series.to_dict(),
        }


def detect(
    G: WeightedDigraph,
    z: float = 2.0,
    r_max: int | None = None,
    tau: float = DEFAULT_TAU,
    *,
    norm: str = "l1",
    eps_clean: float = EPS_CLEAN,
    with_spectrum: bool = True,
) -> DiagnosticsReport:
    """Run the loop-law diagnostics on a (possibly raw) network.

    The verdict is ``clean`` when every deviation norm is within
    ``eps_clean``, ``minor`` when the largest per-vertex deviation at the
    first failing power stays below ``tau``, and ``gross`` otherwise.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    series = power_diagonals(G, z, r_max, norm=norm)
    first = next((e.r for e in series.entries if series.norm(e.r) > eps_clean), None)
    ranking: tuple[tuple[str, float], ...] = ()
    if first is None:
        verdict = "clean"
    else:
        diag = series.entries[first - 1].diag
        order = sorted(range(G.n), key=lambda i: -diag[i])
        ranking = tuple((G.vertices[i], diag[i]) for i in order)
        verdict = "minor" if ranking[0][1] < tau else "gross"
    spec_dev = spectrum_deviation(G, z) if with_spectrum and G.n else None
    return DiagnosticsReport(series, first, ranking, spec_dev, verdict, tau, G.vertices)


def rank_suspect_arcs(G: WeightedDigraph, report: DiagnosticsReport, k: int = 2) -> list[Arc]:
    """Arcs scored by the summed deviation of their endpoints at the first failing power.

    A heuristic: a wrong baseline inflates the deviation of both its ends.
    Ties keep input arc order.
    """
    if report.first_failing_r is None:
        raise UsageError("network satisfies the loop law; nothing to rank")
    dev = dict(report.vertex_ranking)
    scored = sorted(G.arcs, key=lambda a: -(dev[a.tail] + dev[a.head]))
    return scored[:k]


def remove_suspects(G: WeightedDigraph, arcs: Sequence[SuspectLike]) -> WeightedDigraph:
    pairs = [(a.tail, a.head) if isinstance(a, Arc) else (a[0], a[1]) for a in arcs]
    H = remove_arcs(G, pairs)
    if G.is_connected() and not H.is_connected():
        comps = H.components()
        cut = tuple(v for c in comps[1:] for v in c.vertices)
        raise DisconnectedError("removing these baselines disconnects the network; cut off", cut)
    return H


def orient_suspects(G: WeightedDigraph, suspects: Sequence[SuspectLike]) -> tuple[tuple[str, str], ...]:
    """Direct each suspect baseline so that its measured weight is nonnegative."""
    out = []
    for u, v in _pairs(suspects):
        arc = G.arcs[G.arc_position(u, v)]
        out.append((arc.tail, arc.head) if arc.weight >= 0 else (arc.head, arc.tail))
    return tuple(out)


def _pairs(suspects: Sequence[SuspectLike]) -> tuple[tuple[str, str], ...]:
    return tuple((a.tail, a.head) if isinstance(a, Arc) else (str(a[0]), str(a[1])) for a in suspects)


@dataclass(frozen=True)
class ErrorFunction:
    """e(x) = tr A(z)**r at corrected weights minus tr A(1)**r."""

    trace_poly: ExpPoly
    constant_ref: float
    z: float
    r: int
    suspects: tuple[tuple[str, str], ...]
    network: WeightedDigraph = field(repr=False, compare=False)

    @property
    def s(self) -> int:
        return len(self.suspects)

    @cached_property
    def poly(self) -> ExpPoly:
        """e(x) with constant exponents folded at ``z``: sum b * z**(c . x) + b0."""
        return self.trace_poly.fold(self.z) - self.constant_ref

    def coefficients(self) -> dict[tuple[int, ...], float]:
        """Folded coefficients keyed by the dense integer exponent vector over x."""
        out = {}
        for e, c in self.poly.terms:
            vec = [0] * self.s
            for var, k in e.coeffs:
                vec[var] = k
            out[tuple(vec)] = c
        return out

    @cached_property
    def _compiled(self) -> tuple[np.ndarray, np.ndarray, float]:
        coefs = self.coefficients()
        const = coefs.pop((0,) * self.s, 0.0)
        C = np.array(list(coefs), dtype=float).reshape(len(coefs), self.s)
        b = np.array(list(coefs.values()), dtype=float)
        return C, b, const

    def value(self, x: Sequence[float]) -> float:
        C, b, const = self._compiled
        return float(math.fsum(b * np.power(self.z, C @ np.asarray(x, dtype=float)))) + const

    def gradient(self, x: Sequence[float]) -> np.ndarray:
        C, b, _ = self._compiled
        t = b * np.power(self.z, C @ np.asarray(x, dtype=float)) * math.log(self.z)
        return C.T @ t

    def exact_value(self, x: Sequence[float]) -> float:
        """Evaluation straight from the unfolded trace polynomial."""
        return ep_eval(self.trace_poly, self.z, x) - self.constant_ref

    def exact_gradient(self, x: Sequence[float]) -> np.ndarray:
        return ep_gradient(self.trace_poly, self.z, x)

    def unused_variables(self) -> list[int]:
        used = {var for e, _ in self.trace_poly.terms for var, _ in e.coeffs}
        return [i for i in range(self.s) if i not in used]


@dataclass(frozen=True)
class NumericErrorFunction:
    """Same e(x) computed from dense matrix powers, for networks too large to expand."""

    z: float
    r: int
    suspects: tuple[tuple[str, str], ...]
    network: WeightedDigraph = field(repr=False, compare=False)

    @property
    def s(self) -> int:
        return len(self.suspects)

    @cached_property
    def _base(self) -> tuple[WeightedDigraph, float]:
        H = gauge_fix_all(self.network)
        ref = float(np.trace(np.linalg.matrix_power(adjacency(H), self.r)))
        return H, ref

    def _matrix(self, x: Sequence[float]) -> np.ndarray:
        H, _ = self._base
        return numeric_eval(build_poly_matrix(H, self.suspects), self.z, list(x))

    def value(self, x: Sequence[float]) -> float:
        _, ref = self._base
        return float(np.trace(np.linalg.matrix_power(self._matrix(x), self.r))) - ref

    def gradient(self, x: Sequence[float]) -> np.ndarray:
        # d tr(A^r) = r tr(A^(r-1) dA); dA/dx_i scales entry (u,v) by ln z and (v,u) by -ln z
        H, _ = self._base
        A = self._matrix(x)
        B = np.linalg.matrix_power(A, self.r - 1)
        lz = math.log(self.z)
        g = np.zeros(self.s)
        for i, (u, v) in enumerate(self.suspects):
            a, b = H.index(u), H.index(v)
            g[i] = self.r * lz * (B[b, a] * A[a, b] - B[a, b] * A[b, a])
        return g

    def unused_variables(self) -> list[int]:
        return []


def closed_walk_count(G: WeightedDigraph, r: int) -> float:
    return float(np.trace(np.linalg.matrix_power(adjacency(G), r)))


def build_error_function(
    G: WeightedDigraph,
    suspects: Sequence[SuspectLike],
    z: float = 2.0,
    r: int = 4,
    *,
    gauge: bool = True,
    method: str = "symbolic",
    budget: int | None = None,
) -> ErrorFunction | NumericErrorFunction:
    """Error function over one correction variable per suspect baseline.

    ``method`` is ``symbolic`` (exact trace polynomial), ``numeric`` (dense
    matrix powers) or ``auto`` (symbolic, numeric when over the term budget).
    """
    pairs = _pairs(suspects)
    if not pairs:
        raise UsageError("at least one suspect arc is required")
    if len(pairs) > MAX_SUSPECTS:
        raise UsageError(f"at most {MAX_SUSPECTS} suspects are supported")
    if not z > 0 or z == 1:
        raise ValueError("z must be positive and different from 1")
    if r < 1:
        raise ValueError("r must be at least 1")
    if method not in ("symbolic", "numeric", "auto"):
        raise ValueError(f"unknown method {method!r}")
    for u, v in pairs:
        G.arc_position(u, v)
    if method == "numeric":
        return NumericErrorFunction(float(z), r, pairs, G)
    H = gauge_fix_all(G) if gauge else G
    try:
        P = symbolic_power(build_poly_matrix(H, pairs), r, budget)
    except TermBudgetExceeded:
        if method == "auto":
            return NumericErrorFunction(float(z), r, pairs, G)
        raise
    return ErrorFunction(P.trace(), closed_walk_count(G, r), float(z), r, pairs, G)


@dataclass(frozen=True)
class CorrectionResult:
    suspects: tuple[tuple[str, str], ...]
    x_star: np.ndarray
    e_min: float
    e_zero: float
    corrected: WeightedDigraph
    post_report: DiagnosticsReport | None
    iterations: int
    method: str

    def corrected_weights(self) -> list[float]:
        """Weights of the suspects, in their stated direction, after correction."""
        return [self.corrected.arcs[self.corrected.arc_position(u, v)].weight_from(u) for u, v in self.suspects]

    def to_dict(self) -> dict:
        return {
            "suspects": [f"{u}-{v}" for u, v in self.suspects],
            "x_star": [float(x) for x in self.x_star],
            "corrected_weights": self.corrected_weights(),
            "e_zero": self.e_zero,
            "e_min": self.e_min,
            "iterations": self.iterations,
            "method": self.method,
            "post_report": None if self.post_report is None else self.post_report.to_dict(),
        }


def _gradient_descent(f, x: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int, bool]:
    step = 1.0
    fx = f.value(x)
    for it in range(max_iter):
        g = f.gradient(x)
        if np.max(np.abs(g)) < tol:
            return x, it, True
        gg = float(g @ g)
        while True:
            cand = x - step * g
            fc = f.value(cand)
            if fc < fx and fc <= fx - 1e-4 * step * gg:
                break
            step *= 0.5
            if step < 1e-16:
                return x, it, False
        x, fx = cand, fc
        if np.max(np.abs(x)) > 1e6:
            raise MinimizationError("correction diverges; the error function is unbounded in some direction")
        step *= 2.0
    return x, max_iter, np.max(np.abs(f.gradient(x))) < tol


def _bisect_coordinate(f, x: np.ndarray, i: int, tol: float) -> np.ndarray:
    def d(t: float) -> float:
        y = x.copy()
        y[i] = t
        return f.gradient(y)[i]

    lo, hi = x[i] - 1.0, x[i] + 1.0
    while d(lo) > 0:
        lo -= 2 * (hi - lo)
        if lo < -1e6:
            raise MinimizationError("correction diverges along one coordinate")
    while d(hi) < 0:
        hi += 2 * (hi - lo)
        if hi > 1e6:
            raise MinimizationError("correction diverges along one coordinate")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        dm = d(mid)
        if abs(dm) < tol * 1e-3 or hi - lo < 1e-15:
            break
        if dm > 0:
            hi = mid
        else:
            lo = mid
    y = x.copy()
    y[i] = 0.5 * (lo + hi)
    return y


def _coordinate_bisection(f, x: np.ndarray, tol: float, sweeps: int = 1000) -> tuple[np.ndarray, int, bool]:
    """Derivative-sign bisection, one coordinate at a time; needs only gradient signs."""
    for sweep in range(sweeps):
        if np.max(np.abs(f.gradient(x))) < tol:
            return x, sweep, True
        for i in range(len(x)):
            x = _bisect_coordinate(f, x, i, tol)
    return x, sweeps, np.max(np.abs(f.gradient(x))) < tol


def minimize_error(
    f: ErrorFunction | NumericErrorFunction,
    x0: Sequence[float] | None = None,
    *,
    tol: float = 1e-9,
    max_iter: int = 10_000,
    r_max: int | None = None,
    tau: float = DEFAULT_TAU,
    post_check: bool = True,
) -> CorrectionResult:
    """Gradient descent with backtracking on the convex error function.

    Falls back to coordinate bisection on the gradient sign when the line
    search stalls (typically when rounding dominates near the optimum).
    """
    unused = f.unused_variables()
    if unused:
        names = ", ".join(f"{f.suspects[i][0]}-{f.suspects[i][1]}" for i in unused)
        raise MinimizationError(f"suspect arc lies on no closed walk of length r={f.r} ({names}); increase r")
    x = np.zeros(f.s) if x0 is None else np.asarray(x0, dtype=float).copy()
    if x.shape != (f.s,):
        raise UsageError(f"x0 must have {f.s} entries")
    x, iters, ok = _gradient_descent(f, x, tol, max_iter)
    method = "gradient-descent"
    if not ok:
        x, extra, ok = _coordinate_bisection(f, x, tol)
        iters += extra
        method = "coordinate-bisection"
    if not ok:
        raise MinimizationError(f"no convergence to gradient tolerance {tol:g}")
    corrected = f.network
    for (u, v), dx in zip(f.suspects, x):
        corrected = adjust_arc(corrected, u, v, float(dx))
    post = detect(corrected, f.z, r_max, tau) if post_check else None
    return CorrectionResult(f.suspects, x, f.value(x), f.value(np.zeros(f.s)), corrected, post, iters, method)


def sample_error_surface(
    f: ErrorFunction | NumericErrorFunction,
    grid: Sequence[tuple[float, float, int]],
) -> list[tuple[float, ...]]:
    """Rows (x0[, x1], e) over a regular grid, for plotting e."""
    if f.s > 2:
        raise UsageError("surface export supports at most two variables; fix the others and slice")
    if len(grid) != f.s:
        raise UsageError(f"need one (lo, hi, steps) range per variable ({f.s})")
    axes = [np.linspace(lo, hi, int(steps)) for lo, hi, steps in grid]
    rows = []
    if f.s == 1:
        for a in axes[0]:
            rows.append((float(a), f.value([a])))
    else:
        for a in axes[0]:
            for b in axes[1]:
                rows.append((float(a), float(b), f.value([a, b])))
    return rows


def choose_r(G: WeightedDigraph, suspects: Sequence[SuspectLike], z: float = 2.0, r_limit: int | None = None) -> int:
    """Smallest r >= 2 at which every suspect appears in some closed r-walk with a net crossing."""
    r_limit = r_limit or max(G.n, 3) + 1
    for r in range(2, r_limit + 1):
        f = build_error_function(G, suspects, z, r)
        if not f.unused_variables():
            return r
    raise MinimizationError("a suspect arc lies on no cycle of the network")


def correct(
    G: WeightedDigraph,
    suspects: Sequence[SuspectLike] | None = None,
    z: float = 2.0,
    r: int | None = None,
    *,
    k: int = 2,
    r_max: int | None = None,
    tau: float = DEFAULT_TAU,
    method: str = "auto",
) -> CorrectionResult:
    """Detect, pick suspects if none are given, and minimise e at the first failing r."""
    report = detect(G, z, r_max, tau, with_spectrum=False)
    if suspects is None:
        suspects = orient_suspects(G, rank_suspect_arcs(G, report, k))
    if r is None:
        r = report.first_failing_r or choose_r(G, suspects, z)
    f = build_error_function(G, suspects, z, r, method=method)
    return minimize_error(f, r_max=r_max, tau=tau)
