"""Acceptance criteria, one test and one summary line each.

Every test collects its individual checks, records a single PASS/FAIL line
(printed in the pytest terminal summary) and then asserts.
"""

import math

import numpy as np

from conftest import ACCEPTANCE_LINES, random_network
from loopwatch.detect import build_error_function, detect, minimize_error, orient_suspects, remove_suspects
from loopwatch.errors import DisconnectedError
from loopwatch.exppoly import ExpPoly, ep_eval, ep_gradient
from loopwatch.matrix import (
    asymptotic_diag_slope,
    build_poly_matrix,
    numeric_eval,
    power_diagonals,
    symbolic_power,
    walk_oracle,
)
from loopwatch.network import adjust_arc, gauge_fix
from loopwatch.spectral import (
    charpoly_from_gould_determinant,
    charpoly_from_power_sums,
    power_sums,
    roots,
    spectrum,
)

SEEDS = range(50)


class Checks:
    def __init__(self, label):
        self.label = label
        self.failures = []

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)

    def close(self, got, want, tol, what):
        got, want = np.asarray(got, dtype=float), np.asarray(want, dtype=float)
        err = float(np.max(np.abs(got - want))) if got.size else 0.0
        self.check(got.shape == want.shape and err <= tol, f"{what}: max error {err:.3g} > {tol:g}")

    def finish(self):
        status = "PASS" if not self.failures else "FAIL"
        detail = "" if not self.failures else " | " + "; ".join(self.failures[:3])
        ACCEPTANCE_LINES.append(f"{status}  {self.label}{detail}")
        assert not self.failures, self.failures


def test_criterion_1_simple_clean(clean6):
    c = Checks("1  six-node clean network: zero deviation norms for z in {2, 3, 0.5}")
    for z in (2.0, 3.0, 0.5):
        c.check(max(power_diagonals(clean6, z, 6).norms) <= 1e-9, f"z={z}")
    c.finish()


def test_criterion_2_simple_erroneous(blunder6):
    c = Checks("2  six-node erroneous network: norms (0,0,0,6,7.5,78) and diag T4")
    s = power_diagonals(blunder6, 2.0, 6)
    c.close(s.norms, [0, 0, 0, 6, 7.5, 78], 1e-9, "norm series")
    c.close(s.diag(4), [1, 1.5, 0.5, 0.5, 1, 1.5], 1e-9, "diag T4")
    c.finish()


def test_criterion_3_asymptotic_slope(blunder6):
    c = Checks("3  asymptotic slope at r=4 equals (1, (2,3,1,1,2,3))")
    e_max, vec = asymptotic_diag_slope(blunder6, 4)
    c.check(e_max == 1 and vec.tolist() == [2, 3, 1, 1, 2, 3], f"got {e_max}, {vec.tolist()}")
    c.finish()


def test_criterion_4_simple_spectrum(clean6):
    c = Checks("4  six-node spectrum {3.092, 0.702, 0, 0, -1.285, -2.508}, z-independent")
    spectra = {z: spectrum(clean6, z) for z in (1.0, 2.0, 3.0)}
    for z, sp in spectra.items():
        c.close(sp.eigenvalues, [3.092, 0.702, 0, 0, -1.285, -2.508], 2e-3, f"z={z}")
        c.check(sp.is_real, f"z={z} not real")
    for z in (2.0, 3.0):
        c.close(spectra[z].eigenvalues, spectra[1.0].eigenvalues, 1e-8, f"z={z} vs z=1")
    c.check(dict(spectra[1.0].multiplicities()).get(0.0) == 2, "zero eigenvalue is not double")
    c.finish()


def test_criterion_5_simple_correction(blunder6):
    c = Checks("5  six-node correction: e(x) = 24*2^x + 6*2^-x - 24, x* = -1, e_min ~ 0")
    f = build_error_function(blunder6, [("2", "6")], 2.0, 4)
    c.check(f.coefficients() == {(1,): 24.0, (-1,): 6.0, (0,): -24.0}, f"coefficients {f.coefficients()}")
    res = minimize_error(f)
    c.close(res.x_star, [-1.0], 1e-8, "x*")
    c.check(res.e_min <= 1e-10, f"e_min {res.e_min:.3g}")
    c.finish()


def test_criterion_6_campaign_clean(campaign):
    c = Checks("6  campaign, error-free data: l2 norms (0,0,.003,.010,.075,.362), diag T3 ~ 1e-3")
    s = power_diagonals(campaign, 2.0, 6, norm="l2")
    c.close(s.norms, [0, 0, 0.003, 0.010, 0.075, 0.362], 5e-3, "norm series")
    reference = np.array([0.00113, 0.00094, 0.00117, 0.00139, 0.00099, 0.00157])
    d3 = s.diag(3)
    c.check(bool(np.all(d3 < reference + 2e-3)), f"diag T3 {np.round(d3, 5)}")
    c.close(d3, reference, 2e-3, "diag T3 vs reference")
    c.finish()


def test_criterion_7_campaign_corrupted(campaign_blunder):
    c = Checks("7  campaign, corrupted data: l2 norms (0,0,.050,.157,1.171,5.505), max diag T3 at point 4")
    s = power_diagonals(campaign_blunder, 2.0, 6, norm="l2")
    c.close(s.norms, [0, 0, 0.050, 0.157, 1.171, 5.505], 5e-3, "norm series")
    top = campaign_blunder.vertices[int(np.argmax(s.diag(3)))]
    c.check(top == "4", f"largest diag T3 entry at {top}")
    c.finish()


def test_criterion_8_campaign_correction(campaign_blunder):
    c = Checks("8  campaign correction: e(x,y) terms, minimiser (-0.124,-0.120), e_min 0.02, weights")
    suspects = orient_suspects(campaign_blunder, [("4", "5"), ("1", "4")])
    f = build_error_function(campaign_blunder, suspects, 2.0, 4)
    coef = f.coefficients()
    reference = {(1, -1): 8.09, (-1, 1): 7.91, (1, 0): 26.09, (-1, 0): 22.07, (0, 1): 26.16, (0, -1): 22.03}
    c.check(set(coef) == set(reference) | {(0, 0)}, f"term set {sorted(coef)}")
    for key, value in reference.items():
        c.check(abs(coef.get(key, math.inf) - value) <= 5e-2, f"coefficient {key}: {coef.get(key)}")
    c.check(abs(coef.get((0, 0), math.inf) + 112) <= 5e-2, f"constant {coef.get((0, 0))}")
    res = minimize_error(f)
    c.close(res.x_star, [-0.124, -0.120], 2e-3, "minimiser")
    c.check(abs(res.e_min - 0.02) <= 5e-3, f"e_min {res.e_min:.4g}")
    c.close(res.corrected_weights(), [3207.809, 5472.839], 2e-3, "corrected weights")
    c.finish()


# -- criterion 9: properties over seeded random instances -------------------


def _multiset(rng, n_max=8):
    """Random root multiset: support on a 0.5 grid in [-5, 5] with repeats."""
    n = int(rng.integers(1, n_max + 1))
    return sorted(rng.choice(np.arange(-10, 11) / 2.0, size=n, replace=True).tolist())


def _random_exppoly(rng):
    terms = []
    for _ in range(int(rng.integers(1, 5))):
        coeffs = {int(i): int(rng.integers(-2, 3)) for i in range(2) if rng.random() < 0.7}
        terms.append(((float(rng.uniform(-3, 3)), coeffs), float(rng.uniform(0.1, 5))))
    return ExpPoly(terms)


def test_criterion_9_properties():
    c = Checks("9  properties: walk oracle, consistency, gauge, round trip, convexity/recovery, gradient")

    # (a) symbolic powers agree with walk enumeration
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        G = random_network(rng, int(rng.integers(2, 7)), integer=bool(seed % 2))
        M = build_poly_matrix(G)
        for r in range(6):
            P = symbolic_power(M, r)
            ok = all(
                P.entry(i, j).isclose(walk_oracle(G, u, v, r))
                for i, u in enumerate(G.vertices)
                for j, v in enumerate(G.vertices)
            )
            c.check(ok, f"(a) seed {seed} r={r}")

    # (b) potential-generated networks: zero deviations, z-independent spectra
    for seed in SEEDS:
        rng = np.random.default_rng(1000 + seed)
        G = random_network(rng, int(rng.integers(2, 8)), potential=True)
        for z in (0.5, 2.0, 3.0):
            c.check(max(power_diagonals(G, z, 6).norms) <= 1e-9, f"(b) seed {seed} z={z} deviation")
        base = spectrum(G, 1.0).as_complex()
        for z in (2.0, 3.0):
            c.check(np.abs(spectrum(G, z).as_complex() - base).max() <= 1e-6, f"(b) seed {seed} z={z} spectrum")

    # (c) gauge fixing preserves diagonals of powers and traces
    for seed in SEEDS:
        rng = np.random.default_rng(2000 + seed)
        G = random_network(rng, int(rng.integers(2, 8)))
        H, _ = gauge_fix(G)
        for z in (0.5, 2.0, 3.0):
            A, B = numeric_eval(build_poly_matrix(G), z), numeric_eval(build_poly_matrix(H), z)
            PA, PB = np.eye(G.n), np.eye(G.n)
            for r in range(1, 7):
                PA, PB = PA @ A, PB @ B
                scale = max(1.0, float(np.abs(np.diag(PA)).max()))
                c.check(np.abs(np.diag(PA) - np.diag(PB)).max() <= 1e-9 * scale, f"(c) seed {seed} z={z} r={r} diag")
            c.check(np.allclose(power_sums(G, z, gauge=False).s, power_sums(G, z).s, rtol=1e-9), f"(c) seed {seed} traces")

    # (d) power sums -> polynomial -> roots; Newton identities vs Gould determinant
    for seed in SEEDS:
        rng = np.random.default_rng(3000 + seed)
        for rts in (_multiset(rng), sorted(rng.uniform(-5, 5, int(rng.integers(1, 9))).tolist())):
            s = [math.fsum(t**k for t in rts) for k in range(1, len(rts) + 1)]
            got = roots(charpoly_from_power_sums(s))
            err = max(np.abs(np.sort(got.real) - np.sort(rts)).max(), np.abs(got.imag).max())
            c.check(err <= 1e-6, f"(d) seed {seed} round trip error {err:.2g} for {rts}")
        rts = rng.uniform(-3, 3, int(rng.integers(1, 7)))
        s = [math.fsum(t**k for t in rts) for k in range(1, len(rts) + 1)]
        a = np.array(charpoly_from_power_sums(s).coeffs)
        b = np.array(charpoly_from_gould_determinant(s).coeffs)
        c.check(np.abs(a - b).max() <= 1e-9 * max(1.0, np.abs(a).max()), f"(d) seed {seed} Gould")

    # (e) convexity of e and recovery of an injected error
    for seed in SEEDS:
        rng = np.random.default_rng(4000 + seed)
        G = random_network(rng, int(rng.integers(3, 7)))
        f = build_error_function(G, [(a.tail, a.head) for a in G.arcs[:2]], 2.0, 4)
        for _ in range(5):
            x, y, lam = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2), rng.random()
            rhs = lam * f.value(x) + (1 - lam) * f.value(y)
            c.check(f.value(lam * x + (1 - lam) * y) <= rhs + 1e-9 * max(1.0, rhs), f"(e) seed {seed} convexity")

        arcs_on_cycles = []
        while not arcs_on_cycles:  # redraw trees, which have no closed walks to test
            T = random_network(rng, int(rng.integers(3, 7)), potential=True)
            for a in T.arcs:
                try:
                    remove_suspects(T, [(a.tail, a.head)])
                    arcs_on_cycles.append(a)
                except DisconnectedError:
                    pass
        arc = arcs_on_cycles[int(rng.integers(len(arcs_on_cycles)))]
        delta = float(rng.uniform(0.5, 5))
        bad = adjust_arc(T, arc.tail, arc.head, delta)
        r = detect(bad, 2.0, T.n, with_spectrum=False).first_failing_r
        res = minimize_error(build_error_function(bad, [(arc.tail, arc.head)], 2.0, r), post_check=False)
        c.check(abs(res.x_star[0] + delta) <= 1e-6, f"(e) seed {seed} recovered {res.x_star[0]:.8f} for delta {delta:.4f}")

    # (f) analytic gradient against central differences
    for seed in SEEDS:
        rng = np.random.default_rng(5000 + seed)
        p = _random_exppoly(rng)
        z = float(rng.choice([0.5, 2.0, 3.0]))
        x = rng.uniform(-2, 2, 2)
        g = ep_gradient(p, z, x)
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (ep_eval(p, z, x + e) - ep_eval(p, z, x - e)) / (2 * h)
            c.check(abs(fd - g[i]) <= 1e-5 * max(abs(g[i]), 1e-8), f"(f) seed {seed} component {i}")

    c.finish()
