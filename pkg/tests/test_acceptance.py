"""Acceptance criteria 1-12.  Each test prints one PASS/FAIL line.

Run with pytest, or directly: python tests/test_acceptance.py
"""
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from su2pdo.diffops import (D, admissibility_report, apply, difference_via_kernel, family_qij,
                            family_tri, q_function, taylor_frame)
from su2pdo.harmonic import (build_grid, forward, inverse, random_coefficients)
from su2pdo.opcatalog import (CATALOG, annihilation_residual, builtin, gh_classify,
                              halfint_gap_check, nonhypo_operator, nonhypo_witness,
                              null_distribution, pell_ells, singular_ells)
from su2pdo.su2rep import HalfInt
from su2pdo.symbolspace import (DifferentialOperator, LeftInvariantSymbol, field_symbol, identity,
                                sup_norms, times_function)
from su2pdo.symcalc import (bandwidth, composition_residual, default_points, fit_symbol_class,
                            invert_symbol, offdiag_decay_check, parametrix, power_slope)
from su2pdo.torus import torus_admissibility, torus_difference, torus_fit, torus_symbol

_capsys = None


@pytest.fixture(autouse=True)
def _terminal(capsys):
    global _capsys
    _capsys = capsys
    yield
    _capsys = None


def report(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    if _capsys is not None:
        with _capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def max_abs(s, top):
    return max(float(np.max(np.abs(s.blocks[tl]))) for tl in range(top + 1))


# 1 ---------------------------------------------------------------------------

def test_criterion_01_fourier_roundtrip_parseval():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    c = random_coefficients(rng, 32)  # L = 16
    f = inverse(c, build_grid(16))
    back = forward(f)
    dt = time.perf_counter() - t0
    rt = math.sqrt(sum(np.sum(np.abs(back.blocks[tl] - c.blocks[tl]) ** 2) * (tl + 1)
                       for tl in range(33)) / c.hs_norm2())
    pg = abs(f.norm2() - back.hs_norm2()) / f.norm2()
    report(1, rt <= 1e-10 and pg <= 1e-10 and dt < 30,
           f"round-trip rel {rt:.2e}, Parseval rel {pg:.2e}, {dt:.2f} s")


# 2 ---------------------------------------------------------------------------

def test_criterion_02_difference_table():
    T = 22  # l <= 10 after one edge step
    d0, dp, dm, L = (builtin(n, T) for n in ("d0", "d+", "d-", "Lap"))
    I, Z = identity(T), 0.0 * identity(T)
    table = {
        "d0": {(1, 1): 0.5 * I, (1, 2): Z, (2, 1): Z, (2, 2): -0.5 * I},
        "d+": {(1, 1): Z, (1, 2): I, (2, 1): Z, (2, 2): Z},
        "d-": {(1, 1): Z, (1, 2): Z, (2, 1): I, (2, 2): Z},
        "Lap": {(1, 1): -1.0 * d0 + 0.25 * I, (1, 2): -1.0 * dm,
                (2, 1): -1.0 * dp, (2, 2): d0 + 0.25 * I},
    }
    syms = {"d0": d0, "d+": dp, "d-": dm, "Lap": L}
    failed, worst_ok = [], 0.0
    for name, row in table.items():
        for (i, j), want in row.items():
            err = max_abs(apply(D(i, j), syms[name]) - want, 20)
            if err > 1e-10:
                failed.append(f"D{i}{j}sigma_{name} (err {err:.3g})")
            else:
                worst_ok = max(worst_ok, err)
    # independent oracle: kernel multiplication reproduces the computed differences
    oracle = max(max_abs(apply(D(i, j), L) - difference_via_kernel(q_function(i, j), L.truncate(12)),
                         10) for i in (1, 2) for j in (1, 2))
    report(2, not failed and oracle < 1e-10,
           f"{16 - len(failed)}/16 entries match (max err {worst_ok:.1e}); kernel oracle "
           f"{oracle:.1e}; mismatched: {', '.join(failed) or 'none'}")


# 3 ---------------------------------------------------------------------------

def _rand_symbol(rng, T):
    return LeftInvariantSymbol({tl: rng.standard_normal((tl + 1, tl + 1))
                                + 1j * rng.standard_normal((tl + 1, tl + 1))
                                for tl in range(T + 1)}, T)


def test_criterion_03_finite_leibniz():
    rng = np.random.default_rng(3)
    T = 18  # l <= 8 after the edge step
    worst, worst_literal, worst_comm = 0.0, 0.0, 0.0
    for _ in range(50):
        a, b = _rand_symbol(rng, T), _rand_symbol(rng, T)
        Da = {(i, j): apply(D(i, j), a) for i in (1, 2) for j in (1, 2)}
        Db = {(i, j): apply(D(i, j), b) for i in (1, 2) for j in (1, 2)}
        ab = a @ b
        for i in (1, 2):
            for j in (1, 2):
                base = apply(D(i, j), ab) - Da[i, j] @ b - a @ Db[i, j]
                # cross term sum_k (D_kj a)(D_ik b); with the transposed labels
                # D'_ij = D_ji this is the pairing sum_k (D'_ik a)(D'_kj b)
                r = base - sum((Da[k, j] @ Db[i, k] for k in (1, 2)), 0.0 * ab)
                lit = base - sum((Da[i, k] @ Db[k, j] for k in (1, 2)), 0.0 * ab)
                worst = max(worst, max_abs(r, 16))
                worst_literal = max(worst_literal, max_abs(lit, 16))
        worst_comm = max(worst_comm, max_abs(apply(D(1, 2), Da[2, 1]) - apply(D(2, 1), Da[1, 2]), 16),
                         max_abs(apply(D(1, 1), Da[2, 2]) - apply(D(2, 2), Da[1, 1]), 16))
    report(3, worst <= 1e-9 and worst_comm <= 1e-10,
           f"Leibniz residual {worst:.1e} over 50 pairs (untransposed labels: {worst_literal:.1f}); "
           f"commutator {worst_comm:.1e}")


# 4 ---------------------------------------------------------------------------

def _ratio_closed_form(tl, tm, tn):
    """Displayed entry sqrt((l+n)(l-n+1)) / ((n-1)^2 - l(l+1)) at m = n-1, as (square, sign)."""
    l, m, n = Fraction(tl, 2), Fraction(tm, 2), Fraction(tn, 2)
    if m != n - 1:
        return Fraction(0), 0
    num, den = (l + n) * (l - n + 1), (n - 1) ** 2 - l * (l + 1)
    return (num / den ** 2, 1 if den > 0 else -1) if num else (Fraction(0), 0)


def test_criterion_04_sublaplacian_bound():
    T = 66
    S = builtin("SubLap", T)
    R = invert_symbol(S).symbol @ apply(D(1, 2), S)
    worst, worst_raw = 0.0, 0.0
    for tl in range(1, 65):
        for a, tm in enumerate(range(-tl, tl + 1, 2)):
            for b, tn in enumerate(range(-tl, tl + 1, 2)):
                sq, sg = _ratio_closed_form(tl, -tm, -tn)  # basis mirror m -> -m
                want = sg * math.sqrt(sq)
                worst = max(worst, abs(R.blocks[tl][a, b] - want))
                sq, sg = _ratio_closed_form(tl, tm, tn)
                worst_raw = max(worst_raw, abs(R.blocks[tl][a, b] - sg * math.sqrt(sq)))
    example = R.blocks[2][1, 0]  # l = 1, (m, n) = (0, -1) mirrors the displayed (0, 1) entry
    bound = max(math.sqrt(tl / 4) * np.linalg.norm(R.blocks[tl], 2) for tl in range(2, 65))
    ok = worst < 1e-12 and abs(example + math.sqrt(2) / 2) < 1e-14 and bound <= 1 + 1e-9
    report(4, ok, f"closed form (mirrored indices) max err {worst:.1e}, unmirrored {worst_raw:.2f}; "
                  f"l=1 entry {example.real:.6f}; max sqrt(l/2)|.| = {bound:.12f}")


# 5 ---------------------------------------------------------------------------

def test_criterion_05_d3_plus_c():
    rng = np.random.default_rng(5)
    cs = [1j * k / 2 for k in range(-4, 5)]
    cs += list(rng.normal(size=10) + 1j * rng.normal(size=10))
    cs += [0.3, -1.7, 0.25j, 0.1 + 0.5j, 1j * 0.49, 2.0, -0.01 + 1j, 0.7j, 3j, 1e-3 + 1.5j]
    assert len(cs) >= 29
    T = 64
    disagree, worst_bound = [], 0.0
    for c in cs:
        ic = (Fraction(-c.imag), Fraction(c.real))  # i c as exact (re, im)
        resonant = ic[1] == 0 and (2 * ic[0]).denominator == 1
        v = gh_classify("D3_plus_c", c, twice_lmax=T)
        if v.hypoelliptic == resonant:
            disagree.append(c)
            continue
        inv = invert_symbol(builtin("D3_plus_c", T, c))
        if resonant:
            if not inv.singular:
                disagree.append(c)
            continue
        re = float(ic[0])
        dist = math.hypot(re - round(2 * re) / 2, float(ic[1]))
        top = max(np.linalg.norm(inv.symbol.blocks[tl], 2) for tl in range(T + 1))
        worst_bound = max(worst_bound, top * dist)
    report(5, not disagree and worst_bound <= 1 + 1e-12,
           f"{len(cs)} values of c, disagreements {len(disagree)}; "
           f"max |sigma^-1| * dist(ic, Z/2) = {worst_bound:.12f}")


# 6 ---------------------------------------------------------------------------

def test_criterion_06_dalembert():
    brute = [l for l in range(1, 65) if any(2 * m * m == l * (l + 1) for m in range(0, l + 1))]
    floor = [l for l in pell_ells(5).ells if l <= 64]
    W = builtin("DAlembert", 128)
    sing = [int(h.value) for h in singular_ells(W) if h.twice > 0]
    gap = halfint_gap_check(Fraction(127, 2))
    f = null_distribution("dalembert", 3)
    res = annihilation_residual(builtin("DAlembert", f.twice_max), f)
    ok = brute == floor == sing == [1, 8, 49] and gap == Fraction(1, 4) and res == 0.0
    report(6, ok, f"singular l>0: {sing}, brute force {brute}, floor formula {floor}; "
                  f"half-integer gap {gap}; null residual {res}")


# 7 ---------------------------------------------------------------------------

def test_criterion_07_null_distributions():
    rng = np.random.default_rng(7)
    worst, worst_grid = 0.0, 0.0
    K = 6
    grid = build_grid(K + 1)
    for _ in range(5):
        a = random_coefficients(rng, 2)
        f, res = nonhypo_witness(a, K)
        worst = max(worst, res)
        vals = nonhypo_operator(a).apply(f, grid).samples
        worst_grid = max(worst_grid, float(np.max(np.abs(vals))))
    sch = max(annihilation_residual(builtin("Schrodinger" + s, 40), null_distribution("schrodinger" + s, 20))
              for s in "+-")
    report(7, worst == 0.0 and sch == 0.0 and worst_grid < 1e-9,
           f"D3^2 + a D3 block residual {worst} (5 random a; on-grid {worst_grid:.1e}); "
           f"Schrodinger residual {sch}")


# 8 ---------------------------------------------------------------------------

def test_criterion_08_parametrix_orders():
    rng = np.random.default_rng(8)
    T = 56
    a = random_coefficients(rng, 2, 0.05)
    lap = DifferentialOperator(((None, (1, 1), 1.0), (None, (2, 2), 1.0), (None, (3, 3), 1.0)))
    A = lap + DifferentialOperator(((a, (3,), 1.0),))
    par = parametrix([lap.symbol(T), times_function(a, field_symbol(3, T))], 3,
                     taylor_frame(family_qij(), 4))
    pts = default_points()
    window = (16, 48)  # l in [8, 24]
    slopes = []
    for N in range(4):
        r = composition_residual(A, par.partial(N))
        assert r.twice_reliable >= window[1]
        slopes.append(power_slope(sup_norms(r, range(window[0], window[1] + 1), pts), window)[0])
    drops = np.diff(slopes)
    ok = all(abs(d + 1.0) <= 0.3 for d in drops)
    report(8, ok, "residual orders " + ", ".join(f"{s:.2f}" for s in slopes)
           + "; drops " + ", ".join(f"{-d:.2f}" for d in drops))


# 9 ---------------------------------------------------------------------------

def test_criterion_09_class_fits():
    T = 64
    Ls = builtin("SubLap", T)
    f1 = fit_symbol_class(Ls)
    first = [(f1.m - s) for (al, be), (s, _) in f1.slopes.items()
             if sum(al) == 1 and np.isfinite(s)]
    c = 0.37 + 0.21j
    f2 = fit_symbol_class(invert_symbol(builtin("D3_plus_c", T, c)).symbol)
    f3 = fit_symbol_class(parametrix([Ls], 0).symbol)
    ok = (abs(f1.m - 2) <= 0.1 and abs(f1.rho - 1) <= 0.15 and min(first) >= 1 - 0.15
          and abs(f2.m) <= 0.1 and abs(f2.rho) <= 0.1
          and abs(f3.m + 1) <= 0.1 and abs(f3.rho - 0.5) <= 0.1)
    report(9, ok, f"SubLap m={f1.m:.3f} rho={f1.rho:.3f} (first-difference drops "
                  f"{', '.join(f'{d:.2f}' for d in first)}); (D3+c)^-1 m={f2.m:.3f} "
                  f"rho={f2.rho:.3f}; SubLap parametrix m={f3.m:.3f} rho={f3.rho:.3f}")


# 10 --------------------------------------------------------------------------

def test_criterion_10_banding():
    expected = {"I": 0, "D1": 1, "D2": 1, "D3": 0, "d0": 0, "d+": 1, "d-": 1, "Lap": 0,
                "SubLap": 0, "Heat": 0, "Schrodinger+": 0, "Schrodinger-": 0, "DAlembert": 0,
                "P": 2, "D3_plus_c": 0, "dXk_plus_c": 0, "cubic": 0}
    assert set(expected) == set(CATALOG)
    T = 40
    wrong, decay_ok = [], True
    for name, w in expected.items():
        s = builtin(name, T, 0.3 + 0.2j if CATALOG[name].params else 0.0,
                    2 if "k" in CATALOG[name].params else 1)
        if bandwidth(s) != w:
            wrong.append(f"{name}:{bandwidth(s)}")
        decay_ok = decay_ok and offdiag_decay_check(s, 4)["finite"]
    report(10, not wrong and decay_ok,
           f"{len(expected)} catalog symbols banded as expected; mismatches {wrong or 'none'}; "
           f"weighted decay finite: {decay_ok}")


# 11 --------------------------------------------------------------------------

def test_criterion_11_admissibility():
    tri, qij = admissibility_report(family_tri()), admissibility_report(family_qij())
    tor = torus_admissibility(2, 32)
    ok = (tri.admissible and not tri.strongly_admissible and (-1.0, 0.0, 0.0, 0.0) in tri.common_zeros
          and qij.strongly_admissible and tor["strongly_admissible"])
    report(11, ok, f"tri: admissible={tri.admissible} strong={tri.strongly_admissible} zeros="
                   f"{list(tri.common_zeros)}; qij strong={qij.strongly_admissible}; "
                   f"torus strong={tor['strongly_admissible']}")


# 12 --------------------------------------------------------------------------

def test_criterion_12_torus():
    d = torus_difference(torus_symbol("ddx_plus_c", 64, c=0.5), 0)
    f1 = torus_fit(torus_symbol("ddx_plus_c", 256, c=0.5))
    f2 = torus_fit(torus_symbol("one_plus_xi2", 256))
    f3 = torus_fit(torus_symbol("constant", 64, c=2.0))
    ok = (np.allclose(d.values, 1j) and abs(f1.m - 1) < 0.05 and abs(f1.rho - 1) < 0.05
          and abs(f2.m - 2) < 0.05 and abs(f2.rho - 1) < 0.05 and abs(f3.m) < 1e-9)
    report(12, ok, f"d/dx + c: Delta a = i, m={f1.m:.3f} rho={f1.rho:.3f}; 1+xi^2: m={f2.m:.3f} "
                   f"rho={f2.rho:.3f}; constant: m={f3.m:.1f}")


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
