"""Composition, inversion, ellipticity and hypoellipticity checks, parametrices, class fits.

Class fits regress log sup_x |Delta^alpha d_x^beta sigma(x, l)|_op against
log <l> on the window l in [l_max / 4, edge-safe max].  Exact zeros are
skipped; a block sequence that vanishes identically reports slope -inf.

The asymptotic composition formula uses the Taylor expansion in q^alpha(y)
of y -> sigma_B(x y^{-1}), whose derivatives at e are the antipodes
S(X_{w1}...X_{wk}) = (-1)^k X_{wk}...X_{w1} of the frame derivatives.
"""
from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from .diffops import (apply_multi, factorial, family_qij, multi_indices, taylor_frame)
from .harmonic import weight_twice
from .su2rep import HalfInt, random_quaternions
from .symbolspace import (LeftInvariantSymbol, XDependentSymbol, field_symbol, identity,
                          op_norm, product, sup_norms, times_function, x_derivative,
                          zero_symbol)

DEFAULT_TOL = 0.15


def default_points(n=24, seed=7):
    """Fixed sample points (identity first) used for sup over x."""
    rng = np.random.default_rng(seed)
    return np.concatenate([[[1.0, 0.0, 0.0, 0.0]], random_quaternions(rng, n - 1)])


# --- composition -----------------------------------------------------------

def compose_exact(a, b):
    if not (isinstance(a, LeftInvariantSymbol) and isinstance(b, LeftInvariantSymbol)):
        raise TypeError("compose_exact needs left-invariant symbols; use compose_asymptotic")
    return a @ b


def left_field(k, sym):
    """Symbol of X_k o Op(sym): sigma_{X_k} sigma + X_k sigma."""
    return field_symbol(k, sym.twice_max) @ sym + x_derivative(sym, (k,))


def compose_differential(op, b):
    """Exact symbol of A o Op(b) for a DifferentialOperator A."""
    total = None
    for coeff, word, s in op.terms:
        out = b
        for k in reversed(word):
            out = left_field(k, out)
        out = out * s
        if coeff is not None:
            out = times_function(coeff, out)
        total = out if total is None else total + out
    return total


def compose_asymptotic(a, b, N, frame=None):
    """sum_{|alpha| < N} (Delta^alpha a)(S d^(alpha) b) / alpha!."""
    if frame is None:
        frame = taylor_frame(family_qij(), N)
    if N > frame.order:
        raise ValueError("Taylor frame order is below N")
    family = frame.family
    total = None
    for alpha in frame.alphas:
        if sum(alpha) >= N:
            continue
        da = apply_multi(family, alpha, a)
        db = frame.antipode_derivative(b, alpha)
        term = product(da, db) * (1.0 / factorial(alpha))
        total = term if total is None else total + term
    return total


# --- inversion -------------------------------------------------------------

@dataclass(frozen=True)
class Inverse:
    symbol: LeftInvariantSymbol
    singular: tuple  # doubled degrees

    @property
    def singular_ells(self):
        return [tl / 2 for tl in self.singular]


def block_is_singular(sym, tl, rel=1e-8):
    if sym.exact is not None:
        return any(sym.exact(tl, tm) == 0 for tm in range(-tl, tl + 1, 2))
    s = np.linalg.svd(sym.blocks[tl], compute_uv=False)
    return s[-1] <= rel * max(1.0, s[0])


def invert_symbol(a, rel=1e-8):
    """Blockwise inverse; singular blocks are reported and set to zero."""
    if not isinstance(a, LeftInvariantSymbol):
        raise TypeError("x-dependent symbols are inverted pointwise; use invert_at")
    blocks, singular = {}, []
    for tl in range(a.twice_max + 1):
        if block_is_singular(a, tl, rel):
            singular.append(tl)
            blocks[tl] = np.zeros_like(a.blocks[tl])
        else:
            blocks[tl] = np.linalg.inv(a.blocks[tl])
    return Inverse(LeftInvariantSymbol(blocks, a.twice_max, a.twice_reliable), tuple(singular))


def invert_at(a, points, tl, rel=1e-8):
    """Pointwise inverses sigma(x, l)^{-1} at sample points and a singularity flag."""
    M = a.evaluate(points, tl)
    s = np.linalg.svd(M, compute_uv=False)
    singular = bool(np.any(s[..., -1] <= rel * np.maximum(1.0, s[..., 0])))
    if singular:
        return None, True
    return np.linalg.inv(M), False


# --- fitting ---------------------------------------------------------------

def fit_window(twice_max, twice_reliable):
    lo = -(-twice_max // 4)
    if twice_reliable - lo < 2:
        raise ValueError("too few edge-safe blocks for a fit")
    return lo, twice_reliable


def power_slope(values, window, ref=None, zero_tol=1e-10):
    """Least-squares slope of log value against log <l>; -inf if all vanish.

    Values below zero_tol * ref[l] count as exact zeros (ref defaults to 1).
    """
    lo, hi = window
    tls = np.array([tl for tl in range(lo, hi + 1) if tl in values])
    v = np.array([values[tl] for tl in tls])
    r = np.ones_like(v) if ref is None else np.array([max(ref[tl], 1.0) for tl in tls])
    keep = v > zero_tol * r
    if keep.sum() < 2:
        return float("-inf"), 0.0
    x = np.log(weight_twice(tls[keep]))
    y = np.log(v[keep])
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(np.sqrt(res[0] / keep.sum())) if res.size else 0.0
    return float(coef[0]), resid


@dataclass
class ClassFit:
    m: float
    rho: float
    delta: float
    slopes: dict = field(default_factory=dict)  # (alpha, beta) -> (slope, residual)
    window: tuple = (0, 0)  # doubled degrees

    def to_dict(self):
        return {"m": self.m, "rho": self.rho, "delta": self.delta,
                "twice_window": list(self.window),
                "slopes": [{"alpha": list(a), "beta": list(b), "slope": _finite(s), "residual": r}
                           for (a, b), (s, r) in self.slopes.items()]}


def _words(depth):
    return [w for k in range(1, depth + 1) for w in iproduct((1, 2, 3), repeat=k)]


def _finite(x):
    return x if np.isfinite(x) else None


def fit_symbol_class(a, family=None, alpha_depth=2, beta_depth=None, points=None):
    """Fit (m, rho, delta) from decay of differences and x-derivatives."""
    family = family_qij() if family is None else family
    if beta_depth is None:
        beta_depth = 0 if isinstance(a, LeftInvariantSymbol) else 1
    points = default_points() if points is None else points
    alphas = [al for al in multi_indices(len(family), alpha_depth) if sum(al) > 0]
    betas = _words(beta_depth)
    width = max(d.width for d in family)
    window = fit_window(a.twice_max, a.twice_reliable - width * alpha_depth)
    rng = range(window[0], window[1] + 1)

    ref = sup_norms(a, rng, points)

    def slope(sym):
        return power_slope(sup_norms(sym, rng, points), window, ref)

    slopes = {((), ()): power_slope(ref, window)}
    m = slopes[((), ())][0]
    for al in alphas:
        slopes[(al, ())] = slope(apply_multi(family, al, a))
    for be in betas:
        db = x_derivative(a, be)
        slopes[((), be)] = slope(db)
        for al in alphas:
            if sum(al) + len(be) <= max(alpha_depth, beta_depth):
                slopes[(al, be)] = slope(apply_multi(family, al, db))
    rhos = [(m - slopes[(al, ())][0]) / sum(al) for al in alphas]
    rho = min(rhos) if rhos else 1.0
    if not np.isfinite(rho):
        rho = 1.0  # every difference vanishes
    deltas = [(slopes[((), be)][0] - m) / len(be) for be in betas
              if np.isfinite(slopes[((), be)][0])]
    delta = max([0.0] + deltas)
    return ClassFit(float(m), float(rho), float(delta), slopes, window)


# --- ellipticity / hypoellipticity ------------------------------------------

@dataclass
class EllipticityReport:
    verdict: bool
    constant: float
    slope: float
    singular_ells: list

    def to_dict(self):
        return {"verdict": self.verdict, "constant": _finite(self.constant),
                "slope": _finite(self.slope),
                "singular_ells": self.singular_ells}


def _inverse_norms(a, rng, points):
    norms, singular = {}, []
    for tl in rng:
        if isinstance(a, LeftInvariantSymbol):
            if block_is_singular(a, tl):
                singular.append(tl)
                continue
            norms[tl] = op_norm(np.linalg.inv(a.blocks[tl]))
        else:
            inv, sing = invert_at(a, points, tl)
            if sing:
                singular.append(tl)
                continue
            norms[tl] = float(np.max(op_norm(inv)))
    return norms, singular


def ellipticity_check(a, m, tol=DEFAULT_TOL, points=None):
    """|sigma^{-1}| <= C <l>^{-m} beyond a finite singular set."""
    points = default_points() if points is None else points
    window = fit_window(a.twice_max, a.twice_reliable)
    norms, singular = _inverse_norms(a, range(0, window[1] + 1), points)
    late = [tl for tl in singular if tl >= window[0]]
    s, _ = power_slope(norms, window)
    C = max((norms[tl] * weight_twice(tl) ** m for tl in range(window[0], window[1] + 1)
             if tl in norms), default=float("inf"))
    verdict = not late and s <= -m + tol
    return EllipticityReport(bool(verdict), float(C), float(s), [tl / 2 for tl in singular])


@dataclass
class HypoReport:
    verdict: bool
    invertible_from: HalfInt
    m0_fit: float
    ratios: list
    singular_ells: list
    checked: str = ""

    def to_dict(self):
        return {"verdict": self.verdict, "twice_invertible_from": self.invertible_from.twice,
                "m0_fit": _finite(self.m0_fit), "ratios": self.ratios,
                "singular_ells": self.singular_ells, "checked": self.checked}


def hypoellipticity_check(a, m, m0, rho, delta=0.0, family=None, depth=2,
                          tol=DEFAULT_TOL, points=None):
    """Invertibility beyond a finite set, |sigma^{-1}| <~ <l>^{-m0}, and ratio bounds."""
    if not (1 >= rho > delta >= 0) or m < m0:
        raise ValueError("need 1 >= rho > delta >= 0 and m >= m0")
    family = family_qij() if family is None else family
    points = default_points() if points is None else points
    width = max(d.width for d in family)
    window = fit_window(a.twice_max, a.twice_reliable - width * depth)
    rng = range(window[0], window[1] + 1)
    norms, singular = _inverse_norms(a, range(0, window[1] + 1), points)
    late = [tl for tl in singular if tl >= window[0]]
    inv_slope, _ = power_slope(norms, window)
    ok = not late and inv_slope <= -m0 + tol
    ratios = []
    if not late:
        xdep = isinstance(a, XDependentSymbol)
        betas = [()] + (_words(depth) if xdep else [])
        for be in betas:
            db = x_derivative(a, be)
            for al in multi_indices(len(family), depth):
                k = sum(al) + len(be)
                if k == 0 or k > depth:
                    continue
                da = apply_multi(family, al, db)
                vals = {}
                for tl in rng:
                    if isinstance(a, LeftInvariantSymbol):
                        r = np.linalg.inv(a.blocks[tl]) @ da.blocks[tl]
                        vals[tl] = op_norm(r)
                    else:
                        inv, _ = invert_at(a, points, tl)
                        vals[tl] = float(np.max(op_norm(inv @ da.evaluate(points, tl))))
                s, res = power_slope(vals, window)
                bound = -rho * sum(al) + delta * len(be)
                C = max(vals[tl] * weight_twice(tl) ** (-bound) for tl in rng)
                passed = s <= bound + tol
                ok = ok and passed
                ratios.append({"alpha": list(al), "beta": list(be), "slope": _finite(s),
                               "bound_exponent": bound, "constant": _finite(float(C)),
                               "passed": bool(passed)})
    inv_from = HalfInt(max(singular) + 1 if singular else 0)
    checked = (f"|alpha|+|beta| <= {depth}, twice-degree window {window}, "
               f"tolerance {tol}, {len(family)} differences")
    return HypoReport(bool(ok), inv_from, float(-inv_slope), ratios,
                      [tl / 2 for tl in singular], checked)


# --- parametrix ------------------------------------------------------------

@dataclass
class Parametrix:
    terms: list  # B_0, ..., B_N
    singular_ells: list

    @property
    def symbol(self):
        out = self.terms[0]
        for b in self.terms[1:]:
            out = out + b
        return out

    def partial(self, k):
        out = self.terms[0]
        for b in self.terms[1:k + 1]:
            out = out + b
        return out


def parametrix(parts, N, frame=None):
    """B_0 = sigma_{A_0}^{-1}, B_n = -B_0 sum (Delta^g A_j)(S d^(g) B_k)/g!, j+|g|+k = n, k < n."""
    if not isinstance(parts[0], LeftInvariantSymbol):
        raise NotImplementedError("principal part must be left-invariant")
    if frame is None:
        frame = taylor_frame(family_qij(), N + 1)
    if frame.order < N + 1:
        raise ValueError("Taylor frame order must exceed N")
    inv = invert_symbol(parts[0])
    B0 = inv.symbol
    terms = [B0]
    cache = {}

    def diff(j, g):
        if (j, g) not in cache:
            cache[(j, g)] = apply_multi(frame.family, g, parts[j])
        return cache[(j, g)]

    for n in range(1, N + 1):
        acc = None
        for k in range(n):
            for j in range(len(parts)):
                order = n - k - j
                if order < 0:
                    continue
                for g in frame.alphas:
                    if sum(g) != order:
                        continue
                    db = frame.antipode_derivative(terms[k], g)
                    term = product(diff(j, g), db) * (1.0 / factorial(g))
                    acc = term if acc is None else acc + term
        Bn = zero_symbol(B0.twice_max) if acc is None else product(B0, acc) * -1.0
        terms.append(Bn)
    return Parametrix(terms, inv.singular_ells)


def composition_residual(op, b):
    """sigma_{A o B} - I for a DifferentialOperator A."""
    return compose_differential(op, b) - identity(b.twice_max)


# --- off-diagonal decay ------------------------------------------------------

def bandwidth(a, tol=1e-12):
    w = 0
    for tl, b in a.blocks.items():
        scale = max(1.0, float(np.max(np.abs(b))))
        i, j = np.nonzero(np.abs(b) > tol * scale)
        if i.size:
            w = max(w, int(np.max(np.abs(i - j))))
    return w


def offdiag_decay_check(a, N, m=None, tol=DEFAULT_TOL):
    """sup (1+|i-j|)^N |sigma_ij| / <l>^m: bandwidth and growth of the per-l sup."""
    if not isinstance(a, LeftInvariantSymbol):
        raise TypeError("off-diagonal decay is checked for left-invariant symbols")
    if m is None:
        m = fit_symbol_class(a, alpha_depth=0).m
    window = fit_window(a.twice_max, a.twice_reliable)
    vals = {}
    for tl in range(window[1] + 1):
        b = a.blocks[tl]
        i, j = np.indices(b.shape)
        vals[tl] = float(np.max((1 + np.abs(i - j)) ** N * np.abs(b))) / weight_twice(tl) ** m
    growth, _ = power_slope(vals, window)
    finite = growth <= tol
    return {"bandwidth": bandwidth(a), "sup": max(vals.values()), "growth_slope": _finite(growth),
            "finite": bool(finite), "N": N, "m": m}
