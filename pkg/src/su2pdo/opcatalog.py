"""Built-in operators on SU(2), exact classifications, null distributions, Pell numbers.

Conventions: D_k = X_k (left-invariant fields of the Y_k), d0 = i D3,
d+ = i D1 - D2, d- = i D1 + D2.  Diagonal symbols are indexed by doubled
(l, m); their entries are kept as exact Gaussian rationals so singular sets
are decided without floating-point equality.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .harmonic import FourierCoefficients
from .su2rep import HalfInt, as_twice, index_range
from .symbolspace import DifferentialOperator, LeftInvariantSymbol, apply_blocks


class QI:
    """Exact Gaussian rational re + i im."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re, self.im = Fraction(re), Fraction(im)

    @classmethod
    def of(cls, z):
        if isinstance(z, QI):
            return z
        z = complex(z)
        return cls(Fraction(z.real), Fraction(z.imag))

    def __add__(self, o):
        o = QI.of(o)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-QI.of(o))

    def __mul__(self, o):
        o = QI.of(o)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = QI(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, o):
        if isinstance(o, (int, float, complex, Fraction, QI)):
            o = QI.of(o) if not isinstance(o, Fraction) else QI(o)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def abs2(self):
        return self.re ** 2 + self.im ** 2

    def __repr__(self):
        return f"QI({self.re}, {self.im})"


I_ = QI(0, 1)


def _ml(tl, tm):
    return Fraction(tm, 2), Fraction(tl, 2)


# --- operators ---------------------------------------------------------------

def _op(*terms):
    return DifferentialOperator(tuple((None, w, complex(s)) for w, s in terms))


def _diag_symbol(fn, twice_max):
    """Left-invariant diagonal symbol from an exact entry function (tl, tm) -> QI."""
    blocks = {tl: np.diag([complex(fn(tl, tm)) for tm in index_range(tl)])
              for tl in range(twice_max + 1)}
    return LeftInvariantSymbol(blocks, twice_max, exact=fn)


def _d3c(c):
    c = QI.of(c)
    return lambda tl, tm: c - I_ * _ml(tl, tm)[0]


def _dxk(k, c):
    c = QI.of(c)
    return lambda tl, tm: (-I_ * _ml(tl, tm)[0]) ** k + c


def _lap(tl, tm):
    m, l = _ml(tl, tm)
    return QI(-l * (l + 1))


def _sublap(tl, tm):
    m, l = _ml(tl, tm)
    return QI(m * m - l * (l + 1))


def _heat(tl, tm):
    m, l = _ml(tl, tm)
    return QI(-m * m + l * (l + 1), -m)


def _schrodinger(sign, c=0):
    c = QI.of(c)
    return lambda tl, tm: c + QI(sign * _ml(tl, tm)[0] - _ml(tl, tm)[0] ** 2
                                 + _ml(tl, tm)[1] * (_ml(tl, tm)[1] + 1))


def _dalembert(tl, tm):
    m, l = _ml(tl, tm)
    return QI(-2 * m * m + l * (l + 1))


def _cubic(tl, tm):
    m, l = _ml(tl, tm)
    return QI(-2 * m ** 3 + l * (l + 1))


def _identity(tl, tm):
    return QI(1)


LAP_OP = _op(((1, 1), 1), ((2, 2), 1), ((3, 3), 1))
SUBLAP_OP = _op(((1, 1), 1), ((2, 2), 1))


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    operator: object  # callable (c, k) -> DifferentialOperator
    exact: object = None  # callable (c, k) -> (tl, tm) -> QI, diagonal entries only
    order: int = 1
    elliptic: bool = False
    hypoelliptic: object = None  # bool or description of the condition on c
    hypo_params: tuple = None  # (m, m0, rho, delta) for the check
    provenance: str = ""
    params: tuple = ()

    def build(self, twice_max, c=0.0, k=1):
        if self.exact is not None:
            return _diag_symbol(self.exact(c, k), twice_max)
        return self.operator(c, k).symbol(twice_max)


def _entry(name, op, exact=None, **kw):
    return name, CatalogEntry(name, op, exact, **kw)


CATALOG = dict([
    _entry("I", lambda c, k: _op(((), 1)), lambda c, k: _identity, order=0, elliptic=True,
           hypoelliptic=True, provenance="identity"),
    _entry("D1", lambda c, k: _op(((1,), 1)), provenance="left-invariant field X1"),
    _entry("D2", lambda c, k: _op(((2,), 1)), provenance="left-invariant field X2"),
    _entry("D3", lambda c, k: _op(((3,), 1)), lambda c, k: _d3c(0),
           provenance="diagonal -i m"),
    _entry("d0", lambda c, k: _op(((3,), 1j)), lambda c, k: lambda tl, tm: QI(_ml(tl, tm)[0]),
           provenance="d0 = i D3, diagonal m"),
    _entry("d+", lambda c, k: _op(((1,), 1j), ((2,), -1)), provenance="d+ = i D1 - D2"),
    _entry("d-", lambda c, k: _op(((1,), 1j), ((2,), 1)), provenance="d- = i D1 + D2"),
    _entry("Lap", lambda c, k: LAP_OP, lambda c, k: _lap, order=2, elliptic=True,
           hypoelliptic=True, hypo_params=(2, 2, 1.0, 0.0),
           provenance="Casimir, diagonal -l(l+1)"),
    _entry("SubLap", lambda c, k: SUBLAP_OP, lambda c, k: _sublap, order=2, hypoelliptic=True,
           hypo_params=(2, 1, 0.5, 0.0), provenance="D1^2 + D2^2, diagonal m^2 - l(l+1)"),
    _entry("Heat", lambda c, k: _op(((3,), 1), ((1, 1), -1), ((2, 2), -1)),
           lambda c, k: _heat, order=2, hypoelliptic=True, hypo_params=(2, 1, 0.5, 0.0),
           provenance="D3 - D1^2 - D2^2, diagonal -i m - m^2 + l(l+1)"),
    _entry("Schrodinger+", lambda c, k: _op(((3,), 1j), ((1, 1), -1), ((2, 2), -1), ((), c)),
           lambda c, k: _schrodinger(1, c), order=2, hypoelliptic="c not an integer <= 0",
           hypo_params=(2, 1, 0.5, 0.0), provenance="i D3 - D1^2 - D2^2 + c"),
    _entry("Schrodinger-", lambda c, k: _op(((3,), -1j), ((1, 1), -1), ((2, 2), -1), ((), c)),
           lambda c, k: _schrodinger(-1, c), order=2, hypoelliptic="c not an integer <= 0",
           hypo_params=(2, 1, 0.5, 0.0), provenance="-i D3 - D1^2 - D2^2 + c"),
    _entry("DAlembert", lambda c, k: _op(((3, 3), 1), ((1, 1), -1), ((2, 2), -1)),
           lambda c, k: _dalembert, order=2, hypoelliptic=False,
           provenance="D3^2 - D1^2 - D2^2, diagonal -2m^2 + l(l+1)"),
    _entry("P", lambda c, k: _op(((1, 1), 1), ((2, 2), -1)), order=2, hypoelliptic=False,
           provenance="D1^2 - D2^2, band 2"),
    _entry("D3_plus_c", lambda c, k: _op(((3,), 1), ((), c)), lambda c, k: _d3c(c),
           hypoelliptic="i c not in Z/2", provenance="D3 + c, diagonal c - i m", params=("c",)),
    _entry("dXk_plus_c", lambda c, k: _op(((3,) * k, 1), ((), c)), lambda c, k: _dxk(k, c),
           order=None, hypoelliptic="c not in -(-i)^k (Z/2)^k",
           provenance="D3^k + c, diagonal (-i m)^k + c", params=("c", "k")),
    _entry("cubic", lambda c, k: _op(((3, 3, 3), 2j), ((1, 1), -1), ((2, 2), -1),
                                     ((3, 3), -1)),
           lambda c, k: _cubic, order=3, hypoelliptic=True,
           provenance="2i D3^3 - Lap, diagonal -2m^3 + l(l+1)"),
])

ALIASES = {"d−": "d-", "Schrodinger−": "Schrodinger-", "W": "DAlembert", "SubLaplacian": "SubLap",
           "Laplacian": "Lap", "H": "Heat"}


def entry(name):
    key = ALIASES.get(name, name)
    if key not in CATALOG:
        raise KeyError(f"unknown catalog entry {name!r}")
    return CATALOG[key]


def builtin(name, twice_max, c=0.0, k=1):
    """Exact symbol of a catalog operator up to doubled degree twice_max."""
    return entry(name).build(twice_max, c, k)


def operator(name, c=0.0, k=1):
    return entry(name).operator(c, k)


def p_closed_form(tl):
    """Block of D1^2 - D2^2 from its closed form (entries (m, m +- 2))."""
    l = tl / 2
    ms = index_range(tl) / 2
    B = np.zeros((tl + 1, tl + 1))
    for a, m in enumerate(ms):
        for b, n in enumerate(ms):
            if abs(m - (n - 2)) < 1e-12:
                B[a, b] += np.sqrt((l + n) * (l + n - 1) * (l - n + 2) * (l - n + 1))
            if abs(m - 2 - n) < 1e-12:
                B[a, b] += np.sqrt((l + m) * (l + m - 1) * (l - m + 2) * (l - m + 1))
    return -B / 2


# --- classification ----------------------------------------------------------

@dataclass
class GHVerdict:
    family: str
    c: complex
    hypoelliptic: bool
    certificate: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)  # (twice_l, twice_m)

    def to_dict(self):
        return {"family": self.family, "c": [self.c.real, self.c.imag],
                "hypoelliptic": self.hypoelliptic, "certificate": self.certificate,
                "witnesses": [{"twice_ell": a, "twice_m": b} for a, b in self.witnesses]}


def _dist_to_half_integers(z):
    """Distance from a complex number to Z/2."""
    re = z.real
    near = round(2 * re) / 2
    return math.hypot(re - near, z.imag)


def _integer_root(n, k):
    """Integer r with r^k = n, or None."""
    if n == 0:
        return 0
    if n < 0:
        if k % 2 == 0:
            return None
        r = _integer_root(-n, k)
        return None if r is None else -r
    r = round(n ** (1.0 / k))
    for s in (r - 1, r, r + 1):
        if s >= 0 and s ** k == n:
            return s
    return None


def _scan_witnesses(fn, twice_lmax):
    return [(tl, int(tm)) for tl in range(twice_lmax + 1) for tm in index_range(tl)
            if fn(tl, int(tm)) == 0]


def gh_classify(name, c=0.0, k=1, twice_lmax=64):
    """Exact global hypoellipticity verdict with witnesses (singular (2l, 2m)) up to twice_lmax."""
    key = ALIASES.get(name, name)
    c = complex(c)
    cq = QI.of(c)
    if key == "D3_plus_c":
        z = QI(0, 1) * cq  # i c
        singular = z.im == 0 and (2 * z.re).denominator == 1
        cert = {"rule": "i c in Z/2", "i_c": [float(z.re), float(z.im)]}
        if not singular:
            d = _dist_to_half_integers(1j * c)
            cert.update(dist=d, inverse_bound=1.0 / d)
        else:
            cert["twice_m"] = int(-2 * z.re)
        wit = _scan_witnesses(_d3c(c), twice_lmax) if singular else []
        return GHVerdict(key, c, not singular, cert, wit)
    if key == "dXk_plus_c":
        w = -cq * (I_ ** k)  # singular iff w = m^k with m in Z/2
        root = None
        if w.im == 0:
            n = w.re * 2 ** k
            if n.denominator == 1:
                root = _integer_root(int(n), k)
        singular = root is not None
        cert = {"rule": "c in -(-i)^k (Z/2)^k", "k": k}
        if singular:
            cert["twice_m"] = int(root)
            wit = _scan_witnesses(_dxk(k, c), twice_lmax)
        else:
            ms = np.arange(-twice_lmax, twice_lmax + 1) / 2
            vals = np.abs((-1j * ms) ** k + c)
            cert.update(min_abs_symbol=float(vals.min()), inverse_bound=float(1 / vals.min()))
            wit = []
        return GHVerdict(key, c, not singular, cert, wit)
    if key in ("Schrodinger+", "Schrodinger-"):
        singular = cq.im == 0 and cq.re.denominator == 1 and cq.re <= 0
        cert = {"rule": "c integer <= 0"}
        if not singular:
            d = abs(c - min(0, round(c.real)))  # distance to the non-positive integers
            cert.update(dist=d, inverse_bound=1.0 / d)
        sign = 1 if key.endswith("+") else -1
        wit = _scan_witnesses(_schrodinger(sign, c), twice_lmax) if singular else []
        return GHVerdict(key, c, not singular, cert, wit)
    if key == "DAlembert":
        if c != 0:
            raise ValueError("DAlembert is classified for c = 0 only")
        seq = pell_ells_upto(twice_lmax // 2)
        wit = [(2 * l, s * 2 * m) for l, m in zip(seq.ells, seq.ms) for s in (-1, 1)]
        return GHVerdict(key, c, False, {"rule": "l(l+1)/2 a square (Pell)",
                                         "ells": list(seq.ells)}, wit)
    if key == "cubic":
        if c != 0:
            raise ValueError("cubic is classified for c = 0 only")
        chk = cube_check(twice_lmax // 2)
        return GHVerdict(key, c, chk["only_one"] and chk["halfint_regular"],
                         {"rule": "l(l+1)/2 a cube only for l = 1", **chk},
                         _scan_witnesses(_cubic, twice_lmax))
    raise KeyError(f"unknown family {name!r}")


# --- number theory -----------------------------------------------------------

@dataclass(frozen=True)
class PellSequence:
    ells: tuple
    ms: tuple


def pell_ells(K):
    """l_k = floor((3 + 2 sqrt 2)^k / 4) and m_k with 2 m_k^2 = l_k (l_k + 1), k = 1..K."""
    if K < 1:
        raise ValueError("K must be at least 1")
    ells, ms = [], []
    a, b = 1, 0
    for _ in range(K):
        a, b = 3 * a + 4 * b, 2 * a + 3 * b  # (a + b sqrt2)(3 + 2 sqrt2)
        l = (a + math.isqrt(2 * b * b)) // 4
        t = l * (l + 1)
        m = math.isqrt(t // 2)
        if 2 * m * m != t:
            raise ArithmeticError("Pell identity failed")
        ells.append(l)
        ms.append(m)
    return PellSequence(tuple(ells), tuple(ms))


def pell_ells_upto(lmax):
    k = 1
    while pell_ells(k).ells[-1] <= lmax:
        k += 1
    return pell_ells(k - 1) if k > 1 else PellSequence((), ())


def pell_brute_force(lmax):
    """Integer l <= lmax with l(l+1)/2 a perfect square."""
    return [l for l in range(1, lmax + 1) if math.isqrt(l * (l + 1) // 2) ** 2 * 2 == l * (l + 1)]


def halfint_gap_check(L, integer=False):
    """min |l(l+1) - 2 m^2| over non-integer (or integer) l <= L, as a Fraction."""
    tL = as_twice(L)
    best = None
    for tl in range(0 if integer else 1, tL + 1, 2):
        for tm in index_range(tl):
            v = abs(_dalembert(tl, int(tm)).re)
            best = v if best is None else min(best, v)
    return best


def cube_check(L):
    """Triangular cubes up to L and the singular set of 2i D3^3 - Lap."""
    lmax = int(L)
    cubes = []
    for l in range(1, lmax + 1):
        t = l * (l + 1) // 2
        if _integer_root(t, 3) is not None:
            cubes.append(l)
    tL = as_twice(L)
    singular = [(tl, int(tm)) for tl in range(tL + 1) for tm in index_range(tl)
                if _cubic(tl, int(tm)) == 0]
    halfint_regular = all(tl % 2 == 0 for tl, _ in singular)
    nontrivial = [s for s in singular if s[0] > 2]
    return {"cube_ells": cubes, "only_one": cubes == [1] and not nontrivial,
            "singular": [list(s) for s in singular], "halfint_regular": halfint_regular}


# --- null distributions --------------------------------------------------------

def null_distribution(name, K):
    """Coefficients of a non-smooth distribution in the kernel of the named operator."""
    blocks = {}
    if name == "m00":
        tmax = 2 * K
        for tl in range(0, tmax + 1, 2):
            b = np.zeros((tl + 1, tl + 1), complex)
            b[tl // 2, tl // 2] = 1.0
            blocks[tl] = b
    elif name in ("schrodinger+", "schrodinger-"):
        tmax = 2 * K
        for tl in range(tmax + 1):
            b = np.zeros((tl + 1, tl + 1), complex)
            i = 0 if name.endswith("+") else tl  # m = -l for S+, m = +l for S-
            b[i, i] = 1.0
            blocks[tl] = b
    elif name == "dalembert":
        seq = pell_ells(K)
        tmax = 2 * seq.ells[-1]
        for l, m in zip(seq.ells, seq.ms):
            tl = 2 * l
            b = np.zeros((tl + 1, tl + 1), complex)
            i = (2 * m + tl) // 2
            b[i, i] = 1.0
            blocks[tl] = b
    else:
        raise KeyError(f"unknown null distribution {name!r}")
    return FourierCoefficients.from_blocks(blocks, tmax)


NULL_OPERATOR = {"m00": "D3_plus_c", "schrodinger+": "Schrodinger+",
                 "schrodinger-": "Schrodinger-", "dalembert": "DAlembert"}


def annihilation_residual(sigma, f):
    """max |sigma_k(l) fhat(l)| over terms and resolved blocks (Op(sigma) f = 0 iff all vanish)."""
    worst = 0.0
    for _, g in apply_blocks(sigma, f):
        worst = max(worst, max(float(np.max(np.abs(b))) for b in g.blocks.values()))
    return worst


def nonhypo_operator(a_coeffs):
    """D3^2 + a(x) D3."""
    return DifferentialOperator(((None, (3, 3), 1.0), (a_coeffs, (3,), 1.0)))


def nonhypo_witness(a_coeffs, K):
    """f with fhat(l)_00 = 1 for integer l <= K and the residual of (D3^2 + a D3) f."""
    f = null_distribution("m00", K)
    sigma = nonhypo_operator(a_coeffs).symbol(f.twice_max)
    return f, annihilation_residual(sigma, f)


def partial_sobolev_norms(f, s):
    """Sobolev norms of the partial sums f_{<=l} (doubled degree keys)."""
    from .harmonic import weight_twice
    out, acc = {}, 0.0
    for tl in range(f.twice_max + 1):
        b = f.blocks[tl]
        acc += (tl + 1) * weight_twice(tl) ** (2 * s) * float(np.sum(np.abs(b) ** 2))
        out[tl] = math.sqrt(acc)
    return out


def singular_set(sym, twice_lmax=None):
    """Exact singular (2l, 2m) of a diagonal catalog symbol."""
    if sym.exact is None:
        raise ValueError("symbol has no exact diagonal form")
    tmax = sym.twice_max if twice_lmax is None else twice_lmax
    return _scan_witnesses(sym.exact, tmax)


def singular_ells(sym, twice_lmax=None):
    return [HalfInt(tl) for tl in sorted({tl for tl, _ in singular_set(sym, twice_lmax)})]
