"""Difference operators on symbol sequences, the Leibniz formula and Taylor frames.

A difference operator Delta_q multiplies the convolution kernel by a function
q vanishing at e.  On the Fourier side it couples neighbouring degrees:
writing q = sum_lam (2 lam + 1) tr(t^lam qhat(lam)) and using
t^lam_{ab}(y) = (-1)^{b-a} t^lam_{-b,-a}(y^{-1}),

    (Delta_q sigma)(l)_{mn} = sum_{lam,a,b} (2 lam + 1) qhat(lam)_{ba} (-1)^{b-a}
        sum_J C^{J,m-b}_{lam,-b; l,m} C^{J,n-a}_{lam,-a; l,n} sigma(J)_{m-b, n-a}.

The four first-order differences D_ij come from q_ij = t^{1/2}_{ij} - delta_ij,
with matrix labels 1 <-> -1/2 and 2 <-> +1/2.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as iproduct
import math

import numpy as np
from scipy import optimize

from .harmonic import FourierCoefficients, apply_word, multiply, forward, inverse, _grid
from .su2rep import (BandLimitError, cg, cg_half, field_word_matrix, index_range,
                     euler_to_quat_array, random_quaternions)
from .symbolspace import (LeftInvariantSymbol, XDependentSymbol, as_terms, from_terms,
                          kernel_of, symbol_from_kernel, x_derivative, zero_symbol)

LABEL = {1: -1, 2: 1}  # matrix label -> doubled index


def word_at_identity(c, word):
    """(X_{w1}...X_{wk} f)(e) for f given by Fourier coefficients."""
    return complex(sum((tl + 1) * np.trace(field_word_matrix(word, tl) @ b)
                       for tl, b in c.blocks.items() if np.any(b)))


def _vanishing_order(q, max_order=4, tol=1e-9):
    if q.band(tol) < 0:
        return None
    for k in range(max_order + 1):
        for word in iproduct((1, 2, 3), repeat=k):
            if abs(word_at_identity(q, word)) > tol:
                return k
    return max_order + 1


@dataclass(frozen=True, eq=False)
class DifferenceOp:
    q: FourierCoefficients
    order: int
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def width(self):
        """Coupling width in doubled degree."""
        return max(self.q.band(1e-14), 0)

    @property
    def valid(self):
        return self.order is None or self.order >= 1

    def _entries(self):
        if "entries" not in self._cache:
            out = []
            for tlam, blk in self.q.blocks.items():
                idx = index_range(tlam)
                for r, tb in enumerate(idx):
                    for s, ta in enumerate(idx):
                        v = blk[r, s]
                        if abs(v) > 1e-15:
                            sign = -1 if ((tb - ta) // 2) % 2 else 1
                            out.append((tlam, ta, tb, (tlam + 1) * v * sign))
            self._cache["entries"] = out
        return self._cache["entries"]

    def couplings(self, tl):
        """List of (tJ, coeff, A, rows, B, cols) contributions to block tl."""
        key = ("c", tl)
        if key in self._cache:
            return self._cache[key]
        ms = index_range(tl)
        out = []
        for tlam, ta, tb, c in self._entries():
            for tJ in range(abs(tl - tlam), tl + tlam + 1, 2):
                A = np.array([_cgc(tlam, -tb, tl, tm, tJ) for tm in ms])
                B = np.array([_cgc(tlam, -ta, tl, tn, tJ) for tn in ms])
                rows = (ms - tb + tJ) // 2
                cols = (ms - ta + tJ) // 2
                A[(rows < 0) | (rows > tJ)] = 0.0
                B[(cols < 0) | (cols > tJ)] = 0.0
                if not (np.any(A) and np.any(B)):
                    continue
                rows = np.clip(rows, 0, tJ)
                cols = np.clip(cols, 0, tJ)
                out.append((tJ, c, A, rows, B, cols))
        self._cache[key] = out
        return out

    def apply_blocks(self, blocks, twice_max):
        out = {}
        for tl in range(twice_max + 1):
            acc = np.zeros((tl + 1, tl + 1), complex)
            for tJ, c, A, rows, B, cols in self.couplings(tl):
                if tJ > twice_max:
                    continue
                acc += c * (A[:, None] * B[None, :]) * blocks[tJ][np.ix_(rows, cols)]
            out[tl] = acc
        return out

    def __call__(self, sigma):
        return apply(self, sigma)


def _cgc(tlam, tmu, tl, tm, tJ):
    """<lam mu; l m | J, mu+m>, closed form when lam = 1/2."""
    if tlam == 1:
        # ordering (l, 1/2) differs by a sign that cancels in the products used here
        return cg_half(tl, tm, tmu, tJ)
    return cg(tlam, tmu, tl, tm, tJ, tm + tmu)


def make_difference(q, name=""):
    """Difference operator of a band-limited q; order 0 means q(e) != 0 (flagged invalid)."""
    return DifferenceOp(q, _vanishing_order(q), name)


def apply(d, sigma):
    """(Delta_q sigma)(l); blocks within the coupling width of the edge are flagged."""
    w = d.width
    if isinstance(sigma, XDependentSymbol):
        return XDependentSymbol(tuple((c, apply(d, b)) for c, b in sigma.terms))
    if sigma.twice_max < w:
        raise BandLimitError("symbol band is below the coupling width")
    blocks = d.apply_blocks(sigma.blocks, sigma.twice_max)
    return LeftInvariantSymbol(blocks, sigma.twice_max, max(sigma.twice_reliable - w, 0))


def q_function(i, j):
    """q_ij = t^{1/2}_{ij} - delta_ij with labels i, j in {1, 2}."""
    blk = np.zeros((2, 2), complex)
    blk[j - 1, i - 1] = 0.5
    return FourierCoefficients({0: np.array([[-1.0 if i == j else 0.0]], complex), 1: blk}, 1)


@lru_cache(maxsize=None)
def D(i, j):
    return make_difference(q_function(i, j), f"D{i}{j}")


@lru_cache(maxsize=None)
def named(key):
    """Built-in differences: D11, D12, D21, D22, tri+, tri-, tri0."""
    if key in ("D11", "D12", "D21", "D22"):
        return D(int(key[1]), int(key[2]))
    if key == "tri-":
        return make_difference(q_function(1, 2), key)
    if key == "tri+":
        return make_difference(q_function(2, 1), key)
    if key == "tri0":
        return make_difference(q_function(1, 1) - q_function(2, 2), key)
    raise KeyError(f"unknown difference {key!r}")


def family_qij():
    return [D(1, 1), D(1, 2), D(2, 1), D(2, 2)]


def family_tri():
    return [named("tri+"), named("tri-"), named("tri0")]


FAMILIES = {"qij": family_qij, "tri": family_tri}


def apply_multi(family, alpha, sigma):
    """Delta^alpha sigma = Delta_1^{alpha_1} ... Delta_m^{alpha_m} sigma."""
    out = sigma
    for d, k in zip(family, alpha):
        for _ in range(k):
            out = apply(d, out)
    return out


def grand_difference(alpha, beta, sigma):
    """D_{alpha_1 beta_1} ... D_{alpha_k beta_k} sigma, labels in {1, 2}."""
    if len(alpha) != len(beta):
        raise ValueError("alpha and beta must have equal length")
    out = sigma
    for i, j in zip(reversed(alpha), reversed(beta)):
        out = apply(D(i, j), out)
    return out


def leibniz_residual(a, b, i, j, form="derived"):
    """D_ij(ab) - (D_ij a) b - a (D_ij b) - cross term.

    form="derived": cross term sum_k (D_kj a)(D_ik b), the form that holds for
    the Fourier and quantisation conventions used here.  form="literal": the
    transposed pairing sum_k (D_ik a)(D_kj b).
    """
    if not (isinstance(a, LeftInvariantSymbol) and isinstance(b, LeftInvariantSymbol)):
        raise TypeError("Leibniz formula is implemented for left-invariant symbols")
    res = apply(D(i, j), a @ b) - apply(D(i, j), a) @ b - a @ apply(D(i, j), b)
    for k in (1, 2):
        if form == "derived":
            res = res - apply(D(k, j), a) @ apply(D(i, k), b)
        elif form == "literal":
            res = res - apply(D(i, k), a) @ apply(D(k, j), b)
        else:
            raise ValueError(form)
    return res


def difference_via_kernel(q, sigma, grid=None):
    """Oracle: forward transform of q times the inverse-transformed kernel."""
    tb = sigma.twice_max + q.twice_max
    grid = _grid(tb) if grid is None else grid
    K = kernel_of(sigma, grid)
    qv = inverse(q, grid)
    prod = type(K)(K.grid, tuple((c, R * qv) for c, R in K.terms), K.twice_max)
    from .su2rep import HalfInt
    return symbol_from_kernel(prod, HalfInt(sigma.twice_max)).symbol


# --- Taylor frame ----------------------------------------------------------

def multi_indices(m, top):
    """Multi-indices in N^m with |alpha| <= top, graded then lexicographic."""
    out = []
    for k in range(top + 1):
        for a in iproduct(range(k + 1), repeat=m):
            if sum(a) == k:
                out.append(a)
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def factorial(alpha):
    return math.prod(math.factorial(k) for k in alpha)


def pbw_words(top):
    """Words X1^a X2^b X3^c with a + b + c <= top."""
    return [(1,) * e[0] + (2,) * e[1] + (3,) * e[2] for e in multi_indices(3, top)]


@dataclass(frozen=True, eq=False)
class TaylorFrame:
    qs: tuple  # FourierCoefficients
    order: int
    alphas: tuple
    words: tuple
    coeffs: np.ndarray  # (len(alphas), len(words)); d^(alpha) = sum_s C[alpha, s] X^{P_s}
    family: tuple = ()

    def derivative_at_e(self, f, alpha):
        k = self.alphas.index(tuple(alpha))
        return sum(self.coeffs[k, s] * word_at_identity(f, w)
                   for s, w in enumerate(self.words) if self.coeffs[k, s] != 0)

    def monomial(self, alpha):
        return _power(self.qs, tuple(alpha))

    def expand(self, f, x):
        """Taylor polynomial sum_{|alpha|<N} q^alpha(x) d^(alpha) f(e) / alpha! at quaternions x."""
        out = np.zeros(np.asarray(x).shape[:-1], complex)
        for a in self.alphas:
            out += self.monomial(a).evaluate(x) * self.derivative_at_e(f, a) / factorial(a)
        return out

    def antipode_derivative(self, sym, alpha):
        """S(d^(alpha)) applied in x: sum_s C[alpha, s] (-1)^{|P_s|} X^{reversed P_s} sym."""
        k = self.alphas.index(tuple(alpha))
        out = None
        for s, w in enumerate(self.words):
            c = self.coeffs[k, s]
            if abs(c) < 1e-14:
                continue
            term = x_derivative(sym, tuple(reversed(w))) * (c * (-1) ** len(w))
            out = term if out is None else out + term
        if out is None:
            return zero_symbol(sym.twice_max).with_reliable(sym.twice_reliable)
        return out


def _power(qs, alpha, _cache={}):
    key = (tuple(id(q) for q in qs), alpha)
    if key in _cache:
        return _cache[key][1]
    if sum(alpha) == 0:
        out = FourierCoefficients.constant(1.0)
    else:
        i = max(k for k, a in enumerate(alpha) if a > 0)
        lower = list(alpha)
        lower[i] -= 1
        out = multiply(_power(qs, tuple(lower)), qs[i])
    _cache[key] = (qs, out)
    return out


def _as_q(q):
    return q.q if isinstance(q, DifferenceOp) else q


def taylor_frame(qs, N):
    """Operators d^(alpha), |alpha| <= N-1, with sum_alpha q^alpha d^(alpha) f(e)/alpha! Taylor-exact."""
    family = tuple(q for q in qs if isinstance(q, DifferenceOp))
    qs = tuple(_as_q(q) for q in qs)
    alphas = tuple(multi_indices(len(qs), N - 1))
    words = tuple(pbw_words(N - 1))
    Q = np.array([[word_at_identity(_power(qs, a), w) for a in alphas] for w in words])
    QD = Q / np.array([factorial(a) for a in alphas])[None, :]
    if np.linalg.matrix_rank(QD, tol=1e-9) < len(words):
        raise ValueError("frame derivatives are singular: family not admissible")
    C = np.linalg.pinv(QD)
    C[np.abs(C) < 1e-13] = 0.0
    return TaylorFrame(qs, N, alphas, words, C, family)


# --- admissibility -------------------------------------------------------

@dataclass(frozen=True)
class AdmissibleFamily:
    ops: tuple
    differentials: np.ndarray
    rank: int
    admissible: bool
    strongly_admissible: bool
    common_zeros: tuple  # quaternions as tuples


def admissibility_report(qs, n_grid=6, n_starts=12, tol=1e-9):
    """Rank of the differentials at e and a scan for common zeros of the family."""
    ops = tuple(q if isinstance(q, DifferenceOp) else make_difference(q) for q in qs)
    fs = [d.q for d in ops]
    dq = np.array([[word_at_identity(f, (k,)) for k in (1, 2, 3)] for f in fs])
    rank = int(np.linalg.matrix_rank(dq, tol=tol))
    nonzero_at_e = any(abs(f.at_identity()) > tol for f in fs)
    admissible = (rank == 3 and all(np.linalg.norm(r) > tol for r in dq)
                  and not nonzero_at_e)
    zeros = common_zeros(fs, n_grid=n_grid, n_starts=n_starts)
    strong = admissible and len(zeros) == 1 and np.allclose(zeros[0], (1, 0, 0, 0), atol=1e-6)
    return AdmissibleFamily(ops, dq, rank, admissible, strong, tuple(zeros))


def common_zeros(fs, n_grid=6, n_starts=12, value_tol=1e-12, merge_tol=1e-5):
    """Common zeros on S^3: dense grid scan, then local minimisation of sum |f_j|^2."""
    grid = _grid(n_grid)
    pts = euler_to_quat_array(grid.nodes().reshape(-1, 3))
    rng = np.random.default_rng(0)
    pts = np.concatenate([pts, random_quaternions(rng, 2000)])

    def F(v):
        x = v / np.linalg.norm(v)
        return float(sum(abs(f.evaluate(x)) ** 2 for f in fs))

    vals = sum(np.abs(f.evaluate(pts)) ** 2 for f in fs)
    starts = []
    for p in pts[np.argsort(vals)]:
        # spread the starting points over separated basins
        if all(np.linalg.norm(p - s) > 0.3 for s in starts):
            starts.append(p)
        if len(starts) == n_starts:
            break
    found = []
    for s in starts:
        r = optimize.minimize(F, s, method="BFGS", options={"gtol": 1e-12})
        x = r.x / np.linalg.norm(r.x)
        if F(x) > value_tol:
            continue
        if not any(np.linalg.norm(x - y) < merge_tol for y in found):
            found.append(x)
    found.sort(key=lambda x: -x[0])
    return [tuple(float(round(v, 6)) + 0.0 for v in x) for x in found]
