"""Matrix-valued symbols, quantisation Op(sigma), kernels and conjugation.

A symbol is either left-invariant (one matrix per degree l) or x-dependent,
sigma(x, l) = sum_k f_k(x) sigma_k(l), with band-limited coefficient functions
f_k stored as FourierCoefficients.  Blocks are keyed by doubled degree.

Each symbol carries `twice_reliable`: blocks above it were computed from
truncated data (for example by a difference operator near the band edge)
and are excluded from fits and comparisons.
"""
from dataclasses import dataclass, field

import numpy as np

from .harmonic import (FourierCoefficients, GroupFunction, _grid, apply_word,
                       forward, inverse, multiply, translate_right)
from .su2rep import (BandLimitError, HalfInt, as_twice, euler_to_quat_array, field_matrix,
                     field_word_matrix, index_range, wigner_euler, wigner_quat)


@dataclass(frozen=True, eq=False)
class LeftInvariantSymbol:
    blocks: dict
    twice_max: int
    twice_reliable: int = None
    exact: object = field(default=None, repr=False)  # (tl, tm) -> exact diagonal entry

    kind = "left_invariant"

    def __post_init__(self):
        if self.twice_reliable is None or self.twice_reliable > self.twice_max:
            object.__setattr__(self, "twice_reliable", self.twice_max)

    @classmethod
    def from_function(cls, fn, twice_max, exact=None):
        return cls({tl: np.asarray(fn(tl), dtype=complex) for tl in range(twice_max + 1)},
                   twice_max, exact=exact)

    def block(self, tl):
        return self.blocks[tl]

    def with_reliable(self, twice_reliable):
        return LeftInvariantSymbol(self.blocks, self.twice_max,
                                   min(self.twice_reliable, twice_reliable))

    def truncate(self, twice_max):
        tmax = min(twice_max, self.twice_max)
        return LeftInvariantSymbol({tl: self.blocks[tl] for tl in range(tmax + 1)}, tmax,
                                   min(self.twice_reliable, tmax), self.exact)

    def map(self, fn, reliable=None):
        return LeftInvariantSymbol({tl: fn(tl, b) for tl, b in self.blocks.items()},
                                   self.twice_max,
                                   self.twice_reliable if reliable is None else reliable)

    def _zip(self, other, op):
        tmax = min(self.twice_max, other.twice_max)
        return LeftInvariantSymbol({tl: op(self.blocks[tl], other.blocks[tl])
                                    for tl in range(tmax + 1)}, tmax,
                                   min(self.twice_reliable, other.twice_reliable))

    def __add__(self, other):
        if isinstance(other, LeftInvariantSymbol):
            return self._zip(other, np.add)
        return add(self, other)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, s):
        return self.map(lambda tl, b: s * b)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, LeftInvariantSymbol):
            return self._zip(other, np.matmul)
        return product(self, other)

    def adjoint(self):
        return self.map(lambda tl, b: b.conj().T)

    def max_abs_diff(self, other, upto=None):
        tmax = min(self.twice_reliable, other.twice_reliable)
        if upto is not None:
            tmax = min(tmax, upto)
        return max(float(np.max(np.abs(self.blocks[tl] - other.blocks[tl])))
                   for tl in range(tmax + 1))

    def evaluate(self, x, tl):
        """Blocks broadcast over quaternions x (..., 4)."""
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.blocks[tl], x.shape[:-1] + self.blocks[tl].shape)


@dataclass(frozen=True, eq=False)
class XDependentSymbol:
    terms: tuple  # of (FourierCoefficients, LeftInvariantSymbol)

    kind = "x_dependent"

    @property
    def twice_max(self):
        return min(b.twice_max for _, b in self.terms)

    @property
    def twice_reliable(self):
        return min(b.twice_reliable for _, b in self.terms)

    @property
    def coeff_band(self):
        return max(c.twice_max for c, _ in self.terms)

    def block_terms(self, tl):
        return [(c, b.blocks[tl]) for c, b in self.terms]

    def evaluate(self, x, tl):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (tl + 1, tl + 1), complex)
        for c, b in self.terms:
            out += c.evaluate(x)[..., None, None] * b.blocks[tl]
        return out

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, (-1.0) * other)

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, s):
        return XDependentSymbol(tuple((c, s * b) for c, b in self.terms))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return product(self, other)

    def truncate(self, twice_max):
        return XDependentSymbol(tuple((c, b.truncate(twice_max)) for c, b in self.terms))

    def with_reliable(self, twice_reliable):
        return XDependentSymbol(tuple((c, b.with_reliable(twice_reliable))
                                      for c, b in self.terms))


def identity(twice_max):
    return LeftInvariantSymbol({tl: np.eye(tl + 1, dtype=complex)
                                for tl in range(twice_max + 1)}, twice_max)


def zero_symbol(twice_max):
    return LeftInvariantSymbol({tl: np.zeros((tl + 1, tl + 1), complex)
                                for tl in range(twice_max + 1)}, twice_max)


def field_symbol(k, twice_max):
    """Symbol of the left-invariant vector field X_k (dt^l(Y_k))."""
    return LeftInvariantSymbol({tl: np.array(field_matrix(k, tl))
                                for tl in range(twice_max + 1)}, twice_max)


def word_symbol(word, twice_max):
    return LeftInvariantSymbol({tl: field_word_matrix(word, tl)
                                for tl in range(twice_max + 1)}, twice_max)


def as_terms(sym):
    if isinstance(sym, LeftInvariantSymbol):
        return [(FourierCoefficients.constant(1.0), sym)]
    return list(sym.terms)


def _align(terms):
    tmax = min(b.twice_max for _, b in terms)
    rel = min(b.twice_reliable for _, b in terms)
    return [(c, b.truncate(tmax).with_reliable(rel)) for c, b in terms]


def from_terms(terms, compress=True, tol=1e-13):
    """Build a symbol from (coefficient, base) pairs, merging where possible."""
    terms = _align([t for t in terms if t[0].band() >= 0])
    if not terms:
        raise ValueError("empty symbol")
    if not compress:
        return XDependentSymbol(tuple(terms))
    cb = max(c.twice_max for c, _ in terms)
    F = np.array([c.to_vector(cb) for c, _ in terms])
    U, S, Vh = np.linalg.svd(F, full_matrices=False)
    keep = S > tol * max(S[0], 1e-300)
    bases = [b for _, b in terms]
    tmax = bases[0].twice_max
    rel = bases[0].twice_reliable
    rows = np.nonzero(keep)[0]
    coef = U[:, rows] * S[rows]
    mixed = {tl: np.tensordot(coef, np.stack([b.blocks[tl] for b in bases]), axes=(0, 0))
             for tl in range(tmax + 1)}
    out = []
    for k, r in enumerate(rows):
        g = FourierCoefficients.from_vector(Vh[r], cb)
        base = LeftInvariantSymbol({tl: mixed[tl][k] for tl in mixed}, tmax, rel)
        out.append(_normalise_term(g, base))
    if not out:
        return zero_symbol(tmax).with_reliable(rel)
    if len(out) == 1 and out[0][0].band(1e-14) == 0:
        c, b = out[0]
        return b * c.blocks[0][0, 0]
    return XDependentSymbol(tuple(_drop_zero_bases(out)) or (out[0],))


def _normalise_term(g, base):
    # trim coefficient to its numerical band
    band = max(g.band(1e-14), 0)
    return g.resize(band), base


def _drop_zero_bases(terms):
    return [(c, b) for c, b in terms
            if max(float(np.max(np.abs(x))) for x in b.blocks.values()) > 0]


def add(a, b):
    if isinstance(a, LeftInvariantSymbol) and isinstance(b, LeftInvariantSymbol):
        return a + b
    return from_terms(as_terms(a) + as_terms(b))


def product(a, b):
    """Pointwise (in x and l) matrix product sigma_a(x,l) sigma_b(x,l)."""
    if isinstance(a, LeftInvariantSymbol) and isinstance(b, LeftInvariantSymbol):
        return a @ b
    terms = []
    for ca, ba in as_terms(a):
        for cb, bb in as_terms(b):
            terms.append((_mul_coeff(ca, cb), ba @ bb))
    return from_terms(terms)


def _mul_coeff(f, g):
    if f.twice_max == 0:
        return g * f.blocks[0][0, 0]
    if g.twice_max == 0:
        return f * g.blocks[0][0, 0]
    return multiply(f, g)


def times_function(coeff, sym):
    """a(x) sigma(x, l)."""
    return from_terms([(_mul_coeff(coeff, c), b) for c, b in as_terms(sym)])


def x_derivative(sym, word):
    """Left-invariant x-derivative X_{w1}...X_{wk} applied to sigma(., l)."""
    if not word:
        return sym
    if isinstance(sym, LeftInvariantSymbol):
        return zero_symbol(sym.twice_max).with_reliable(sym.twice_reliable)
    terms = [(apply_word(c, word), b) for c, b in sym.terms]
    terms = [(c, b) for c, b in terms if c.band(1e-14) >= 0]
    if not terms:
        return zero_symbol(sym.twice_max).with_reliable(sym.twice_reliable)
    return from_terms(terms)


def op_norm(M):
    M = np.asarray(M)
    if M.ndim == 2:
        return float(np.linalg.norm(M, 2))
    return np.linalg.norm(M, 2, axis=(-2, -1))


def hs_norm(M):
    M = np.asarray(M)
    return float(np.linalg.norm(M)) if M.ndim == 2 else np.linalg.norm(M, axis=(-2, -1))


def sup_norms(sym, twice_range, points=None):
    """sup over x (sample points) of |sigma(x, l)|_op for each doubled degree."""
    out = {}
    for tl in twice_range:
        if isinstance(sym, LeftInvariantSymbol):
            out[tl] = op_norm(sym.blocks[tl])
        else:
            out[tl] = float(np.max(op_norm(sym.evaluate(points, tl))))
    return out


# --- quantisation ----------------------------------------------------------

def apply_blocks(sigma, f):
    """Per-term coefficients sigma_k(l) fhat(l), keyed with their coefficient functions.

    Op(sigma) f = sum_k f_k(x) * (synthesis of the returned coefficients).
    """
    tb = f.band()
    if tb > sigma.twice_max:
        raise BandLimitError(f"symbol known to {sigma.twice_max / 2}, data has degree {tb / 2}")
    out = []
    for c, b in as_terms(sigma):
        out.append((c, FourierCoefficients({tl: b.blocks[tl] @ f.block(tl)
                                            for tl in range(max(tb, 0) + 1)}, max(tb, 0))))
    return out


def quantize(sigma, f, grid):
    """Op(sigma) f sampled on grid: sum_l (2l+1) tr(t^l(x) sigma(x,l) fhat(l))."""
    parts = apply_blocks(sigma, f)
    need = max(c.twice_max for c, _ in parts) + max(f.band(), 0)
    if need > grid.twice_band:
        raise BandLimitError(f"grid band {grid.twice_band / 2} cannot hold output band {need / 2}")
    out = np.zeros(grid.shape, complex)
    for c, g in parts:
        vals = inverse(g, grid).samples
        if c.twice_max == 0:
            out += c.blocks[0][0, 0] * vals
        else:
            out += inverse(c, grid).samples * vals
    return GroupFunction(grid, out)


def symbol_of(A, L, coeff_band=0, tol=1e-9):
    """Symbol t^l(x)^* (A t^l)(x) of an operator acting on GroupFunction.

    `coeff_band` bounds the band of the x-dependence (0 for left-invariant A).
    """
    tL = as_twice(L)
    cb = as_twice(coeff_band)
    grid = _grid(tL + cb)
    nodes = grid.nodes()
    samples = {}
    for tl in range(tL + 1):
        T = wigner_euler(tl, nodes)  # (..., d, d)
        AT = np.empty_like(T)
        for i in range(tl + 1):
            for j in range(tl + 1):
                AT[..., i, j] = A(GroupFunction(grid, T[..., i, j].copy())).samples
        samples[tl] = np.einsum("...km,...kn->...mn", T.conj(), AT)
    flat = np.concatenate([s.reshape(grid.size, -1) for s in samples.values()], axis=1)
    mean = flat.mean(axis=0)
    if np.max(np.abs(flat - mean)) <= tol:
        blocks, pos = {}, 0
        for tl in range(tL + 1):
            n = (tl + 1) ** 2
            blocks[tl] = mean[pos:pos + n].reshape(tl + 1, tl + 1)
            pos += n
        return LeftInvariantSymbol(blocks, tL)
    U, S, Vh = np.linalg.svd(flat, full_matrices=False)
    rank = int(np.sum(S > tol * S[0]))
    terms = []
    for r in range(rank):
        fn = GroupFunction(grid, (U[:, r] * S[r]).reshape(grid.shape))
        coeff = forward(fn, HalfInt(cb))
        blocks, pos = {}, 0
        for tl in range(tL + 1):
            n = (tl + 1) ** 2
            blocks[tl] = Vh[r, pos:pos + n].reshape(tl + 1, tl + 1)
            pos += n
        terms.append((coeff, LeftInvariantSymbol(blocks, tL)))
    return from_terms(terms)


# --- kernels ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KernelField:
    """Right-convolution kernel R(x, y) = sum_k f_k(x) R_k(y), R_k sampled in y."""

    grid: object
    terms: tuple  # of (FourierCoefficients, GroupFunction)
    twice_max: int


def _as_coefficients(base):
    return FourierCoefficients(dict(base.blocks), base.twice_max)


def kernel_of(sigma, grid):
    """R_k(y) = sum_l (2l+1) tr(t^l(y) sigma_k(l)) for each term."""
    if sigma.twice_max > grid.twice_band:
        raise BandLimitError("grid too coarse for the symbol's band")
    terms = tuple((c, inverse(_as_coefficients(b), grid)) for c, b in as_terms(sigma))
    return KernelField(grid, terms, sigma.twice_max)


@dataclass(frozen=True)
class KernelSymbol:
    symbol: object
    truncated: bool


def symbol_from_kernel(K, L, tol=1e-9):
    """sigma(x, l) = int R(x, y) t^l(y)^* dy; flags kernels not band-limited to L."""
    tL = as_twice(L)
    terms, truncated = [], False
    for c, R in K.terms:
        full = forward(R)
        tail = max((float(np.max(np.abs(full.blocks[tl])))
                    for tl in range(tL + 1, K.grid.twice_band + 1)), default=0.0)
        truncated = truncated or tail > tol
        terms.append((c, LeftInvariantSymbol({tl: full.blocks[tl] for tl in range(tL + 1)}, tL)))
    if len(terms) == 1 and terms[0][0].twice_max == 0:
        sym = terms[0][1] * terms[0][0].blocks[0][0, 0]
    else:
        sym = from_terms(terms)
    return KernelSymbol(sym, truncated)


def conjugate(sigma, u):
    """sigma_{A_u}(x, l) = t^l(u)^* sigma(x u^{-1}, l) t^l(u)."""
    uq = u.as_array() if hasattr(u, "as_array") else np.asarray(u, dtype=float)

    def conj_base(b):
        return b.map(lambda tl, m: (lambda T: T.conj().T @ m @ T)(wigner_quat(tl, uq)))

    if isinstance(sigma, LeftInvariantSymbol):
        return conj_base(sigma)
    return XDependentSymbol(tuple((translate_right(c, uq), conj_base(b))
                                  for c, b in sigma.terms))


# --- differential operators -----------------------------------------------

@dataclass(frozen=True)
class DifferentialOperator:
    """sum over terms of a(x) X_{w1}...X_{wk}, with a band-limited or constant.

    terms: tuple of (coeff or None, word tuple, scalar).
    """

    terms: tuple

    def symbol(self, twice_max):
        parts = []
        for coeff, word, s in self.terms:
            base = word_symbol(word, twice_max) * s
            parts.append((FourierCoefficients.constant(1.0) if coeff is None else coeff, base))
        if all(c is None for c, _, _ in self.terms):
            total = parts[0][1]
            for _, b in parts[1:]:
                total = total + b
            return total
        return from_terms(parts)

    def order(self):
        return max(len(w) for _, w, _ in self.terms)

    def __add__(self, other):
        return DifferentialOperator(self.terms + other.terms)

    def apply(self, f, grid):
        """A f on grid for f given by FourierCoefficients (exact derivatives)."""
        out = np.zeros(grid.shape, complex)
        for coeff, word, s in self.terms:
            vals = inverse(apply_word(f, word), grid).samples * s
            if coeff is not None:
                vals = vals * inverse(coeff, grid).samples
            out += vals
        return GroupFunction(grid, out)


def grid_points(grid):
    """Quaternions of all grid nodes, shape (N, 4)."""
    return euler_to_quat_array(grid.nodes().reshape(-1, 3))
