"""Quadrature on SU(2), the group Fourier transform, Parseval and Sobolev norms.

The Fourier coefficient of f at degree l is the (2l+1)x(2l+1) matrix

    fhat(l) = int f(x) t^l(x)^* dx,      f(x) = sum_l (2l+1) tr(t^l(x) fhat(l)),

with the Haar measure normalised to total mass one.  Quadrature uses a tensor
grid in Euler angles: trapezoid rules in phi (period 2pi) and psi (period 4pi)
and Gauss-Legendre in cos(theta).  Transforms are evaluated separably, so the
cost is dominated by small dense matrix products per theta node.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .su2rep import (BandLimitError, as_twice, index_range, small_d,
                     wigner_quat, field_word_matrix)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor grid exact for integrands of band 2L (products of two band-L functions)."""

    twice_band: int
    phi: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    w_theta: np.ndarray

    @property
    def shape(self):
        return (self.phi.size, self.theta.size, self.psi.size)

    @property
    def size(self):
        return int(np.prod(self.shape))

    def nodes(self):
        """Euler angles of all nodes, shape (N_phi, N_theta, N_psi, 3)."""
        P, T, S = np.meshgrid(self.phi, self.theta, self.psi, indexing="ij")
        return np.stack([P, T, S], axis=-1)

    def weights(self):
        w = self.w_theta[None, :, None] / (self.phi.size * self.psi.size)
        return np.broadcast_to(w, self.shape)


@lru_cache(maxsize=64)
def _grid(tb):
    n_ang = 2 * tb + 1
    n_theta = tb + 1
    phi = 2 * np.pi * np.arange(n_ang) / n_ang
    psi = 4 * np.pi * np.arange(n_ang) / n_ang
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    for a in (phi, psi, theta, w):
        a.setflags(write=False)
    return QuadratureGrid(tb, phi, theta, psi, w / 2)


def build_grid(L):
    """Grid for band limit L (HalfInt or number)."""
    tb = as_twice(L)
    if tb < 0:
        raise ValueError("band limit must be non-negative")
    return _grid(tb)


def grid_twice(tb):
    return _grid(tb)


@lru_cache(maxsize=64)
def _dft(grid, tb):
    """exp(i k phi/2) and exp(i k psi/2) for doubled frequencies k = -tb..tb."""
    k = np.arange(-tb, tb + 1) / 2
    ephi = np.exp(1j * np.outer(grid.phi, k))
    epsi = np.exp(1j * np.outer(grid.psi, k))
    return ephi, epsi


@lru_cache(maxsize=256)
def _d_on_grid(grid, tl):
    d = small_d(tl, grid.theta)
    d.setflags(write=False)
    return d


@dataclass(frozen=True, eq=False)
class GroupFunction:
    """Samples of a function on a quadrature grid, shape (N_phi, N_theta, N_psi)."""

    grid: QuadratureGrid
    samples: np.ndarray

    def integral(self):
        return complex(np.sum(self.grid.weights() * self.samples))

    def norm2(self):
        return float(np.sum(self.grid.weights() * np.abs(self.samples) ** 2))

    def __add__(self, other):
        return GroupFunction(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        return GroupFunction(self.grid, self.samples - other.samples)

    def __mul__(self, other):
        if isinstance(other, GroupFunction):
            return GroupFunction(self.grid, self.samples * other.samples)
        return GroupFunction(self.grid, self.samples * other)

    __rmul__ = __mul__


def sample(fn, grid):
    """GroupFunction from a callable on Euler-angle arrays (..., 3)."""
    return GroupFunction(grid, np.asarray(fn(grid.nodes()), dtype=complex))


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    """Blocks fhat(l) keyed by doubled degree, dense up to twice_max."""

    blocks: dict
    twice_max: int

    @classmethod
    def zeros(cls, twice_max):
        return cls({tl: np.zeros((tl + 1, tl + 1), complex) for tl in range(twice_max + 1)},
                   twice_max)

    @classmethod
    def from_blocks(cls, blocks, twice_max=None):
        tmax = max(blocks) if twice_max is None else twice_max
        out = {}
        for tl in range(tmax + 1):
            b = blocks.get(tl)
            out[tl] = (np.zeros((tl + 1, tl + 1), complex) if b is None
                       else np.array(b, dtype=complex).reshape(tl + 1, tl + 1))
        return cls(out, tmax)

    @classmethod
    def constant(cls, value=1.0):
        return cls({0: np.array([[value]], dtype=complex)}, 0)

    def block(self, tl):
        if tl in self.blocks:
            return self.blocks[tl]
        return np.zeros((tl + 1, tl + 1), complex)

    def band(self, tol=0.0):
        """Largest doubled degree carrying a block with entries above tol (-1 if zero)."""
        for tl in range(self.twice_max, -1, -1):
            if np.max(np.abs(self.blocks[tl])) > tol:
                return tl
        return -1

    def resize(self, twice_max):
        return FourierCoefficients.from_blocks(
            {tl: b for tl, b in self.blocks.items() if tl <= twice_max}, twice_max)

    def map(self, fn):
        return FourierCoefficients({tl: fn(tl, b) for tl, b in self.blocks.items()},
                                   self.twice_max)

    def __add__(self, other):
        tmax = max(self.twice_max, other.twice_max)
        return FourierCoefficients({tl: self.block(tl) + other.block(tl)
                                    for tl in range(tmax + 1)}, tmax)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, s):
        return FourierCoefficients({tl: s * b for tl, b in self.blocks.items()}, self.twice_max)

    __rmul__ = __mul__

    def hs_norm2(self):
        """Parseval side: sum_l (2l+1) |fhat(l)|_HS^2."""
        return float(sum((tl + 1) * np.sum(np.abs(b) ** 2) for tl, b in self.blocks.items()))

    def max_abs_diff(self, other):
        tmax = max(self.twice_max, other.twice_max)
        return max(float(np.max(np.abs(self.block(tl) - other.block(tl))))
                   for tl in range(tmax + 1))

    def evaluate(self, x):
        """Values at quaternions x of shape (..., 4)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1], complex)
        for tl, b in self.blocks.items():
            if not np.any(b):
                continue
            t = wigner_quat(tl, x)
            out += (tl + 1) * np.einsum("...mn,nm->...", t, b)
        return out

    def at_identity(self):
        return complex(sum((tl + 1) * np.trace(b) for tl, b in self.blocks.items()))

    def to_vector(self, twice_max=None):
        tmax = self.twice_max if twice_max is None else twice_max
        return np.concatenate([self.block(tl).ravel() for tl in range(tmax + 1)])

    @classmethod
    def from_vector(cls, v, twice_max):
        blocks, pos = {}, 0
        for tl in range(twice_max + 1):
            n = (tl + 1) ** 2
            blocks[tl] = np.asarray(v[pos:pos + n], complex).reshape(tl + 1, tl + 1)
            pos += n
        return cls(blocks, twice_max)


def forward(f, L=None):
    """Fourier coefficients fhat(l) for l <= L of a sampled GroupFunction."""
    grid = f.grid
    tb = grid.twice_band if L is None else as_twice(L)
    if tb > grid.twice_band:
        raise BandLimitError(f"grid band {grid.twice_band / 2} is below requested {tb / 2}")
    ephi, epsi = _dft(grid, tb)
    n_ang = grid.phi.size * grid.psi.size
    # G[k, n, m] = sum_{a,b} f[a,k,b] e^{i n phi_a} e^{i m psi_b}
    G = np.einsum("akb,an,bm->knm", f.samples, ephi, epsi, optimize=True) / n_ang
    w = grid.w_theta
    blocks = {}
    for tl in range(tb + 1):
        idx = index_range(tl) + tb
        d = _d_on_grid(grid, tl)
        sub = G[:, idx][:, :, idx]
        blocks[tl] = np.einsum("k,knm,knm->mn", w, d, sub)
    return FourierCoefficients(blocks, tb)


def inverse(c, grid):
    """Synthesis f(x) = sum_l (2l+1) tr(t^l(x) fhat(l)) at the grid nodes."""
    tb = c.twice_max
    ephi, epsi = _dft(grid, tb)
    H = np.zeros((grid.theta.size, 2 * tb + 1, 2 * tb + 1), complex)
    for tl, b in c.blocks.items():
        if not np.any(b):
            continue
        idx = index_range(tl) + tb
        d = _d_on_grid(grid, tl)
        H[np.ix_(np.arange(grid.theta.size), idx, idx)] += (tl + 1) * d * b.T[None]
    samples = np.einsum("am,kmn,bn->akb", ephi.conj(), H, epsi.conj(), optimize=True)
    return GroupFunction(grid, samples)


def parseval_gap(f, L=None):
    """| |f|^2 - sum (2l+1) |fhat(l)|_HS^2 | for a band-limited sampled f."""
    return abs(f.norm2() - forward(f, L).hs_norm2())


def weight(ell):
    """<l> = (1 + l(l+1))^(1/2)."""
    l = as_twice(ell) / 2
    return float(np.sqrt(1.0 + l * (l + 1)))


def weight_twice(tl):
    l = np.asarray(tl, dtype=float) / 2
    return np.sqrt(1.0 + l * (l + 1))


def sobolev_norm(c, s):
    total = sum((tl + 1) * weight_twice(tl) ** (2 * s) * np.sum(np.abs(b) ** 2)
                for tl, b in c.blocks.items())
    return float(np.sqrt(total))


def random_coefficients(rng, twice_max, scale=1.0):
    return FourierCoefficients(
        {tl: scale * (rng.standard_normal((tl + 1, tl + 1))
                      + 1j * rng.standard_normal((tl + 1, tl + 1)))
         for tl in range(twice_max + 1)}, twice_max)


def delta_coefficients(twice_max):
    """Truncated delta at e: fhat(l) = I for every l."""
    return FourierCoefficients({tl: np.eye(tl + 1, dtype=complex)
                                for tl in range(twice_max + 1)}, twice_max)


def single_mode(tl, tm, tn, twice_max=None):
    """Coefficients of the matrix entry t^l_{mn}: fhat(l) = E_{nm} / (2l+1)."""
    c = FourierCoefficients.zeros(tl if twice_max is None else twice_max)
    b = c.blocks[tl]
    b[(tn + tl) // 2, (tm + tl) // 2] = 1.0 / (tl + 1)
    return c


def multiply(f, g):
    """Pointwise product of two band-limited functions, computed exactly on a grid."""
    tb = f.twice_max + g.twice_max
    grid = _grid(tb)
    prod = inverse(f, grid) * inverse(g, grid)
    return forward(prod)


def apply_word(c, word):
    """Coefficients of X_{w1}...X_{wk} f for left-invariant fields, exact."""
    if not word:
        return c
    return c.map(lambda tl, b: field_word_matrix(word, tl) @ b)


def translate_right(c, u_quat):
    """Coefficients of x -> f(x u^{-1})."""
    return c.map(lambda tl, b: wigner_quat(tl, u_quat).conj().T @ b)
