"""Commutative cross-check: symbols on the torus T^n = (R / 2 pi Z)^n.

The symbol of d/dx is i xi.  Differences are classical forward differences
Delta_j a(xi) = a(xi + e_j) - a(xi), the Fourier side of multiplying by
q_j(x) = exp(i x_j) - 1.
"""
from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .diffops import multi_indices


@dataclass(frozen=True)
class TorusSymbol:
    """Scalar symbol sampled on xi in [-n, n]^dim (array axes follow xi components)."""

    values: np.ndarray
    n: int
    lo: tuple  # lowest xi per axis

    @property
    def dim(self):
        return self.values.ndim

    def xi(self):
        axes = [np.arange(l, l + s) for l, s in zip(self.lo, self.values.shape)]
        return np.meshgrid(*axes, indexing="ij")


NAMED = {
    "ddx": lambda xi, c: 1j * xi[0],
    "ddx_plus_c": lambda xi, c: 1j * xi[0] + c,
    "one_plus_xi2": lambda xi, c: 1.0 + sum(x ** 2 for x in xi),
    "laplacian_plus_c": lambda xi, c: -sum(x ** 2 for x in xi) + c,
    "constant": lambda xi, c: np.full(xi[0].shape, c, dtype=complex),
}


def torus_symbol(expr, n, dim=1, c=0.0):
    """Sample a named expression or a callable f(xi_list) on [-n, n]^dim."""
    fn = NAMED[expr] if isinstance(expr, str) else (lambda xi, c: expr(xi))
    axes = [np.arange(-n, n + 1)] * dim
    xi = np.meshgrid(*axes, indexing="ij")
    vals = np.asarray(fn(xi, c), dtype=complex) * np.ones(xi[0].shape)
    return TorusSymbol(vals, n, (-n,) * dim)


def torus_difference(a, j):
    """Forward difference along axis j; the top row is dropped."""
    v = np.diff(a.values, axis=j)
    return TorusSymbol(v, a.n, a.lo)


def weight(xi):
    return np.sqrt(1.0 + sum(x ** 2 for x in xi))


@dataclass
class TorusFit:
    m: float
    rho: float
    slopes: dict


def _slope(a, lo_r, hi_r, ref=None, zero_tol=1e-10):
    xi = a.xi()
    r = np.max(np.abs(np.stack(xi)), axis=0)
    rs, vals, refs = [], [], []
    for k in range(lo_r, hi_r + 1):
        mask = r == k
        if not mask.any():
            continue
        rs.append(k)
        vals.append(np.max(np.abs(a.values[mask])))
        refs.append(1.0 if ref is None else max(ref[k], 1.0))
    rs, vals, refs = map(np.array, (rs, vals, refs))
    keep = vals > zero_tol * refs
    if keep.sum() < 2:
        return float("-inf"), dict(zip(rs.tolist(), vals.tolist()))
    x = np.log(np.sqrt(1.0 + rs[keep] ** 2.0))
    return float(np.polyfit(x, np.log(vals[keep]), 1)[0]), dict(zip(rs.tolist(), vals.tolist()))


def torus_fit(a, depth=2):
    """Order m and type rho from sup over shells max|xi_j| = r, r in [n/4, n - depth]."""
    lo_r, hi_r = max(1, a.n // 4), a.n - depth
    m, ref = _slope(a, lo_r, hi_r)
    slopes = {(0,) * a.dim: m}
    rhos = []
    for al in multi_indices(a.dim, depth):
        if sum(al) == 0:
            continue
        b = a
        for j, k in enumerate(al):
            for _ in range(k):
                b = torus_difference(b, j)
        s, _ = _slope(b, lo_r, hi_r, ref)
        slopes[al] = s
        rhos.append((m - s) / sum(al))
    rho = min(rhos) if rhos else 1.0
    return TorusFit(m, rho if np.isfinite(rho) else 1.0, slopes)


def torus_admissibility(dim=1, n_grid=64):
    """Rank of dq_j(0) and common zeros of q_j = exp(i x_j) - 1 on a grid of the torus."""
    D = 1j * np.eye(dim)
    rank = int(np.linalg.matrix_rank(D))
    pts = 2 * np.pi * np.arange(n_grid) / n_grid
    zeros = [p for p in iproduct(pts, repeat=dim)
             if max(abs(np.exp(1j * x) - 1) for x in p) < 1e-12]
    return {"rank": rank, "admissible": rank == dim,
            "strongly_admissible": rank == dim and len(zeros) == 1,
            "common_zeros": [[float(x) for x in z] for z in zeros]}
