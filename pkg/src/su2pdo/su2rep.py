"""Group elements of SU(2), representation matrices t^l and Clebsch-Gordan data.

Conventions
-----------
Representation and matrix indices are half-integers, stored as doubled
integers ("twice" values) everywhere.  Matrix rows and columns run over
m = -l, ..., l in increasing order.

Unit quaternions map to SU(2) by

    Phi(x) = [[x0 + i x3, x1 + i x2], [-x1 + i x2, x0 - i x3]].

Euler angles (phi, theta, psi) parametrise U = exp(phi Y3) exp(theta Y2) exp(psi Y3)
with Y3 = diag(i/2, -i/2) and Y2 = [[0, 1/2], [-1/2, 0]], so that

    t^l_{mn}(phi, theta, psi) = exp(-i m phi) d^l_{mn}(theta) exp(-i n psi)

in the standard angular momentum basis (J_z = diag(m), Condon-Shortley phases),
and t^{1/2} is exactly Phi.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

# Largest representation index (in twice units) for which wigner() is validated.
TWICE_LMAX = 128

UNIT_TOL = 1e-9


class BandLimitError(ValueError):
    """Raised when a requested degree exceeds a grid, symbol or validated range."""


@dataclass(frozen=True, order=True)
class HalfInt:
    """A half-integer stored as twice its value."""

    twice: int

    @classmethod
    def of(cls, value):
        return cls(as_twice(value))

    @property
    def value(self):
        return Fraction(self.twice, 2)

    def __float__(self):
        return self.twice / 2

    def __str__(self):
        return str(self.twice // 2) if self.twice % 2 == 0 else f"{self.twice}/2"


def as_twice(value):
    """Doubled integer for an index given as HalfInt, int, Fraction or float."""
    if isinstance(value, HalfInt):
        return value.twice
    t = Fraction(value) * 2 if not isinstance(value, float) else value * 2
    if isinstance(t, float):
        if abs(t - round(t)) > 1e-9:
            raise ValueError(f"{value} is not a half-integer")
        return int(round(t))
    if t.denominator != 1:
        raise ValueError(f"{value} is not a half-integer")
    return int(t)


def index_range(tl):
    """Doubled matrix indices -l, ..., l for doubled degree tl."""
    return np.arange(-tl, tl + 1, 2)


def degrees(twice_max):
    """All doubled degrees 0, 1, ..., twice_max."""
    return range(0, twice_max + 1)


def dim(tl):
    return tl + 1


@dataclass(frozen=True)
class Quaternion:
    x0: float
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        n = self.x0**2 + self.x1**2 + self.x2**2 + self.x3**2
        if abs(n - 1.0) > UNIT_TOL:
            raise ValueError(f"quaternion is not a unit vector (norm^2 = {n})")

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(*(float(v) for v in x))

    def as_array(self):
        return np.array([self.x0, self.x1, self.x2, self.x3])


IDENTITY = Quaternion(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class EulerAngles:
    phi: float
    theta: float
    psi: float

    def as_array(self):
        return np.array([self.phi, self.theta, self.psi])


def quat_to_su2(q):
    """The 2x2 matrix Phi(q) of a unit quaternion."""
    x0, x1, x2, x3 = q.as_array() if isinstance(q, Quaternion) else _unit(q)
    return np.array([[x0 + 1j * x3, x1 + 1j * x2],
                     [-x1 + 1j * x2, x0 - 1j * x3]])


def su2_to_quat(U):
    U = np.asarray(U)
    return Quaternion.from_array(_normalise([U[0, 0].real, U[0, 1].real,
                                             U[0, 1].imag, U[0, 0].imag]))


def _unit(x):
    x = np.asarray(x, dtype=float)
    if abs(np.dot(x, x) - 1.0) > UNIT_TOL:
        raise ValueError("quaternion is not a unit vector")
    return x


def _normalise(x):
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x)


def quat_mul_array(a, b):
    """Quaternion product with Phi(ab) = Phi(a)Phi(b), batched on the last axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # first row of Phi(a)Phi(b) determines the product
    pa, qa = a[..., 0] + 1j * a[..., 3], a[..., 1] + 1j * a[..., 2]
    pb, qb = b[..., 0] + 1j * b[..., 3], b[..., 1] + 1j * b[..., 2]
    p = pa * pb - qa * np.conj(qb)
    q = pa * qb + qa * np.conj(pb)
    return np.stack([p.real, q.real, q.imag, p.imag], axis=-1)


def group_mul(a, b):
    return Quaternion.from_array(_normalise(quat_mul_array(a.as_array(), b.as_array())))


def group_inv(a):
    return Quaternion(a.x0, -a.x1, -a.x2, -a.x3)


def quat_to_euler_array(x):
    """Euler angles (phi, theta, psi) for quaternions along the last axis."""
    x = np.asarray(x, dtype=float)
    a = x[..., 0] + 1j * x[..., 3]
    b = x[..., 1] + 1j * x[..., 2]
    theta = 2 * np.arctan2(np.abs(b), np.abs(a))
    alpha = np.where(np.abs(a) > 1e-300, np.angle(a), 0.0)
    beta = np.where(np.abs(b) > 1e-300, np.angle(b), 0.0)
    phi = alpha + beta
    psi = alpha - beta
    # (phi, psi) and (phi + 2pi, psi + 2pi) are the same element
    shift = np.floor(phi / (2 * np.pi))
    phi = phi - 2 * np.pi * shift
    psi = np.mod(psi - 2 * np.pi * shift, 4 * np.pi)
    return np.stack([phi, theta, psi], axis=-1)


def euler_to_quat_array(e):
    e = np.asarray(e, dtype=float)
    phi, theta, psi = e[..., 0], e[..., 1], e[..., 2]
    a = np.exp(0.5j * (phi + psi)) * np.cos(theta / 2)
    b = np.exp(0.5j * (phi - psi)) * np.sin(theta / 2)
    return np.stack([a.real, b.real, b.imag, a.imag], axis=-1)


def quat_to_euler(q):
    return EulerAngles(*quat_to_euler_array(q.as_array()))


def euler_to_quat(e):
    return Quaternion.from_array(_normalise(euler_to_quat_array(e.as_array())))


def random_quaternions(rng, size):
    x = rng.standard_normal((size, 4))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def geodesic_distance(x):
    """Distance 2 arccos(x0) from e, for quaternions along the last axis."""
    x0 = np.clip(np.asarray(x, dtype=float)[..., 0], -1.0, 1.0)
    return 2 * np.arccos(x0)


# --- Lie algebra ---------------------------------------------------------

@lru_cache(maxsize=None)
def ladder(tl):
    """(J_z, J_+, J_-) for doubled degree tl, real arrays in the m-ordered basis."""
    m = index_range(tl) / 2
    l = tl / 2
    jz = np.diag(m)
    # J_+ |m> = sqrt((l-m)(l+m+1)) |m+1>
    up = np.sqrt(np.maximum((l - m[:-1]) * (l + m[:-1] + 1), 0.0))
    jp = np.diag(up, -1)
    jm = jp.T.copy()
    for arr in (jz, jp, jm):
        arr.setflags(write=False)
    return jz, jp, jm


@lru_cache(maxsize=None)
def field_matrix(k, tl):
    """dt^l(Y_k) for the Lie algebra basis

    Y_1 = [[0, i/2], [i/2, 0]], Y_2 = [[0, 1/2], [-1/2, 0]], Y_3 = diag(i/2, -i/2);
    their images are i J_x, -i J_y and -i J_z.
    """
    jz, jp, jm = ladder(tl)
    if k == 1:
        out = 0.5j * (jp + jm)
    elif k == 2:
        out = 0.5 * (jm - jp) + 0j
    elif k == 3:
        out = -1j * jz
    else:
        raise ValueError("field index must be 1, 2 or 3")
    out.setflags(write=False)
    return out


def field_word_matrix(word, tl):
    """dt^l(Y_{w1}) ... dt^l(Y_{wk}) for a word of field indices."""
    out = np.eye(tl + 1, dtype=complex)
    for k in word:
        out = out @ field_matrix(k, tl)
    return out


# --- Wigner matrices -----------------------------------------------------

@lru_cache(maxsize=None)
def _jy_eig(tl):
    jz, jp, jm = ladder(tl)
    jy = (jp - jm) / 2j
    lam, vec = np.linalg.eigh(jy)
    return lam, vec


def _check_degree(tl):
    if tl < 0:
        raise ValueError("degree must be non-negative")
    if tl > TWICE_LMAX:
        raise BandLimitError(f"degree {tl / 2} exceeds validated range {TWICE_LMAX / 2}")


def small_d(tl, theta):
    """Real matrices d^l(theta) = exp(-i theta J_y), batched over theta."""
    _check_degree(tl)
    theta = np.asarray(theta, dtype=float)
    lam, vec = _jy_eig(tl)
    phase = np.exp(-1j * theta[..., None] * lam)
    d = np.einsum("ik,...k,jk->...ij", vec, phase, vec.conj())
    return d.real


def small_d_factorial(tl, theta):
    """Factorial-sum formula for d^l(theta); exact-rational prefactors, small l only."""
    tm = index_range(tl)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    out = np.zeros((tl + 1, tl + 1))
    j2 = tl
    for r, tmp in enumerate(tm):
        for col, tmm in enumerate(tm):
            jpm, jmm = (j2 + tmp) // 2, (j2 - tmp) // 2
            jpn, jmn = (j2 + tmm) // 2, (j2 - tmm) // 2
            pre = math.sqrt(math.factorial(jpm) * math.factorial(jmm)
                            * math.factorial(jpn) * math.factorial(jmn))
            total = 0.0
            dm = (tmp - tmm) // 2
            for k in range(0, j2 + 1):
                a, b, e = jpn - k, dm + k, jmm - k
                if a < 0 or b < 0 or e < 0:
                    continue
                den = math.factorial(a) * math.factorial(k) * math.factorial(b) * math.factorial(e)
                total += ((-1) ** (dm + k) / den
                          * c ** (j2 + (tmm - tmp) // 2 - 2 * k) * s ** (dm + 2 * k))
            out[r, col] = pre * total
    return out


def wigner_euler(tl, euler):
    """t^l at Euler angles, batched over the leading axes of `euler` (..., 3)."""
    e = np.asarray(euler, dtype=float)
    tm = index_range(tl) / 2
    d = small_d(tl, e[..., 1])
    left = np.exp(-1j * e[..., 0, None] * tm)
    right = np.exp(-1j * e[..., 2, None] * tm)
    return left[..., :, None] * d * right[..., None, :]


def wigner_quat(tl, x):
    return wigner_euler(tl, quat_to_euler_array(x))


def wigner(ell, g):
    """Representation matrix t^l(g) for g given as Quaternion or EulerAngles."""
    tl = as_twice(ell)
    if isinstance(g, Quaternion):
        e = quat_to_euler_array(g.as_array())
    elif isinstance(g, EulerAngles):
        e = g.as_array()
    else:
        raise TypeError("g must be a Quaternion or EulerAngles")
    return wigner_euler(tl, e)


# --- Clebsch-Gordan ------------------------------------------------------

@lru_cache(maxsize=None)
def cg(tj1, tm1, tj2, tm2, tj, tm):
    """<j1 m1; j2 m2 | j m> by the Racah formula, all arguments doubled."""
    if tm1 + tm2 != tm:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm) > tj:
        return 0.0
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tj + tm) % 2:
        return 0.0
    if tj < abs(tj1 - tj2) or tj > tj1 + tj2 or (tj1 + tj2 + tj) % 2:
        return 0.0
    f = math.factorial
    a = (tj1 + tj2 - tj) // 2
    b = (tj1 - tj2 + tj) // 2
    c = (-tj1 + tj2 + tj) // 2
    pre = Fraction((tj + 1) * f(a) * f(b) * f(c), f((tj1 + tj2 + tj) // 2 + 1))
    pre *= (f((tj + tm) // 2) * f((tj - tm) // 2) * f((tj1 - tm1) // 2)
            * f((tj1 + tm1) // 2) * f((tj2 - tm2) // 2) * f((tj2 + tm2) // 2))
    total = Fraction(0)
    for k in range(0, a + 1):
        d = [a - k, (tj1 - tm1) // 2 - k, (tj2 + tm2) // 2 - k,
             (tj - tj2 + tm1) // 2 + k, (tj - tj1 - tm2) // 2 + k]
        if min(d) < 0:
            continue
        den = f(k)
        for v in d:
            den *= f(v)
        total += Fraction((-1) ** k, den)
    sq = total * total * pre
    return math.copysign(math.sqrt(sq), total) if total else 0.0


def cg_half(tl, tm, tmu, tj):
    """Closed form <l m; 1/2 mu | j, m+mu> for j = l +- 1/2 (doubled arguments)."""
    tM = tm + tmu
    if abs(tm) > tl or abs(tM) > tj or tj < 0:
        return 0.0
    den = tl + 1
    M = tM / 2
    l = tl / 2
    if tj == tl + 1:
        num = l + M + 0.5 if tmu > 0 else l - M + 0.5
        return math.sqrt(num / den)
    if tj == tl - 1:
        if tmu > 0:
            return -math.sqrt((l - M + 0.5) / den)
        return math.sqrt((l + M + 0.5) / den)
    return 0.0


def expand_product(ell, i, j, m, n):
    """t^{1/2}_{ij} t^l_{mn} as a list of (l', m', n', coefficient).

    Indices are given as values (HalfInt or numbers) and returned as HalfInt.
    """
    tl, ti, tj_, tm, tn = (as_twice(v) for v in (ell, i, j, m, n))
    out = []
    for tL in (tl - 1, tl + 1):
        if tL < 0:
            continue
        c = cg_half(tl, tm, ti, tL) * cg_half(tl, tn, tj_, tL)
        if c != 0.0:
            out.append((HalfInt(tL), HalfInt(tm + ti), HalfInt(tn + tj_), c))
    return out


def cg_block(tl):
    """Unitary change of basis V (half (x) l -> (l+1/2) + (l-1/2)).

    Rows are indexed by product states (mu, m) in lexicographic order, columns
    by coupled states (j, M) with j = l+1/2 first.
    """
    rows = [(tmu, tm) for tmu in (-1, 1) for tm in index_range(tl)]
    cols = [(tj, tM) for tj in (tl + 1, tl - 1) if tj >= 0 for tM in index_range(tj)]
    V = np.zeros((len(rows), len(cols)))
    for a, (tmu, tm) in enumerate(rows):
        for b, (tj, tM) in enumerate(cols):
            if tm + tmu == tM:
                V[a, b] = cg_half(tl, tm, tmu, tj)
    return V
