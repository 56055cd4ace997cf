import numpy as np
import pytest

from su2pdo.diffops import (D, admissibility_report, apply, difference_via_kernel, family_qij,
                            family_tri, grand_difference, leibniz_residual, make_difference,
                            multi_indices, named, q_function, taylor_frame)
from su2pdo.harmonic import random_coefficients, single_mode
from su2pdo.opcatalog import builtin
from su2pdo.symbolspace import LeftInvariantSymbol, identity


def random_symbol(rng, T):
    return LeftInvariantSymbol({tl: rng.standard_normal((tl + 1, tl + 1))
                                + 1j * rng.standard_normal((tl + 1, tl + 1))
                                for tl in range(T + 1)}, T)


def max_err(s, upto=None):
    top = s.twice_reliable if upto is None else upto
    return max(float(np.max(np.abs(s.blocks[tl]))) for tl in range(top + 1))


@pytest.mark.parametrize("ij", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_coupling_formula_matches_kernel_oracle(rng, ij):
    s = random_symbol(rng, 8)
    fast = apply(D(*ij), s)
    slow = difference_via_kernel(q_function(*ij), s)
    assert max(float(np.max(np.abs(fast.blocks[tl] - slow.blocks[tl])))
               for tl in range(fast.twice_reliable + 1)) < 1e-10


def test_generic_band_one_function(rng):
    q = random_coefficients(rng, 2)
    q.blocks[0][0, 0] = -sum((tl + 1) * np.trace(q.blocks[tl]) for tl in (1, 2))  # q(e) = 0
    s = random_symbol(rng, 6)
    d = make_difference(q)
    fast, slow = apply(d, s), difference_via_kernel(q, s)
    assert max(float(np.max(np.abs(fast.blocks[tl] - slow.blocks[tl])))
               for tl in range(fast.twice_reliable + 1)) < 1e-10


def test_constant_symbols_are_annihilated():
    for ij in ((1, 1), (1, 2), (2, 1), (2, 2)):
        assert max_err(apply(D(*ij), identity(10))) < 1e-13


def test_edge_blocks_are_flagged(rng):
    s = apply(D(1, 2), random_symbol(rng, 8))
    assert s.twice_reliable < 8


def test_differences_commute(rng):
    s = random_symbol(rng, 12)
    for a, b in (((1, 1), (1, 2)), ((2, 1), (1, 2)), ((2, 2), (2, 1))):
        d = apply(D(*a), apply(D(*b), s)) - apply(D(*b), apply(D(*a), s))
        assert max_err(d) < 1e-10
    g1 = grand_difference((1, 2), (2, 1), s)
    g2 = grand_difference((2, 1), (1, 2), s)
    assert max_err(g1 - g2) < 1e-10


def test_leibniz_derived_pairing(rng):
    a, b = random_symbol(rng, 12), random_symbol(rng, 12)
    for i in (1, 2):
        for j in (1, 2):
            assert max_err(leibniz_residual(a, b, i, j)) < 1e-10


def test_leibniz_transposed_pairing_does_not_hold(rng):
    # the cross term pairs (D_kj a)(D_ik b); the transposed pairing leaves an O(1) residual
    a, b = random_symbol(rng, 8), random_symbol(rng, 8)
    assert max_err(leibniz_residual(a, b, 1, 2, form="literal")) > 1e-2


def test_triangular_family_definitions():
    for key, want in (("tri-", q_function(1, 2)), ("tri+", q_function(2, 1))):
        got = named(key).q
        assert max(float(np.max(np.abs(got.block(tl) - want.block(tl)))) for tl in range(3)) < 1e-15


def test_sublaplacian_differences():
    S = builtin("SubLap", 12)
    assert max_err(apply(D(1, 2), S) + builtin("d-", 12)) < 1e-12
    assert max_err(apply(D(2, 1), S) + builtin("d+", 12)) < 1e-12


@pytest.mark.parametrize("family, N", [(family_tri, 2), (family_qij, 3)])
def test_taylor_remainder_order(family, N):
    fr = taylor_frame(family(), N)
    f = single_mode(1, 1, 1)
    z = np.array([0.3, -0.5, 0.8])
    z /= np.linalg.norm(z)
    hs = np.logspace(-3, -1, 6)
    res = [abs(f.evaluate(np.array([np.cos(h / 2), *(np.sin(h / 2) * z)]))
               - fr.expand(f, np.array([np.cos(h / 2), *(np.sin(h / 2) * z)]))) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(res), 1)[0]
    assert slope > N - 0.2  # remainder is O(h^N) or better


def test_multi_indices_graded():
    al = multi_indices(3, 2)
    assert al[0] == (0, 0, 0) and len(al) == 10
    assert [sum(a) for a in al] == sorted(sum(a) for a in al)


def test_admissibility():
    tri, qij = admissibility_report(family_tri()), admissibility_report(family_qij())
    assert tri.admissible and not tri.strongly_admissible
    assert (-1.0, 0.0, 0.0, 0.0) in tri.common_zeros
    assert qij.strongly_admissible and qij.rank == 3
