import numpy as np
import pytest

from su2pdo.harmonic import (FourierCoefficients, apply_word, build_grid, delta_coefficients,
                             forward, inverse, multiply, parseval_gap, random_coefficients, sample,
                             single_mode, sobolev_norm, translate_right, weight)
from su2pdo.su2rep import BandLimitError, HalfInt, quat_mul_array, random_quaternions, wigner_quat


def test_constant_function():
    g = build_grid(2)
    c = forward(sample(lambda e: np.full(e.shape[:-1], 3.0), g))
    assert abs(c.blocks[0][0, 0] - 3.0) < 1e-13
    assert max(np.max(np.abs(c.blocks[tl])) for tl in range(1, 5)) < 1e-13


def test_roundtrip_and_parseval(rng):
    c = random_coefficients(rng, 12)
    f = inverse(c, build_grid(6))
    back = forward(f)
    assert back.max_abs_diff(c) < 1e-11
    assert parseval_gap(f) / f.norm2() < 1e-12


def test_band_limit_error(rng):
    f = inverse(random_coefficients(rng, 4), build_grid(2))
    with pytest.raises(BandLimitError):
        forward(f, HalfInt(6))


def test_single_mode_evaluates_matrix_entry(rng):
    x = random_quaternions(rng, 4)
    c = single_mode(3, 1, -1)
    assert np.allclose(c.evaluate(x), wigner_quat(3, x)[:, 2, 1])


def test_delta_at_identity():
    assert delta_coefficients(4).at_identity() == sum((tl + 1) ** 2 for tl in range(5))


def test_multiply_matches_pointwise(rng):
    a, b = random_coefficients(rng, 3), random_coefficients(rng, 2)
    x = random_quaternions(rng, 6)
    assert np.allclose(multiply(a, b).evaluate(x), a.evaluate(x) * b.evaluate(x))


def test_apply_word_matches_finite_difference(rng):
    c = random_coefficients(rng, 4)
    x = random_quaternions(rng, 3)
    h = 1e-5
    step = np.array([np.cos(h / 2), 0, np.sin(h / 2), 0])  # exp(h Y_1)
    back = step * np.array([1, -1, -1, -1])
    fd = (c.evaluate(quat_mul_array(x, step[None])) - c.evaluate(quat_mul_array(x, back[None]))) / (2 * h)
    assert np.allclose(apply_word(c, (1,)).evaluate(x), fd, atol=1e-6)


def test_translate_right(rng):
    c = random_coefficients(rng, 3)
    u, x = random_quaternions(rng, 1)[0], random_quaternions(rng, 4)
    uinv = u * np.array([1, -1, -1, -1])
    assert np.allclose(translate_right(c, u).evaluate(x), c.evaluate(quat_mul_array(x, uinv[None])))


def test_sobolev_weights():
    assert weight(0) == 1.0
    assert abs(weight(1) - np.sqrt(3)) < 1e-15
    c = FourierCoefficients.constant(2.0)
    assert abs(sobolev_norm(c, 3) - 2.0) < 1e-15
