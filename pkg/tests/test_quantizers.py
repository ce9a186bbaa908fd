"""
Tests of the LutGEMM uniform and binary-coding quantizers.

Date: 15 Oct 2026
"""

import numpy as np
import pytest
from numpy.testing import (
    assert_allclose,
    assert_almost_equal,
    assert_array_equal,
    assert_equal,
)

from LutGEMM.bcq import BcqTensor, dequantize, unpack_planes
from LutGEMM.bench import gaussian_matrix
from LutGEMM.quantizers import (
    QuantMethod,
    UniformQuant,
    quantization_error,
    quantize_bcq_alternating,
    quantize_bcq_greedy,
    quantize_matrix,
    quantize_rtn,
    uniform_to_bcq,
)
from LutGEMM.kernels import KernelConfig, build_luts, dense_gemv, lut_gemv

EPS = np.finfo(np.float32).eps


def test_rtn_endpoints():
    """
    A [0, 1] group at q=1 maps its endpoints to themselves.
    """
    u = quantize_rtn([[0.0, 1.0]], 1)
    assert_almost_equal(u.scale[0, 0], 1.0)
    assert_almost_equal(u.zero_offset[0, 0], 0.0)
    assert_array_equal(u.codes, [[0, 1]])


def test_rtn_three_levels():
    """
    [-1, 0, 1] at q=2: s = 2/3, z_hat = -1, codes [0, 2, 3].
    """
    u = quantize_rtn([[-1.0, 0.0, 1.0]], 2)
    assert_almost_equal(u.scale[0, 0], 2.0 / 3.0)
    assert_almost_equal(u.zero_offset[0, 0], -1.0)
    assert_array_equal(u.codes, [[0, 2, 3]])
    assert_allclose(u.dequantize(), [[-1.0, 1.0 / 3.0, 1.0]], atol=1e-6)


def test_rtn_constant_group():
    """
    A constant group dequantizes exactly, for any q.
    """
    W = np.array([[5.0, 5.0, 1.0, 2.0]])
    for q in [1, 2, 3, 8]:
        u = quantize_rtn(W, q, group_size=2)
        out = u.dequantize()
        assert_array_equal(out[0, :2], [5.0, 5.0])
        assert_array_equal(u.codes[0, :2], [0, 0])
        assert_allclose(out[0, 2:], [1.0, 2.0], atol=1e-6)


def test_rtn_invalid():
    """
    Test bit range, code range and non-finite step checks.
    """
    with pytest.raises(ValueError):
        quantize_rtn([[1.0, 2.0]], 0)
    with pytest.raises(ValueError):
        quantize_rtn([[1.0, 2.0]], 9)
    with pytest.raises(ValueError):
        UniformQuant([[0, 4]], [[1.0]], [[0.0]], 2)
    with pytest.raises(ValueError):
        UniformQuant([[0, 1]], [[np.inf]], [[0.0]], 1)
    with pytest.raises(ValueError):
        UniformQuant([[0, 1]], [[1.0]], [[np.nan]], 1)
    with pytest.raises(ValueError, match="finite"):
        quantize_rtn([[-3e38, 3e38]], 1)


def test_uniform_to_bcq_example():
    """
    s=0.5, z_hat=0, q=2: code 3 gives alpha=[0.25, 0.5], z=0.75, signs
    [+1, +1] and 1.5; code 0 gives signs [-1, -1] and 0.
    """
    u = UniformQuant([[3, 0]], [[0.5]], [[0.0]], 2)
    t = uniform_to_bcq(u)
    assert_array_equal(t.scales[0, 0], [0.25, 0.5])
    assert_array_equal(t.biases, [[0.75]])
    assert_array_equal(unpack_planes(t.planes, 2)[:, 0, :], [[1, -1], [1, -1]])
    assert_array_equal(dequantize(t), [[1.5, 0.0]])
    assert_array_equal(u.dequantize(), [[1.5, 0.0]])


def test_uniform_to_bcq_exhaustive():
    """
    Every code at q <= 4, for 100 random (s, z_hat) each, dequantizes the
    same through BCQ within 4*q epsilons of the operand magnitude.
    """
    rng = np.random.default_rng(11)
    for q in range(1, 5):
        codes = np.tile(np.arange(2**q), (100, 1))
        s = rng.uniform(0.01, 2.0, size=(100, 1)).astype(np.float32)
        z_hat = rng.uniform(-3.0, 3.0, size=(100, 1)).astype(np.float32)
        u = UniformQuant(codes, s, z_hat, q)

        expected = u.dequantize().astype(np.float64)
        got = dequantize(uniform_to_bcq(u)).astype(np.float64)
        magnitude = s.astype(np.float64) * (2**q - 1) + np.abs(z_hat)
        assert np.all(np.abs(got - expected) <= 4 * q * EPS * magnitude)


def test_uniform_path_through_lut_kernel():
    """
    quantize_rtn -> uniform_to_bcq -> lut_gemv agrees with the dequantized
    uniform GEMV within 1e-4 relative, 256 x 256, q=4, g=64.
    """
    rng = np.random.default_rng(5)
    W = rng.standard_normal((256, 256)).astype(np.float32)
    x = rng.standard_normal(256).astype(np.float32)
    u = quantize_rtn(W, 4, group_size=64)
    t = uniform_to_bcq(u)

    y = lut_gemv(t, build_luts(x, 8), KernelConfig(mu=8, threads=1))
    y_ref = dense_gemv(u.dequantize(), x)
    dev = np.abs(y.astype(np.float64) - y_ref).max() / np.abs(y_ref).max()
    assert dev <= 1e-4


def test_greedy_examples():
    """
    w=[1, -1] at q=1 and w=[3, 1] at q=2 are reconstructed exactly.
    """
    t = quantize_bcq_greedy([[1.0, -1.0]], 1)
    assert_array_equal(t.scales, [[[1.0]]])
    assert_array_equal(t.signs()[0], [[1, -1]])
    assert_array_equal(dequantize(t), [[1.0, -1.0]])

    t = quantize_bcq_greedy([[3.0, 1.0]], 2)
    assert_array_equal(t.scales, [[[2.0, 1.0]]])
    assert_array_equal(t.signs()[:, 0, :], [[1, 1], [1, -1]])
    assert_array_equal(dequantize(t), [[3.0, 1.0]])


def test_greedy_sign_of_zero():
    """
    A zero residual takes the +1 sign.
    """
    t = quantize_bcq_greedy([[0.0, 2.0]], 1)
    assert_array_equal(t.signs()[0], [[1, 1]])
    assert_almost_equal(t.scales[0, 0, 0], 1.0)


def test_greedy_error_non_increasing():
    """
    Reconstruction error does not increase as planes are added.
    """
    rng = np.random.default_rng(2)
    W = rng.standard_normal((16, 96)).astype(np.float32)
    t = quantize_bcq_greedy(W, 4, group_size=32)
    errors = [quantization_error(W, t.truncated(k))["mse"] for k in range(1, 5)]
    for before, after in zip(errors[:-1], errors[1:]):
        assert after < before


def test_alternating_one_bit():
    """
    With q=1 both quantizers land on alpha = mean(|w|) and b = sign(w).
    """
    t = quantize_bcq_alternating([[0.9, 1.1, -1.0]], 1)
    assert_almost_equal(t.scales[0, 0, 0], 1.0, decimal=6)
    assert_array_equal(t.signs()[0], [[1, 1, -1]])

    rng = np.random.default_rng(8)
    W = rng.standard_normal((8, 24)).astype(np.float32)
    greedy = quantize_bcq_greedy(W, 1, group_size=8)
    alternating = quantize_bcq_alternating(W, 1, group_size=8)
    assert_array_equal(alternating.planes, greedy.planes)
    assert_allclose(alternating.scales, greedy.scales, rtol=1e-6)


def test_alternating_not_worse_than_greedy():
    """
    Alternating refinement (3 iterations) never loses to greedy, g=32.
    """
    rng = np.random.default_rng(4)
    W = rng.standard_normal((32, 128)).astype(np.float32)
    for q in [2, 3, 4]:
        greedy = quantization_error(W, quantize_bcq_greedy(W, q, 32))["mse"]
        alternating = quantization_error(W, quantize_bcq_alternating(W, q, 32, iters=3))["mse"]
        assert alternating <= greedy * (1 + 1e-5)


def test_alternating_invalid_iters():
    with pytest.raises(ValueError):
        quantize_bcq_alternating([[1.0, 2.0]], 2, iters=0)


def test_bias_helps_shifted_weights():
    """
    Asymmetric BCQ fits weights with a large common offset much better.
    """
    rng = np.random.default_rng(6)
    W = (rng.standard_normal((16, 64)) + 3.0).astype(np.float32)
    plain = quantize_bcq_greedy(W, 2, 32)
    biased = quantize_bcq_greedy(W, 2, 32, bias=True)
    assert biased.has_bias and not plain.has_bias
    assert quantization_error(W, biased)["rel_fro"] < quantization_error(W, plain)["rel_fro"]

    refined = quantize_bcq_alternating(W, 2, 32, bias=True)
    assert refined.has_bias
    assert (
        quantization_error(W, refined)["mse"]
        <= quantization_error(W, biased)["mse"] * (1 + 1e-5)
    )


def test_finer_groups_lower_error():
    """
    Mean error over three 128 x 512 Gaussian matrices falls strictly with q
    at every group size and with the group size at every q.
    """
    mats = [gaussian_matrix(128, 512, seed) for seed in range(3)]
    groups = [32, 128, 0]
    errors = np.array(
        [
            [
                np.mean(
                    [quantization_error(W, quantize_bcq_greedy(W, q, g))["rel_fro"] for W in mats]
                )
                for g in groups
            ]
            for q in range(1, 5)
        ]
    )
    assert np.all(np.diff(errors, axis=0) < 0)
    assert np.all(np.diff(errors, axis=1) > 0)
    assert_allclose(errors[:, 0], [0.593, 0.350, 0.230, 0.167], atol=0.02)


def test_greedy_scale_equivariance():
    """
    Greedy on c * W picks the planes it picks on W with scales and biases
    multiplied by c.
    """
    rng = np.random.default_rng(10)
    W = rng.standard_normal((16, 96)).astype(np.float32)
    for bias in [False, True]:
        t = quantize_bcq_greedy(W, 3, group_size=32, bias=bias)
        for c in [4.0, 0.25]:
            scaled = quantize_bcq_greedy(np.float32(c) * W, 3, group_size=32, bias=bias)
            assert_array_equal(scaled.planes, t.planes)
            assert_array_equal(scaled.scales, np.float32(c) * t.scales)
            if bias:
                assert_array_equal(scaled.biases, np.float32(c) * t.biases)
        for c in [3.0, 0.1, 7.3]:
            scaled = quantize_bcq_greedy(np.float32(c) * W, 3, group_size=32, bias=bias)
            assert_array_equal(scaled.planes, t.planes)
            assert_allclose(scaled.scales, c * t.scales.astype(np.float64), rtol=1e-6)
            if bias:
                assert_allclose(
                    scaled.biases, c * t.biases.astype(np.float64), rtol=1e-6, atol=1e-6 * c
                )


def test_quantization_error_values():
    """
    W=[1], W_hat=[0.5]; and a matrix equal to its own dequantization.
    """
    t = BcqTensor.from_signs(np.ones((1, 1, 1)), [[[0.5]]])
    err = quantization_error([[1.0]], t)
    assert_almost_equal(err["mse"], 0.25)
    assert_almost_equal(err["rel_fro"], 0.5)
    assert_almost_equal(err["max_abs"], 0.5)

    t = quantize_bcq_greedy([[3.0, 1.0]], 2)
    err = quantization_error(dequantize(t), t)
    assert_equal(err, {"mse": 0.0, "rel_fro": 0.0, "max_abs": 0.0})

    with pytest.raises(ValueError):
        quantization_error(np.ones((2, 2)), t)


def test_quant_method():
    """
    Test method names, aliases and validation.
    """
    assert_equal(QuantMethod("bcq_greedy").name, "greedy")
    assert_equal(QuantMethod("rtn_uniform").name, "rtn")
    assert_equal(QuantMethod("alternating", iters=5).iters, 5)
    with pytest.raises(ValueError):
        QuantMethod("kmeans")
    with pytest.raises(ValueError):
        QuantMethod("alternating", iters=0)


def test_quantize_matrix_dispatch():
    """
    quantize_matrix runs the requested quantizer; rtn goes through
    uniform_to_bcq and carries a bias.
    """
    rng = np.random.default_rng(1)
    W = rng.standard_normal((8, 64)).astype(np.float32)

    t = quantize_matrix(W, 4, 16, method="rtn")
    assert t.has_bias
    u = quantize_rtn(W, 4, 16)
    tol = 4 * 4 * EPS * 2 * np.abs(W).max()
    assert_allclose(dequantize(t), u.dequantize(), rtol=0, atol=tol)

    assert_array_equal(quantize_matrix(W, 3, 16).planes, quantize_bcq_greedy(W, 3, 16).planes)
    t = quantize_matrix(W, 3, 16, method=QuantMethod("alternating", iters=2))
    assert_array_equal(t.planes, quantize_bcq_alternating(W, 3, 16, iters=2).planes)
