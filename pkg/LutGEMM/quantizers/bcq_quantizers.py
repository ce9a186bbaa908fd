"""
Binary-coding quantizers for LutGEMM:
    quantize_bcq_greedy:
    - residual fitting, one bit-plane at a time
    quantize_bcq_alternating:
    - greedy initialization refined by alternating least-squares updates of
      the scaling factors and exhaustive updates of the binary codes
    quantize_matrix:
    - single entry point dispatching on a QuantMethod, including the
      round-to-nearest uniform path through uniform_to_bcq

Both BCQ quantizers can also emit a per-group bias (asymmetric BCQ).
All group computations are done in float64 and stored as float32.

Date: 15 Oct 2026
"""

import numpy as np

from ..bcq.bcq_tensor import BcqTensor, as_dense_matrix, dequantize
from .uniform_quantizers import group_weights, ungroup, quantize_rtn, uniform_to_bcq

# condition number above which the normal equations are treated as singular
SINGULAR_CONDITION = 1e12

# elements x sign patterns evaluated at once in the binary update
_PATTERN_BLOCK = 1 << 22


class QuantMethod:
    """
    Quantization method selector: one of 'rtn', 'greedy' or 'alternating'.
    The long names 'rtn_uniform', 'bcq_greedy' and 'bcq_alternating' are
    accepted too.
    """

    NAMES = ("rtn", "greedy", "alternating")
    ALIASES = {
        "rtn_uniform": "rtn",
        "bcq_greedy": "greedy",
        "bcq_alternating": "alternating",
    }

    def __init__(self, name, iters=3):
        """
        Parameters
        ----------
        name: str
            Method name.
        iters: int
            Alternating iterations. Ignored by the other methods.
            Default: 3
        """
        name = self.ALIASES.get(name, name)
        if name not in self.NAMES:
            raise ValueError(
                "method must be one of %s, got %s" % (", ".join(self.NAMES), name)
            )
        if iters < 0:
            raise ValueError("iters must be >= 0, got %d" % iters)
        if name == "alternating" and iters < 1:
            raise ValueError("the alternating method needs iters >= 1")
        self.name = name
        self.iters = int(iters)

    def __repr__(self):
        if self.name == "alternating":
            return "QuantMethod(alternating, iters=%d)" % self.iters
        return "QuantMethod(%s)" % self.name


def _check_input(W, bits):
    if bits < 1:
        raise ValueError("bits must be >= 1, got %s" % bits)
    W = np.asarray(W)
    if W.ndim != 2 or W.size == 0:
        raise ValueError("cannot quantize an empty group")
    return as_dense_matrix(W)


def _greedy_groups(Wg, mask, bits, bias):
    """
    Greedy residual fitting on grouped weights. Returns float64 scales
    (m, G, q), sign planes (q, m, G, g) and biases (m, G) or None.
    """
    count = mask.sum(axis=-1)
    z = None
    r = Wg * mask
    if bias:
        z = r.sum(axis=-1) / count
        r = (Wg - z[..., None]) * mask

    m, G, g = Wg.shape
    alphas = np.empty((m, G, bits))
    signs = np.empty((bits, m, G, g), dtype=np.int8)
    for i in range(bits):
        # sign(0) = +1
        b = np.where(r >= 0, 1.0, -1.0)
        a = np.abs(r).sum(axis=-1) / count
        r = (r - a[..., None] * b) * mask
        alphas[..., i] = a
        signs[i] = b
    return alphas, signs, z


def quantize_bcq_greedy(W, bits, group_size=0, bias=False):
    """
    Greedy BCQ. Per (row, group), starting from the residual r = w:
    b_i = sign(r) with sign(0) = +1, alpha_i = mean(|r|), r <- r - alpha_i*b_i.

    Parameters
    ----------
    W: array (m, n)
        Dense weights.
    bits: int
        Number of bit-planes q.
    group_size: int
        Columns per group, 0 for row-wise.
        Default: 0
    bias: bool
        If True, the group mean is removed first and stored as the bias z.
        Default: False

    Returns
    -------
    BcqTensor
    """
    W = _check_input(W, bits)
    n = W.shape[1]
    Wg, mask = group_weights(W, group_size)
    alphas, signs, z = _greedy_groups(Wg, mask, bits, bias)
    return BcqTensor.from_signs(
        ungroup(signs, n),
        alphas.astype(np.float32),
        group_size=group_size,
        biases=None if z is None else z.astype(np.float32),
    )


def _sign_patterns(bits):
    """All 2^q sign patterns, row k has +1 at plane i iff bit i of k is set."""
    k = np.arange(2**bits)[:, None]
    return np.where((k >> np.arange(bits)) & 1, 1.0, -1.0)


def _group_sse(Wg, mask, B, alpha, z):
    recon = np.einsum("mGgi,mGi->mGg", B, alpha)
    if z is not None:
        recon = recon + z[..., None]
    return (((Wg - recon) * mask) ** 2).sum(axis=-1)


def _solve_scales(Wg, mask, B, alpha, z):
    """
    Least-squares scales (and bias) for fixed binary codes. Groups whose
    normal equations are singular keep their previous values.
    """
    D = B * mask[..., None]
    if z is not None:
        D = np.concatenate([D, np.broadcast_to(mask[..., None], D.shape[:-1] + (1,))], axis=-1)
        params = np.concatenate([alpha, z[..., None]], axis=-1)
    else:
        params = alpha.copy()

    A = np.einsum("mGgi,mGgj->mGij", D, D)
    rhs = np.einsum("mGgi,mGg->mGi", D, Wg * mask)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(A)
    ok = np.isfinite(cond) & (cond < SINGULAR_CONDITION)
    if ok.any():
        params[ok] = np.linalg.solve(A[ok], rhs[ok][..., None])[..., 0]

    if z is not None:
        return params[..., :-1], params[..., -1]
    return params, None


def _update_codes(Wg, codes, alpha, z, patterns):
    """
    For fixed scales, pick per element the sign pattern closest to w. An
    element keeps its current pattern unless another one is strictly better.
    """
    values = np.einsum("ki,mGi->mGk", patterns, alpha)
    if z is not None:
        values = values + z[..., None]

    m, G, g = Wg.shape
    npat = patterns.shape[0]
    step = max(1, _PATTERN_BLOCK // max(1, G * g * npat))
    new_codes = codes.copy()
    for r0 in range(0, m, step):
        w = Wg[r0 : r0 + step, :, :, None]
        v = values[r0 : r0 + step, :, None, :]
        dist = np.abs(w - v)
        best = dist.argmin(axis=-1)
        best_dist = np.take_along_axis(dist, best[..., None], axis=-1)[..., 0]
        cur = codes[r0 : r0 + step]
        cur_dist = np.take_along_axis(dist, cur[..., None], axis=-1)[..., 0]
        new_codes[r0 : r0 + step] = np.where(best_dist < cur_dist, best, cur)
    return new_codes


def quantize_bcq_alternating(W, bits, group_size=0, iters=3, bias=False):
    """
    Alternating BCQ. Starts from the greedy solution and repeats `iters`
    times per (row, group):
    (a) with binary codes B fixed, alpha = (B^T B)^-1 B^T w (least squares,
        including the bias column when bias=True);
    (b) with alpha fixed, each element takes the sign pattern out of all 2^q
        that minimizes |w - sum_i alpha_i b_i|.
    Neither step can increase the group's squared error, so the result is
    never worse than greedy.

    Parameters
    ----------
    W: array (m, n)
        Dense weights.
    bits: int
        Number of bit-planes q.
    group_size: int
        Columns per group, 0 for row-wise.
        Default: 0
    iters: int
        Number of alternating rounds, >= 1.
        Default: 3
    bias: bool
        Fit a per-group bias z as well.
        Default: False

    Returns
    -------
    BcqTensor
    """
    if iters < 1:
        raise ValueError("iters must be >= 1, got %s" % iters)
    W = _check_input(W, bits)
    n = W.shape[1]
    Wg, mask = group_weights(W, group_size)
    alpha, signs, z = _greedy_groups(Wg, mask, bits, bias)

    patterns = _sign_patterns(bits)
    codes = np.zeros(Wg.shape, dtype=np.intp)
    for i in range(bits):
        codes |= (signs[i] > 0).astype(np.intp) << i

    B = patterns[codes]
    err = _group_sse(Wg, mask, B, alpha, z)
    for _ in range(iters):
        new_alpha, new_z = _solve_scales(Wg, mask, B, alpha, z)
        new_err = _group_sse(Wg, mask, B, new_alpha, new_z)
        accept = new_err <= err
        alpha = np.where(accept[..., None], new_alpha, alpha)
        if z is not None:
            z = np.where(accept, new_z, z)

        codes = _update_codes(Wg, codes, alpha, z, patterns)
        B = patterns[codes]
        err = _group_sse(Wg, mask, B, alpha, z)

    signs = np.moveaxis(B, -1, 0).astype(np.int8)
    return BcqTensor.from_signs(
        ungroup(signs, n),
        alpha.astype(np.float32),
        group_size=group_size,
        biases=None if z is None else z.astype(np.float32),
    )


def quantize_matrix(W, bits, group_size=0, method="greedy", iters=3, bias=False):
    """
    Quantize a dense matrix into a BcqTensor with the chosen method.

    Parameters
    ----------
    W: array (m, n)
        Dense weights.
    bits: int
        Number of bits q.
    group_size: int
        Columns per group, 0 for row-wise.
        Default: 0
    method: str or QuantMethod
        'rtn', 'greedy' or 'alternating'. 'rtn' always carries a bias, it is
        the uniform quantizer converted to extended BCQ.
        Default: 'greedy'
    iters: int
        Alternating iterations when method is a string.
        Default: 3
    bias: bool
        Asymmetric BCQ for the greedy and alternating methods.
        Default: False
    """
    if not isinstance(method, QuantMethod):
        method = QuantMethod(method, iters)
    if method.name == "rtn":
        return uniform_to_bcq(quantize_rtn(W, bits, group_size))
    if method.name == "greedy":
        return quantize_bcq_greedy(W, bits, group_size, bias=bias)
    return quantize_bcq_alternating(W, bits, group_size, iters=method.iters, bias=bias)


def quantization_error(W, t):
    """
    Error metrics between a dense matrix and the dequantized tensor.

    Returns
    -------
    dict with keys
        mse: mean squared error
        rel_fro: ||W - W_hat||_F / ||W||_F (0 when both norms are 0)
        max_abs: max |W - W_hat|
    """
    W = as_dense_matrix(W)
    if W.shape != t.shape:
        raise ValueError("shape mismatch: matrix %s, tensor %s" % (W.shape, t.shape))
    diff = W.astype(np.float64) - dequantize(t).astype(np.float64)
    err_norm = np.sqrt((diff**2).sum())
    w_norm = np.sqrt((W.astype(np.float64) ** 2).sum())
    if w_norm > 0:
        rel_fro = err_norm / w_norm
    else:
        rel_fro = 0.0 if err_norm == 0 else np.inf
    return {
        "mse": float((diff**2).mean()),
        "rel_fro": float(rel_fro),
        "max_abs": float(np.abs(diff).max()),
    }
