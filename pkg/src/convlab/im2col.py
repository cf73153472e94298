"""Baseline im2col convolution: window unfolding plus an in-repo blocked GEMM.

Every dot-product window is copied into one row of a 2-D matrix, one matrix
per image, and the convolution becomes a matrix product with the flattened
filter.  Only NCHW and NHWC inputs are accepted, mirroring the comparator
this stands in for.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .conv_direct import _alloc_output, _validate
from .tensor_core import ConvProblem, Layout, Tensor, UnsupportedLayoutError
from .tuning import TuningParams


def col_matrix_elems(p: ConvProblem) -> int:
    """Unfolded-matrix element count over the whole batch."""
    return p.n_i * p.h_o * p.w_o * p.c_i * p.h_f * p.w_f


def im2col(inp: Tensor, h_f: int, w_f: int, s: int) -> np.ndarray:
    """Per-image window matrices, stacked: (n, h_o*w_o, c_i*h_f*w_f).

    Row m*w_o + n holds the fully flattened window for output position
    (m, n); the column order follows the layout (channel-innermost for NHWC,
    window-innermost for NCHW).
    """
    if inp.layout not in (Layout.NCHW, Layout.NHWC):
        raise UnsupportedLayoutError(
            f"im2col supports NCHW and NHWC inputs, not {inp.layout.value}")
    from .tensor_core import output_shape

    h_o, w_o = output_shape(inp.h, inp.w, h_f, w_f, s)
    col = np.zeros((inp.n, h_o * w_o, inp.c * h_f * w_f), dtype=np.float32)
    if inp.layout is Layout.NCHW:
        K.im2col_pack_nchw(inp.physical_view(), col, s, h_f, w_f, h_o, w_o)
    else:
        K.im2col_pack_nhwc(inp.physical_view(), col, s, h_f, w_f, h_o, w_o)
    return col


def gemm(a: np.ndarray, b: np.ndarray, tiles: tuple | None = (64, 256, 64)) -> np.ndarray:
    """c = a @ b with cache blocking; tiles=None runs the scalar triple loop.

    k ascends for every output element whatever the tiling, so any (M_b,
    K_b, N_b) choice reproduces the untiled result.
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"GEMM dims mismatch: {a.shape} x {b.shape}")
    c = np.zeros((a.shape[0], b.shape[1]), dtype=a.dtype)
    if tiles is None:
        K.gemm_naive(a, b, c, c.dtype.type(0))
    else:
        mb, kb, nb = tiles
        if min(mb, kb, nb) < 1:
            raise ValueError("tile sizes must be positive")
        K.gemm_blocked(a, b, c, mb, kb, nb)
    return c


def _filter_matrix(filt: Tensor) -> np.ndarray:
    # (K, c_o) matching the im2col column order of the paired layout.
    pv = filt.physical_view()
    if filt.layout is Layout.NCHW:
        # [co][ci][hf][wf] -> rows (r*hf + u)*wf + v
        return np.ascontiguousarray(pv.transpose(1, 2, 3, 0).reshape(-1, filt.n))
    # NHWC [co][hf][wf][ci] -> rows (u*wf + v)*ci + r
    return np.ascontiguousarray(pv.transpose(1, 2, 3, 0).reshape(-1, filt.n))


def conv_im2col(inp: Tensor, filt: Tensor, s: int,
                tuning: TuningParams | None = None) -> Tensor:
    """Unfold, then one GEMM per image, reshaped back into the output tensor."""
    if inp.layout not in (Layout.NCHW, Layout.NHWC):
        raise UnsupportedLayoutError(
            f"im2col convolution supports NCHW and NHWC, not {inp.layout.value}")
    tuning = tuning or TuningParams()
    p = _validate(inp, filt, s)
    col = im2col(inp, p.h_f, p.w_f, s)
    fmat = _filter_matrix(filt)
    out = _alloc_output(inp, p)
    ov = out.physical_view()
    mb, kb, nb = tuning.gemm_tiles
    for i in range(p.n_i):
        if inp.layout is Layout.NHWC:
            ci = ov[i].reshape(p.h_o * p.w_o, p.c_o)
            K.gemm_blocked(col[i], fmat, ci, mb, kb, nb)
        else:
            cmat = np.zeros((p.h_o * p.w_o, p.c_o), dtype=np.float32)
            K.gemm_blocked(col[i], fmat, cmat, mb, kb, nb)
            ov[i] = cmat.reshape(p.h_o, p.w_o, p.c_o).transpose(2, 0, 1)
    return out
