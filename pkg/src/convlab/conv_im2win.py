"""Im2win convolution: naive seven-loop form and the blocked micro-kernel form.

Both first materialize the flattened-window tensor and the permuted filter,
then run the convolution on those.  The optimized form processes w_ob output
columns per block; the reduction order for any single output element is a
fixed walk of the window (independent of w_ob and of the worker count), so
changing the block width never changes a single bit of the result.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .conv_direct import _alloc_output, _validate
from .im2win import Im2winTensor, PermutedFilter, im2win, permute_filter
from .tensor_core import Layout, Tensor
from .tuning import MicroKernelPlan, TuningParams


def conv_im2win_naive(inp: Tensor, filt: Tensor, s: int,
                      win: Im2winTensor | None = None,
                      pf: PermutedFilter | None = None) -> Tensor:
    """Transform, permute the filter, then the plain seven-loop nest."""
    p = _validate(inp, filt, s)
    if win is None:
        win = im2win(inp, p.h_f, p.w_f, s)
    if pf is None:
        pf = permute_filter(filt)
    out = _alloc_output(inp, p)
    zero = np.float32(0.0)
    wv, fv, ov = win.physical_view(), pf.physical_view(), out.physical_view()
    if inp.layout is Layout.NCHW:
        K.im2win_naive_nchw(wv, fv, ov, s, zero)
    elif inp.layout is Layout.NHWC:
        K.im2win_naive_nhwc(wv, fv, ov, s, zero)
    elif inp.layout is Layout.CHWN:
        K.im2win_naive_chwn(wv, fv, ov, s, zero)
    else:
        K.im2win_naive_chwn8(wv, fv, ov, s, zero)
    return out


def _window_flat_filter(pf: PermutedFilter) -> np.ndarray:
    # Contiguous (co, ci, wf*hf) walk matching the window-flat traversal
    # x = v*hf + u of the transformed tensor.
    pv = pf.physical_view()
    if pf.layout is Layout.NCHW:
        return pv.reshape(pf.c_o, pf.c_i, pf.w_f * pf.h_f)
    if pf.layout is Layout.CHWN:
        # [wf][hf][ci][co] -> [co][ci][wf*hf]
        return np.ascontiguousarray(pv.transpose(3, 2, 0, 1)).reshape(
            pf.c_o, pf.c_i, pf.w_f * pf.h_f)
    raise ValueError("window-flat filter is only used by NCHW/CHWN kernels")


def conv_im2win_opt(inp: Tensor, filt: Tensor, s: int,
                    tuning: TuningParams | None = None,
                    win: Im2winTensor | None = None,
                    pf: PermutedFilter | None = None) -> Tensor:
    """Blocked im2win convolution over a coalesced (batch x output-row) loop."""
    tuning = tuning or TuningParams()
    p = _validate(inp, filt, s)
    if win is None:
        win = im2win(inp, p.h_f, p.w_f, s)
    if pf is None:
        pf = permute_filter(filt)
    out = _alloc_output(inp, p)
    wv, ov = win.physical_view(), out.physical_view()
    if inp.layout is Layout.NHWC:
        K.im2win_opt_nhwc(wv, pf.physical_view(), ov, s, tuning.w_ob)
    elif inp.layout is Layout.NCHW:
        K.im2win_opt_nchw(wv, _window_flat_filter(pf), ov, s, p.h_f, tuning.w_ob)
    elif inp.layout is Layout.CHWN:
        K.im2win_opt_chwn(wv, _window_flat_filter(pf), ov, s, p.h_f, tuning.w_ob)
    else:
        K.im2win_opt_chwn8(wv, _window_flat_filter(pf), ov, s, p.h_f, tuning.w_ob)
    return out


def dot_product_block(win_row: np.ndarray, filt: np.ndarray, n0: int, s: int,
                      plan: MicroKernelPlan) -> np.ndarray:
    """Reference micro-kernel: w_ob adjacent output columns of one window row.

    win_row is one flattened window row [w_i*h_f][c_i] (NHWC base) and filt
    one output channel's permuted filter [w_f][h_f][c_i].  Every column uses
    the identical reduction order, so a w_ob block equals w_ob independent
    single-column calls bit for bit.
    """
    wf, hf, ci = filt.shape
    out = np.zeros(plan.w_ob, dtype=np.float32)
    for b in range(plan.w_ob):
        lanes = np.zeros(plan.n_vec, dtype=np.float32)
        for v in range(wf):
            x0 = (n0 + b) * s * hf + v * hf
            for u in range(hf):
                for r in range(ci):
                    lanes[r % plan.n_vec] += win_row[x0 + u, r] * filt[v, u, r]
        acc = np.float32(0.0)
        for l in range(plan.n_vec):
            acc += lanes[l]
        out[b] = acc
    return out
