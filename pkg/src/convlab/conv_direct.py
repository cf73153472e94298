"""Direct convolution: naive scalar oracle and layout-tuned variants.

Cross-correlation semantics throughout: for stride s,

    O(i, j, m, n) = sum_{r, u, v} I(i, r, m*s + u, n*s + v) * F(j, r, u, v)

with the output in the same layout as the input.  The naive form keeps one
scalar accumulator per output element; with f64 accumulation it serves as
the repo-wide oracle (summed in double, rounded once on store).
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .tensor_core import ConvProblem, Layout, Tensor, filter_layout_for
from .tuning import TuningParams


def _validate(inp: Tensor, filt: Tensor, s: int) -> ConvProblem:
    want = filter_layout_for(inp.layout)
    if filt.layout is not want:
        raise ValueError(
            f"filter layout {filt.layout.value} does not pair with input "
            f"layout {inp.layout.value} (expected {want.value})")
    return ConvProblem.from_tensors(inp, filt, s)


def _alloc_output(inp: Tensor, p: ConvProblem) -> Tensor:
    return Tensor.empty((p.n_i, p.c_o, p.h_o, p.w_o), inp.layout)


def conv_direct_naive(inp: Tensor, filt: Tensor, s: int, accum: str = "f32") -> Tensor:
    """Seven-loop direct convolution with a scalar AXPY innermost.

    accum="f64" accumulates each output in double precision and rounds once;
    that variant is the reference every other kernel is tested against.
    """
    if accum not in ("f32", "f64"):
        raise ValueError("accum must be 'f32' or 'f64'")
    p = _validate(inp, filt, s)
    out = _alloc_output(inp, p)
    zero = np.float32(0.0) if accum == "f32" else np.float64(0.0)
    iv, fv, ov = inp.physical_view(), filt.physical_view(), out.physical_view()
    if inp.layout is Layout.NCHW:
        K.direct_naive_nchw(iv, fv, ov, s, zero)
    elif inp.layout is Layout.NHWC:
        K.direct_naive_nhwc(iv, fv, ov, s, zero)
    elif inp.layout is Layout.CHWN:
        K.direct_naive_chwn(iv, fv, ov, s, zero)
    else:
        K.direct_naive_chwn8(iv, fv, ov, s, zero)
    return out


def _hoist_filter_chw(filt: Tensor) -> np.ndarray:
    # (ci, hf, wf, co) -> contiguous (co, ci, hf*wf); one filter element per
    # (r, u, v) step of the CHW-family kernels, walked with unit stride.
    pv = filt.physical_view()
    co = filt.n
    return np.ascontiguousarray(pv.transpose(3, 0, 1, 2)).reshape(co, filt.c, -1)


def conv_direct_opt(inp: Tensor, filt: Tensor, s: int,
                    tuning: TuningParams | None = None) -> Tensor:
    """Loop-reordered, register-blocked direct convolution.

    NHWC reduces over 8-lane channel chunks, NCHW over the filter row;
    CHWN/CHWN8 broadcast one filter element across an 8-wide batch group.
    Matches the naive result up to f32 reassociation.
    """
    tuning = tuning or TuningParams()
    p = _validate(inp, filt, s)
    out = _alloc_output(inp, p)
    iv, ov = inp.physical_view(), out.physical_view()
    if inp.layout is Layout.NCHW:
        K.direct_opt_nchw(iv, filt.physical_view(), ov, s, tuning.w_ob)
    elif inp.layout is Layout.NHWC:
        K.direct_opt_nhwc(iv, filt.physical_view(), ov, s, tuning.w_ob)
    elif inp.layout is Layout.CHWN:
        fh = _hoist_filter_chw(filt)
        K.direct_opt_chwn(iv, fh, ov, s, p.h_f, p.w_f, tuning.w_ob)
    else:
        fh = _hoist_filter_chw(filt)
        K.direct_opt_chwn8(iv, fh, ov, s, p.h_f, p.w_f, tuning.w_ob)
    return out


def flops(p: ConvProblem) -> int:
    """Multiply-add count of one convolution: 2*n*c_o*h_o*w_o*c_i*h_f*w_f."""
    return 2 * p.n_i * p.c_o * p.h_o * p.w_o * p.c_i * p.h_f * p.w_f
