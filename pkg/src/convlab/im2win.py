"""Window-flattening transform and the matching filter permutation.

The transform turns each output row's sweep of convolution windows into one
contiguous "window row": element (i, m, u + k*hf, r) of the result equals
input element (i, m*s + u, k, r), with the coordinate roles permuted per
base layout.  Adjacent output rows duplicate their hf - s overlapping input
rows; within a row every element is stored once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .tensor_core import (
    GROUP,
    InvalidProblemError,
    Layout,
    Tensor,
    aligned_zeros,
    output_extent,
    padded_batch,
)


@dataclass
class Im2winTensor:
    """Flattened-window tensor; dims follow the base layout.

    NHWC: [n][h_o][w_i*h_f][c]; NCHW: [n][c][h_o][w_i*h_f];
    CHWN: [c][h_o][w_i*h_f][n]; CHWN8 adds the 8-wide batch group innermost.
    """

    data: np.ndarray
    layout: Layout
    n: int
    c: int
    h_o: int
    win_w: int  # w_i * h_f

    def physical_view(self) -> np.ndarray:
        if self.layout is Layout.NCHW:
            return self.data.reshape(self.n, self.c, self.h_o, self.win_w)
        if self.layout is Layout.NHWC:
            return self.data.reshape(self.n, self.h_o, self.win_w, self.c)
        if self.layout is Layout.CHWN:
            return self.data.reshape(self.c, self.h_o, self.win_w, self.n)
        ng = padded_batch(self.n) // GROUP
        return self.data.reshape(ng, self.c, self.h_o, self.win_w, GROUP)


@dataclass
class PermutedFilter:
    """Filter permuted so kernel inner loops walk it with unit stride.

    NHWC base: [c_o][w_f][h_f][c_i] (NWHC); NCHW base: [c_o][c_i][w_f][h_f];
    CHWN/CHWN8 base: [w_f][h_f][c_i][c_o].
    """

    data: np.ndarray
    layout: Layout
    c_o: int
    c_i: int
    h_f: int
    w_f: int

    def physical_view(self) -> np.ndarray:
        if self.layout is Layout.NHWC:
            return self.data.reshape(self.c_o, self.w_f, self.h_f, self.c_i)
        if self.layout is Layout.NCHW:
            return self.data.reshape(self.c_o, self.c_i, self.w_f, self.h_f)
        return self.data.reshape(self.w_f, self.h_f, self.c_i, self.c_o)


def im2win(inp: Tensor, h_f: int, w_f: int, s: int) -> Im2winTensor:
    """Flatten each row of convolution windows into contiguous window rows."""
    h_o = output_extent(inp.h, h_f, s)
    output_extent(inp.w, w_f, s)  # validates the width too
    win_w = inp.w * h_f
    n, c = inp.n, inp.c
    if inp.layout is Layout.CHWN8 and inp.data.size != padded_batch(n) * c * inp.h * inp.w:
        raise InvalidProblemError("CHWN8 input batch is not padded to a multiple of 8")

    if inp.layout is Layout.CHWN8:
        elems = padded_batch(n) * c * h_o * win_w
    else:
        elems = n * c * h_o * win_w
    out = Im2winTensor(aligned_zeros(elems), inp.layout, n, c, h_o, win_w)
    src = inp.physical_view()
    dst = out.physical_view()
    if inp.layout is Layout.NCHW:
        K.im2win_pack_nchw(src, dst, s, h_f)
    elif inp.layout is Layout.NHWC:
        K.im2win_pack_nhwc(src, dst, s, h_f)
    elif inp.layout is Layout.CHWN:
        K.im2win_pack_chwn(src, dst, s, h_f)
    else:
        K.im2win_pack_chwn8(src, dst, s, h_f)
    return out


def permute_filter(filt: Tensor) -> PermutedFilter:
    """Reorder a filter tensor into its kernel-friendly permutation."""
    c_o, c_i, h_f, w_f = filt.dims
    pv = filt.physical_view()
    if filt.layout is Layout.NHWC:
        # [co][hf][wf][ci] -> [co][wf][hf][ci]
        perm = pv.transpose(0, 2, 1, 3)
    elif filt.layout is Layout.NCHW:
        # [co][ci][hf][wf] -> [co][ci][wf][hf]
        perm = pv.transpose(0, 1, 3, 2)
    elif filt.layout is Layout.CHWN:
        # [ci][hf][wf][co] -> [wf][hf][ci][co]
        perm = pv.transpose(2, 1, 0, 3)
    else:
        raise InvalidProblemError("filters are stored in NCHW, NHWC or CHWN")
    out = PermutedFilter(aligned_zeros(perm.size), filt.layout, c_o, c_i, h_f, w_f)
    out.physical_view()[:] = perm
    return out


def invert_permuted_filter(pf: PermutedFilter) -> Tensor:
    """Inverse permutation back to the original filter tensor."""
    filt = Tensor.empty((pf.c_o, pf.c_i, pf.h_f, pf.w_f),
                        pf.layout if pf.layout is not Layout.CHWN8 else Layout.CHWN)
    pv = pf.physical_view()
    if pf.layout is Layout.NHWC:
        filt.physical_view()[:] = pv.transpose(0, 2, 1, 3)
    elif pf.layout is Layout.NCHW:
        filt.physical_view()[:] = pv.transpose(0, 1, 3, 2)
    else:
        filt.physical_view()[:] = pv.transpose(2, 1, 0, 3)
    return filt


def im2win_buffer_elems(p) -> int:
    """Element count of the flattened-window buffer: n*c_i*h_o*w_i*h_f."""
    return p.n_i * p.c_i * p.h_o * p.w_i * p.h_f
