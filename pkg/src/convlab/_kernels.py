"""Layout-specialized numba kernels.

Conventions shared by every kernel here:

* arrays arrive as C-contiguous views shaped in physical storage order
  (CHWN8 arrives 5-D with the 8-wide batch group as the trailing axis);
* the parallel loop always coalesces batch and output height so any worker
  count partitions whole output rows — per-element reduction order never
  depends on the number of workers;
* naive kernels keep one scalar accumulator and the textbook summation
  order; optimized kernels for NHWC/NCHW carry fastmath so LLVM may
  vectorize the per-column reduction, while the CHWN/CHWN8 and GEMM kernels
  accumulate in source order only (their lane math is bit-exact and
  independent of the blocking width).
"""

import numpy as np
from numba import njit, prange

U = np.uint64


# --------------------------------------------------------------------------
# direct convolution, naive: scalar AXPY, summation order (r, u, v)
# --------------------------------------------------------------------------

@njit(parallel=True, cache=True)
def direct_naive_nchw(inp, flt, out, s, zero):
    ni, ci, hi, wi = inp.shape
    co, _, hf, wf = flt.shape
    ho, wo = out.shape[2], out.shape[3]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            for n in range(wo):
                acc = zero
                for r in range(ci):
                    for u in range(hf):
                        for v in range(wf):
                            acc += inp[i, r, m * s + u, n * s + v] * flt[j, r, u, v]
                out[i, j, m, n] = acc


@njit(parallel=True, cache=True)
def direct_naive_nhwc(inp, flt, out, s, zero):
    ni, hi, wi, ci = inp.shape
    co, hf, wf, _ = flt.shape
    ho, wo = out.shape[1], out.shape[2]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            for n in range(wo):
                acc = zero
                for r in range(ci):
                    for u in range(hf):
                        for v in range(wf):
                            acc += inp[i, m * s + u, n * s + v, r] * flt[j, u, v, r]
                out[i, m, n, j] = acc


@njit(parallel=True, cache=True)
def direct_naive_chwn(inp, flt, out, s, zero):
    # inp (ci, hi, wi, ni), flt (ci, hf, wf, co), out (co, ho, wo, ni)
    ci, hi, wi, ni = inp.shape
    _, hf, wf, co = flt.shape
    ho, wo = out.shape[1], out.shape[2]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            for n in range(wo):
                acc = zero
                for r in range(ci):
                    for u in range(hf):
                        for v in range(wf):
                            acc += inp[r, m * s + u, n * s + v, i] * flt[r, u, v, j]
                out[j, m, n, i] = acc


@njit(parallel=True, cache=True)
def direct_naive_chwn8(inp, flt, out, s, zero):
    # inp (ng, ci, hi, wi, 8), flt (ci, hf, wf, co), out (ng, co, ho, wo, 8)
    ng, ci, hi, wi, _ = inp.shape
    _, hf, wf, co = flt.shape
    ho, wo = out.shape[2], out.shape[3]
    ni = ng * 8
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        g = i // 8
        l = i % 8
        for j in range(co):
            for n in range(wo):
                acc = zero
                for r in range(ci):
                    for u in range(hf):
                        for v in range(wf):
                            acc += inp[g, r, m * s + u, n * s + v, l] * flt[r, u, v, j]
                out[g, j, m, n, l] = acc


# --------------------------------------------------------------------------
# direct convolution, optimized
# --------------------------------------------------------------------------

@njit(parallel=True, cache=True, fastmath=True)
def direct_opt_nhwc(inp, flt, out, s, wob):
    # per-column reduction; contiguous (v, r) runs vectorize
    ni, hi, wi, ci = inp.shape
    co, hf, wf, _ = flt.shape
    ho, wo = out.shape[1], out.shape[2]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            nb = 0
            while nb < wo:
                blk = min(wob, wo - nb)
                for b in range(blk):
                    n = nb + b
                    acc = np.float32(0.0)
                    for u in range(hf):
                        for v in range(wf):
                            for r in range(ci):
                                acc += inp[i, m * s + u, n * s + v, r] * flt[j, u, v, r]
                    out[i, m, n, j] = acc
                nb += blk


@njit(parallel=True, cache=True, fastmath=True)
def direct_opt_nchw(inp, flt, out, s, wob):
    ni, ci, hi, wi = inp.shape
    co, _, hf, wf = flt.shape
    ho, wo = out.shape[2], out.shape[3]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            nb = 0
            while nb < wo:
                blk = min(wob, wo - nb)
                for b in range(blk):
                    n = nb + b
                    w0 = U(n * s)
                    acc = np.float32(0.0)
                    for r in range(ci):
                        for u in range(hf):
                            for v in range(wf):
                                acc += inp[i, r, m * s + u, w0 + U(v)] * flt[j, r, u, v]
                    out[i, j, m, n] = acc
                nb += blk


@njit(parallel=True, cache=True)
def direct_opt_chwn(inp, fh, out, s, hf, wf, wob):
    # inp (ci, hi, wi, ni), fh hoisted (co, ci, hf*wf), out (co, ho, wo, ni).
    # 8-wide batch lanes, block of wob output columns accumulated in place;
    # per-element order is (r, u, v) regardless of wob or lane count.
    ci, hi, wi, ni = inp.shape
    co = fh.shape[0]
    ho, wo = out.shape[1], out.shape[2]
    ngc = (ni + 7) // 8
    for gm in prange(ngc * ho):
        g = gm // ho
        m = gm % ho
        n0 = U(g * 8)
        lanes = min(8, ni - g * 8)
        for j in range(co):
            nb = 0
            while nb < wo:
                blk = min(wob, wo - nb)
                for b in range(blk):
                    for l in range(lanes):
                        out[j, m, nb + b, n0 + U(l)] = 0.0
                for r in range(ci):
                    for u in range(hf):
                        for v in range(wf):
                            f = fh[j, r, u * wf + v]
                            for b in range(blk):
                                n = nb + b
                                for l in range(lanes):
                                    out[j, m, n, n0 + U(l)] += (
                                        inp[r, m * s + u, n * s + v, n0 + U(l)] * f)
                nb += blk


@njit(parallel=True, cache=True)
def direct_opt_chwn8(inp, fh, out, s, hf, wf, wob):
    # inp (ng, ci, hi, wi, 8), fh (co, ci, hf*wf), out (ng, co, ho, wo, 8)
    ng, ci, hi, wi, _ = inp.shape
    co = fh.shape[0]
    ho, wo = out.shape[2], out.shape[3]
    for gm in prange(ng * ho):
        g = gm // ho
        m = gm % ho
        for j in range(co):
            nb = 0
            while nb < wo:
                blk = min(wob, wo - nb)
                for b in range(blk):
                    for l in range(8):
                        out[g, j, m, nb + b, l] = 0.0
                for r in range(ci):
                    for u in range(hf):
                        for v in range(wf):
                            f = fh[j, r, u * wf + v]
                            for b in range(blk):
                                n = nb + b
                                for l in range(8):
                                    out[g, j, m, n, l] += inp[g, r, m * s + u, n * s + v, l] * f
                nb += blk


# --------------------------------------------------------------------------
# im2win transform: win[..., u + k*hf, ...] = inp[..., m*s + u, k, ...]
# --------------------------------------------------------------------------

@njit(parallel=True, cache=True)
def im2win_pack_nchw(inp, win, s, hf):
    ni, ci, hi, wi = inp.shape
    ho = win.shape[2]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for c in range(ci):
            for k in range(wi):
                for u in range(hf):
                    win[i, c, m, u + k * hf] = inp[i, c, m * s + u, k]


@njit(parallel=True, cache=True)
def im2win_pack_nhwc(inp, win, s, hf):
    ni, hi, wi, ci = inp.shape
    ho = win.shape[1]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for k in range(wi):
            for u in range(hf):
                for r in range(ci):
                    win[i, m, u + k * hf, r] = inp[i, m * s + u, k, r]


@njit(parallel=True, cache=True)
def im2win_pack_chwn(inp, win, s, hf):
    # inp (ci, hi, wi, ni) -> win (ci, ho, wi*hf, ni)
    ci, hi, wi, ni = inp.shape
    ho = win.shape[1]
    for cm in prange(ci * ho):
        c = cm // ho
        m = cm % ho
        for k in range(wi):
            for u in range(hf):
                for n in range(ni):
                    win[c, m, u + k * hf, n] = inp[c, m * s + u, k, n]


@njit(parallel=True, cache=True)
def im2win_pack_chwn8(inp, win, s, hf):
    # inp (ng, ci, hi, wi, 8) -> win (ng, ci, ho, wi*hf, 8)
    ng, ci, hi, wi, _ = inp.shape
    ho = win.shape[2]
    for gm in prange(ng * ho):
        g = gm // ho
        m = gm % ho
        for c in range(ci):
            for k in range(wi):
                for u in range(hf):
                    for l in range(8):
                        win[g, c, m, u + k * hf, l] = inp[g, c, m * s + u, k, l]


# --------------------------------------------------------------------------
# im2win convolution, naive: seven loops, AXPY order (v, u, r)
# --------------------------------------------------------------------------

@njit(parallel=True, cache=True)
def im2win_naive_nchw(win, pf, out, s, zero):
    # win (ni, ci, ho, wi*hf), pf (co, ci, wf, hf), out (ni, co, ho, wo)
    ni, ci, ho, wflat = win.shape
    co, _, wf, hf = pf.shape
    wo = out.shape[3]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            for n in range(wo):
                acc = zero
                for v in range(wf):
                    for u in range(hf):
                        for r in range(ci):
                            acc += win[i, r, m, (n * s + v) * hf + u] * pf[j, r, v, u]
                out[i, j, m, n] = acc


@njit(parallel=True, cache=True)
def im2win_naive_nhwc(win, pf, out, s, zero):
    # win (ni, ho, wi*hf, ci), pf (co, wf, hf, ci), out (ni, ho, wo, co)
    ni, ho, wflat, ci = win.shape
    co, wf, hf, _ = pf.shape
    wo = out.shape[2]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            for n in range(wo):
                acc = zero
                for v in range(wf):
                    for u in range(hf):
                        for r in range(ci):
                            acc += win[i, m, (n * s + v) * hf + u, r] * pf[j, v, u, r]
                out[i, m, n, j] = acc


@njit(parallel=True, cache=True)
def im2win_naive_chwn(win, pf, out, s, zero):
    # win (ci, ho, wi*hf, ni), pf (wf, hf, ci, co), out (co, ho, wo, ni)
    ci, ho, wflat, ni = win.shape
    wf, hf, _, co = pf.shape
    wo = out.shape[2]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            for n in range(wo):
                acc = zero
                for v in range(wf):
                    for u in range(hf):
                        for r in range(ci):
                            acc += win[r, m, (n * s + v) * hf + u, i] * pf[v, u, r, j]
                out[j, m, n, i] = acc


@njit(parallel=True, cache=True)
def im2win_naive_chwn8(win, pf, out, s, zero):
    # win (ng, ci, ho, wi*hf, 8), pf (wf, hf, ci, co), out (ng, co, ho, wo, 8)
    ng, ci, ho, wflat, _ = win.shape
    wf, hf, _, co = pf.shape
    wo = out.shape[3]
    ni = ng * 8
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        g = i // 8
        l = i % 8
        for j in range(co):
            for n in range(wo):
                acc = zero
                for v in range(wf):
                    for u in range(hf):
                        for r in range(ci):
                            acc += win[g, r, m, (n * s + v) * hf + u, l] * pf[v, u, r, j]
                out[g, j, m, n, l] = acc


# --------------------------------------------------------------------------
# im2win convolution, optimized
# --------------------------------------------------------------------------

@njit(parallel=True, cache=True, fastmath=True)
def im2win_opt_nhwc(win, pf, out, s, wob):
    # One shared per-column body: the reduction order for an output element
    # is identical for every wob, so blocking is bit-transparent.
    ni, ho, wflat, ci = win.shape
    co, wf, hf, _ = pf.shape
    wo = out.shape[2]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            nb = 0
            while nb < wo:
                blk = min(wob, wo - nb)
                for b in range(blk):
                    n = nb + b
                    acc = np.float32(0.0)
                    for v in range(wf):
                        x0 = n * s * hf + v * hf
                        for u in range(hf):
                            for r in range(ci):
                                acc += win[i, m, x0 + u, r] * pf[j, v, u, r]
                    out[i, m, n, j] = acc
                nb += blk


@njit(parallel=True, cache=True, fastmath=True)
def im2win_opt_nchw(win, fl, out, s, hf, wob):
    # win (ni, ci, ho, wi*hf), fl (co, ci, wf*hf) window-flat filter
    ni, ci, ho, wflat = win.shape
    co = fl.shape[0]
    whf = fl.shape[2]
    wo = out.shape[3]
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for j in range(co):
            nb = 0
            while nb < wo:
                blk = min(wob, wo - nb)
                for b in range(blk):
                    n = nb + b
                    x0 = U(n * s * hf)
                    acc = np.float32(0.0)
                    for c in range(ci):
                        for q in range(whf):
                            acc += win[i, c, m, x0 + U(q)] * fl[j, c, q]
                    out[i, j, m, n] = acc
                nb += blk


@njit(parallel=True, cache=True)
def im2win_opt_chwn(win, fh, out, s, hf, wob):
    # win (ci, ho, wi*hf, ni), fh (co, ci, wf*hf), out (co, ho, wo, ni).
    # Eight batch lanes per vector step; wob output columns per block.
    ci, ho, wflat, ni = win.shape
    co = fh.shape[0]
    whf = fh.shape[2]
    wo = out.shape[2]
    ngc = (ni + 7) // 8
    for gm in prange(ngc * ho):
        g = gm // ho
        m = gm % ho
        n0 = U(g * 8)
        lanes = min(8, ni - g * 8)
        for j in range(co):
            nb = 0
            while nb < wo:
                blk = min(wob, wo - nb)
                for b in range(blk):
                    for l in range(lanes):
                        out[j, m, nb + b, n0 + U(l)] = 0.0
                for c in range(ci):
                    for x in range(whf):
                        f = fh[j, c, x]
                        for b in range(blk):
                            xw = (nb + b) * s * hf + x
                            for l in range(lanes):
                                out[j, m, nb + b, n0 + U(l)] += win[c, m, xw, n0 + U(l)] * f
                nb += blk


@njit(parallel=True, cache=True)
def im2win_opt_chwn8(win, fh, out, s, hf, wob):
    # win (ng, ci, ho, wi*hf, 8), fh (co, ci, wf*hf), out (ng, co, ho, wo, 8)
    ng, ci, ho, wflat, _ = win.shape
    co = fh.shape[0]
    whf = fh.shape[2]
    wo = out.shape[3]
    for gm in prange(ng * ho):
        g = gm // ho
        m = gm % ho
        for j in range(co):
            nb = 0
            while nb < wo:
                blk = min(wob, wo - nb)
                for b in range(blk):
                    for l in range(8):
                        out[g, j, m, nb + b, l] = 0.0
                for c in range(ci):
                    for x in range(whf):
                        f = fh[j, c, x]
                        for b in range(blk):
                            xw = (nb + b) * s * hf + x
                            for l in range(8):
                                out[g, j, m, nb + b, l] += win[g, c, m, xw, l] * f
                nb += blk


# --------------------------------------------------------------------------
# im2col packing and GEMM
# --------------------------------------------------------------------------

@njit(parallel=True, cache=True)
def im2col_pack_nchw(inp, col, s, hf, wf, ho, wo):
    # col (ni, ho*wo, ci*hf*wf), column order (r*hf + u)*wf + v
    ni, ci, hi, wi = inp.shape
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for n in range(wo):
            row = m * wo + n
            for r in range(ci):
                for u in range(hf):
                    for v in range(wf):
                        col[i, row, (r * hf + u) * wf + v] = inp[i, r, m * s + u, n * s + v]


@njit(parallel=True, cache=True)
def im2col_pack_nhwc(inp, col, s, hf, wf, ho, wo):
    # col (ni, ho*wo, hf*wf*ci), column order (u*wf + v)*ci + r
    ni, hi, wi, ci = inp.shape
    for im in prange(ni * ho):
        i = im // ho
        m = im % ho
        for n in range(wo):
            row = m * wo + n
            for u in range(hf):
                for v in range(wf):
                    for r in range(ci):
                        col[i, row, (u * wf + v) * ci + r] = inp[i, m * s + u, n * s + v, r]


@njit(parallel=True, cache=True)
def gemm_naive(a, b, c, zero):
    M, K = a.shape
    N = b.shape[1]
    for i in prange(M):
        for j in range(N):
            acc = zero
            for k in range(K):
                acc += a[i, k] * b[k, j]
            c[i, j] = acc


@njit(parallel=True, cache=True)
def gemm_blocked(a, b, c, mb, kb, nb):
    # c += a @ b with (mb, kb, nb) tiles; k ascends for every element no
    # matter the tiling, so tile sizes never change the result.
    M, K = a.shape
    N = b.shape[1]
    for i0 in prange((M + mb - 1) // mb):
        ilo = i0 * mb
        ihi = min(ilo + mb, M)
        for klo in range(0, K, kb):
            khi = min(klo + kb, K)
            for jlo in range(0, N, nb):
                jhi = min(jlo + nb, N)
                at = a[ilo:ihi, klo:khi]
                bt = b[klo:khi, jlo:jhi]
                ct = c[ilo:ihi, jlo:jhi]
                for i in range(at.shape[0]):
                    for k in range(at.shape[1]):
                        aik = at[i, k]
                        for j in range(bt.shape[1]):
                            ct[i, j] += aik * bt[k, j]
