"""Tuning knobs shared by the kernels and the benchmark harness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numba

from .tensor_core import Layout


@dataclass
class TuningParams:
    """Register-block width, vector width, worker count, GEMM tile sizes."""

    w_ob: int = 4
    n_vec: int = 8
    threads: int | None = None
    gemm_tiles: tuple = (64, 256, 64)

    def __post_init__(self):
        if self.w_ob < 1:
            raise ValueError("w_ob must be >= 1")
        if self.n_vec != 8:
            raise ValueError("only 8-lane vector groups are supported")


@dataclass
class MicroKernelPlan:
    """Shape of the register-blocked dot-product micro-kernel."""

    w_ob: int = 4
    n_vec: int = 8
    vec_dim: str = "channels"

    @classmethod
    def for_layout(cls, layout: Layout, w_ob: int = 4) -> "MicroKernelPlan":
        vec = {
            Layout.NHWC: "channels",
            Layout.NCHW: "window",
            Layout.CHWN: "batch",
            Layout.CHWN8: "batch-group",
        }[layout]
        return cls(w_ob=w_ob, n_vec=8, vec_dim=vec)


def set_worker_count(threads: int | None) -> int:
    """Clamp to what the runtime allows and apply; returns the effective count.

    Worker count never changes results: every kernel hands whole output rows
    to a worker and fixes the per-element reduction order.
    """
    limit = numba.config.NUMBA_NUM_THREADS
    if threads is None:
        return numba.get_num_threads()
    eff = max(1, min(int(threads), limit))
    numba.set_num_threads(eff)
    return eff
