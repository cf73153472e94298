"""Aligned 4-D tensor storage with four memory layouts.

Tensors hold 32-bit floats in a flat, 64-byte-aligned buffer.  Logical dims
are always (n, c, h, w) no matter how the data is laid out; the layout tag
alone decides how a coordinate maps to a flat offset.  CHWN8 stores the batch
in groups of eight (zero-padded), with the 8-wide group as the fastest-moving
axis.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np

ALIGNMENT = 64  # bytes, one cache line
GROUP = 8       # CHWN8 batch group width

_MAGIC = b"CONVLAB1"
_HEADER = struct.Struct("<8sB4I7x")  # magic, layout tag, dims, pad to 32 bytes
assert _HEADER.size == 32


class InvalidProblemError(ValueError):
    """Convolution geometry that cannot produce a valid output."""


class UnsupportedLayoutError(ValueError):
    """Layout not supported by the requested algorithm."""


class Layout(enum.Enum):
    NCHW = "nchw"
    NHWC = "nhwc"
    CHWN = "chwn"
    CHWN8 = "chwn8"

    @property
    def tag(self) -> int:
        return _TAG_BY_LAYOUT[self]


_TAG_BY_LAYOUT = {Layout.NCHW: 0, Layout.NHWC: 1, Layout.CHWN: 2, Layout.CHWN8: 3}
_LAYOUT_BY_TAG = {v: k for k, v in _TAG_BY_LAYOUT.items()}


def aligned_zeros(num_elems: int) -> np.ndarray:
    """Zeroed float32 buffer whose base address is a multiple of ALIGNMENT."""
    raw = np.zeros(num_elems + ALIGNMENT // 4, dtype=np.float32)
    off = (-raw.ctypes.data) % ALIGNMENT // 4
    return raw[off:off + num_elems]


def padded_batch(n: int) -> int:
    return -(-n // GROUP) * GROUP


def storage_elems(dims, layout: Layout) -> int:
    n, c, h, w = dims
    if layout is Layout.CHWN8:
        return padded_batch(n) * c * h * w
    return n * c * h * w


@dataclass
class Tensor:
    """Flat aligned f32 buffer + logical (n, c, h, w) extents + layout tag."""

    data: np.ndarray
    dims: tuple
    layout: Layout

    @classmethod
    def empty(cls, dims, layout: Layout) -> "Tensor":
        dims = tuple(int(d) for d in dims)
        if len(dims) != 4 or any(d < 1 for d in dims):
            raise ValueError(f"dims must be four positive extents, got {dims}")
        return cls(aligned_zeros(storage_elems(dims, layout)), dims, layout)

    @property
    def n(self) -> int:
        return self.dims[0]

    @property
    def c(self) -> int:
        return self.dims[1]

    @property
    def h(self) -> int:
        return self.dims[2]

    @property
    def w(self) -> int:
        return self.dims[3]

    @property
    def batch_padded(self) -> int:
        """Physical batch extent (padded for CHWN8, logical otherwise)."""
        return padded_batch(self.n) if self.layout is Layout.CHWN8 else self.n

    def physical_view(self) -> np.ndarray:
        """The buffer reshaped to its physical (storage-order) axes."""
        n, c, h, w = self.dims
        if self.layout is Layout.NCHW:
            return self.data.reshape(n, c, h, w)
        if self.layout is Layout.NHWC:
            return self.data.reshape(n, h, w, c)
        if self.layout is Layout.CHWN:
            return self.data.reshape(c, h, w, n)
        return self.data.reshape(padded_batch(n) // GROUP, c, h, w, GROUP)

    def to_nchw_array(self) -> np.ndarray:
        """Logical (n, c, h, w) ndarray; padding lanes are dropped."""
        n = self.n
        pv = self.physical_view()
        if self.layout is Layout.NCHW:
            return np.ascontiguousarray(pv)
        if self.layout is Layout.NHWC:
            return np.ascontiguousarray(pv.transpose(0, 3, 1, 2))
        if self.layout is Layout.CHWN:
            return np.ascontiguousarray(pv.transpose(3, 0, 1, 2))
        # (g, c, h, w, l) -> (g*8+l, c, h, w)
        full = pv.transpose(0, 4, 1, 2, 3).reshape(-1, self.c, self.h, self.w)
        return np.ascontiguousarray(full[:n])

    @classmethod
    def from_nchw_array(cls, arr: np.ndarray, layout: Layout) -> "Tensor":
        arr = np.asarray(arr, dtype=np.float32)
        if arr.ndim != 4:
            raise ValueError("expected a 4-D array")
        t = cls.empty(arr.shape, layout)
        pv = t.physical_view()
        if layout is Layout.NCHW:
            pv[:] = arr
        elif layout is Layout.NHWC:
            pv[:] = arr.transpose(0, 2, 3, 1)
        elif layout is Layout.CHWN:
            pv[:] = arr.transpose(1, 2, 3, 0)
        else:
            n = arr.shape[0]
            # padded lanes stay zero
            flat = pv.transpose(0, 4, 1, 2, 3).reshape(-1, *arr.shape[1:])
            pv[:] = 0.0
            padded = np.zeros_like(flat)
            padded[:n] = arr
            pv[:] = padded.reshape(pv.shape[0], GROUP, *arr.shape[1:]).transpose(0, 2, 3, 4, 1)
        return t


def linear_index(t: Tensor, n: int, c: int, h: int, w: int) -> int:
    """Flat offset of logical coordinate (n, c, h, w) under t's layout."""
    N, C, H, W = t.dims
    if not (0 <= n < N and 0 <= c < C and 0 <= h < H and 0 <= w < W):
        raise IndexError(f"coordinate ({n},{c},{h},{w}) out of range for dims {t.dims}")
    if t.layout is Layout.NCHW:
        return ((n * C + c) * H + h) * W + w
    if t.layout is Layout.NHWC:
        return ((n * H + h) * W + w) * C + c
    if t.layout is Layout.CHWN:
        return ((c * H + h) * W + w) * N + n
    return ((((n // GROUP) * C + c) * H + h) * W + w) * GROUP + n % GROUP


def convert_layout(t: Tensor, target: Layout) -> Tensor:
    """Value-preserving relayout; CHWN8 targets pad the batch with zeros."""
    return Tensor.from_nchw_array(t.to_nchw_array(), target)


def output_extent(in_extent: int, filt_extent: int, stride: int) -> int:
    if stride < 1:
        raise InvalidProblemError(f"stride must be >= 1, got {stride}")
    if filt_extent > in_extent:
        raise InvalidProblemError(
            f"filter extent {filt_extent} exceeds input extent {in_extent}")
    return (in_extent - filt_extent) // stride + 1


def output_shape(h_i: int, w_i: int, h_f: int, w_f: int, s: int) -> tuple:
    """(h_o, w_o) for a valid problem, floor-division semantics."""
    return output_extent(h_i, h_f, s), output_extent(w_i, w_f, s)


@dataclass(frozen=True)
class ConvProblem:
    """Geometry of one convolution: shapes, stride, derived output extents."""

    n_i: int
    c_i: int
    c_o: int
    h_i: int
    w_i: int
    h_f: int
    w_f: int
    s: int

    def __post_init__(self):
        for name in ("n_i", "c_i", "c_o", "h_i", "w_i", "h_f", "w_f"):
            if getattr(self, name) < 1:
                raise InvalidProblemError(f"{name} must be positive")
        output_shape(self.h_i, self.w_i, self.h_f, self.w_f, self.s)

    @property
    def h_o(self) -> int:
        return output_extent(self.h_i, self.h_f, self.s)

    @property
    def w_o(self) -> int:
        return output_extent(self.w_i, self.w_f, self.s)

    @classmethod
    def from_tensors(cls, inp: Tensor, filt: Tensor, s: int) -> "ConvProblem":
        if inp.c != filt.c:
            raise ValueError(
                f"channel mismatch: input has {inp.c}, filter has {filt.c}")
        return cls(inp.n, inp.c, filt.n, inp.h, inp.w, filt.h, filt.w, s)


def fill(t: Tensor, *, constant: float | None = None, seed: int | None = None) -> None:
    """Fill with a constant, or seeded uniform values in [-1, 1].

    Values are assigned by logical coordinate, so two tensors of the same
    dims filled with the same seed hold the same logical values in any
    layout.  CHWN8 padding lanes are always reset to zero.
    """
    if (constant is None) == (seed is None):
        raise ValueError("pass exactly one of constant= or seed=")
    if constant is not None:
        if constant == 0.0:
            t.data[:] = 0.0
        else:
            _scatter_nchw(t, np.full(t.dims, np.float32(constant), dtype=np.float32))
        return
    rng = np.random.default_rng(seed)
    arr = rng.uniform(-1.0, 1.0, size=t.dims).astype(np.float32)
    _scatter_nchw(t, arr)


def _scatter_nchw(t: Tensor, arr: np.ndarray) -> None:
    src = Tensor.from_nchw_array(arr, t.layout)
    t.data[:] = src.data


def dump(t: Tensor, path) -> None:
    """Raw dump: 32-byte header + little-endian f32 buffer (physical order)."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, t.layout.tag, *t.dims))
        fh.write(t.data.astype("<f4", copy=False).tobytes())


def load(path) -> Tensor:
    with open(path, "rb") as fh:
        magic, tag, n, c, h, w = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        layout = _LAYOUT_BY_TAG[tag]
        dims = (n, c, h, w)
        raw = np.frombuffer(fh.read(), dtype="<f4")
    if raw.size != storage_elems(dims, layout):
        raise ValueError("truncated tensor file")
    t = Tensor.empty(dims, layout)
    t.data[:] = raw
    return t


def filter_layout_for(layout: Layout) -> Layout:
    """Storage layout a filter tensor uses alongside the given input layout."""
    if layout in (Layout.CHWN, Layout.CHWN8):
        return Layout.CHWN
    return layout
