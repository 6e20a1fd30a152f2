"""Image grids and the concrete linear operators of the deblurring benchmark.

Conventions fixed here and relied on everywhere else:

* pixels are stored row-major as a flat float64 vector;
* the discrete gradient uses forward differences with replicate
  (Neumann) boundary, so the last row/column difference is zero and the
  squared operator norm is at most 8;
* the divergence is the exact adjoint of that gradient;
* the Haar transform is orthonormal, so its adjoint equals its inverse;
* the Gaussian blur is a periodic convolution with a kernel normalized
  to sum 1, making it self-adjoint with operator norm exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .linops import LinearMap, as_vector

__all__ = [
    "ImageGrid",
    "blur_map",
    "discrete_divergence",
    "discrete_gradient",
    "gaussian_blur",
    "gaussian_kernel",
    "gradient_map",
    "gradient_norm_bound",
    "haar_dwt",
    "haar_idwt",
    "haar_map",
    "read_pgm",
    "write_pgm",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """A grayscale image stored as a flat row-major pixel vector."""

    rows: int
    cols: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("image dimensions must be positive")
        pix = as_vector(self.pixels, self.rows * self.cols, name="pixels")
        object.__setattr__(self, "pixels", pix)

    def to_array(self):
        """Return the pixels as a (rows, cols) array view."""
        return self.pixels.reshape(self.rows, self.cols)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(arr.shape[0], arr.shape[1], arr.ravel().copy())


# ---------------------------------------------------------------------------
# discrete gradient / divergence

def discrete_gradient(img):
    """Forward-difference gradient, packed as one vector of length 2N.

    The first N entries are horizontal differences, the last N vertical
    ones; replicate boundary makes the trailing difference of each row
    and column zero.
    """
    a = img.to_array()
    dh = np.zeros_like(a)
    dh[:, :-1] = a[:, 1:] - a[:, :-1]
    dv = np.zeros_like(a)
    dv[:-1, :] = a[1:, :] - a[:-1, :]
    return np.concatenate([dh.ravel(), dv.ravel()])


def discrete_divergence(field, rows, cols):
    """Exact adjoint of :func:`discrete_gradient`; returns a flat vector."""
    field = as_vector(field, name="field")
    if field.shape[0] % 2 != 0:
        raise ValueError("field length must be even (packed horizontal/vertical)")
    n = rows * cols
    if field.shape[0] != 2 * n:
        raise ValueError(f"field length {field.shape[0]} does not match grid {rows}x{cols}")
    yh = field[:n].reshape(rows, cols)
    yv = field[n:].reshape(rows, cols)
    out = np.zeros((rows, cols))
    out[:, :-1] -= yh[:, :-1]
    out[:, 1:] += yh[:, :-1]
    out[:-1, :] -= yv[:-1, :]
    out[1:, :] += yv[:-1, :]
    return out.ravel()


def gradient_norm_bound(rows, cols):
    """Certified norm bound sqrt(8) for the packed discrete gradient."""
    if rows < 2 or cols < 2:
        raise ValueError("norm bound is stated for grids with at least 2 rows and columns")
    return math.sqrt(8.0)


def gradient_map(rows, cols):
    """The packed discrete gradient as a LinearMap (norm bound sqrt(8))."""
    n = rows * cols
    return LinearMap(
        n, 2 * n,
        lambda x: discrete_gradient(ImageGrid(rows, cols, x)),
        lambda y: discrete_divergence(y, rows, cols),
        math.sqrt(8.0),
    )


# ---------------------------------------------------------------------------
# orthonormal Haar transform

def _check_levels(rows, cols, levels):
    if levels < 1:
        raise ValueError("levels must be positive")
    div = 1 << levels
    if rows % div != 0 or cols % div != 0:
        raise ValueError(f"grid {rows}x{cols} not divisible by 2^{levels}")


def _dwt_level(block):
    lo = (block[:, 0::2] + block[:, 1::2]) / _SQRT2
    hi = (block[:, 0::2] - block[:, 1::2]) / _SQRT2
    merged = np.hstack([lo, hi])
    top = (merged[0::2, :] + merged[1::2, :]) / _SQRT2
    bot = (merged[0::2, :] - merged[1::2, :]) / _SQRT2
    return np.vstack([top, bot])


def _idwt_level(block):
    r2 = block.shape[0] // 2
    c2 = block.shape[1] // 2
    top, bot = block[:r2, :], block[r2:, :]
    merged = np.empty_like(block)
    merged[0::2, :] = (top + bot) / _SQRT2
    merged[1::2, :] = (top - bot) / _SQRT2
    lo, hi = merged[:, :c2], merged[:, c2:]
    out = np.empty_like(block)
    out[:, 0::2] = (lo + hi) / _SQRT2
    out[:, 1::2] = (lo - hi) / _SQRT2
    return out


def _dwt_flat(x, rows, cols, levels):
    a = np.array(x, dtype=float).reshape(rows, cols)
    r, c = rows, cols
    for _ in range(levels):
        a[:r, :c] = _dwt_level(a[:r, :c])
        r //= 2
        c //= 2
    return a.ravel()


def _idwt_flat(coeffs, rows, cols, levels):
    a = np.array(coeffs, dtype=float).reshape(rows, cols)
    for lev in reversed(range(levels)):
        r = rows >> lev
        c = cols >> lev
        a[:r, :c] = _idwt_level(a[:r, :c])
    return a.ravel()


def haar_dwt(img, levels):
    """Orthonormal 2-D Haar transform; returns flat coefficients.

    Subbands use the usual nested layout: the approximation block of
    each level sits in the top-left corner and is transformed again.
    """
    _check_levels(img.rows, img.cols, levels)
    return _dwt_flat(img.pixels, img.rows, img.cols, levels)


def haar_idwt(coeffs, rows, cols, levels):
    """Inverse (= adjoint) of :func:`haar_dwt`."""
    _check_levels(rows, cols, levels)
    coeffs = as_vector(coeffs, rows * cols, name="coeffs")
    return ImageGrid(rows, cols, _idwt_flat(coeffs, rows, cols, levels))


def haar_map(rows, cols, levels):
    """The orthonormal Haar transform as a LinearMap (norm bound 1)."""
    _check_levels(rows, cols, levels)
    n = rows * cols
    return LinearMap(
        n, n,
        lambda x: _dwt_flat(x, rows, cols, levels),
        lambda c: _idwt_flat(c, rows, cols, levels),
        1.0,
    )


# ---------------------------------------------------------------------------
# periodic Gaussian blur

def gaussian_kernel(size, std):
    """Truncated Gaussian sampled at integer offsets, normalized to sum 1."""
    if size % 2 != 1:
        raise ValueError("kernel size must be odd")
    if std <= 0:
        raise ValueError("std must be positive")
    half = size // 2
    t = np.arange(-half, half + 1, dtype=float)
    g = np.exp(-(t ** 2) / (2.0 * std * std))
    k = np.outer(g, g)
    return k / k.sum()


def gaussian_blur(img, size, std):
    """Periodic convolution with a normalized Gaussian kernel.

    The symmetric kernel and periodic boundary make the map self-adjoint
    and give operator norm exactly 1 (the kernel weights are nonnegative
    and sum to 1).
    """
    k = gaussian_kernel(size, std)
    out = ndimage.convolve(img.to_array(), k, mode="wrap")
    return ImageGrid(img.rows, img.cols, out.ravel())


def blur_map(rows, cols, size=9, std=4.0):
    """Periodic Gaussian blur as a self-adjoint LinearMap with norm 1."""
    k = gaussian_kernel(size, std)
    n = rows * cols

    def apply(x):
        return ndimage.convolve(
            np.asarray(x, dtype=float).reshape(rows, cols), k, mode="wrap"
        ).ravel()

    return LinearMap(n, n, apply, apply, 1.0)


# ---------------------------------------------------------------------------
# binary PGM input/output

def write_pgm(path, img, x_max=1.0, bits=8):
    """Write a binary (P5) portable graymap.

    Intensities in ``[0, x_max]`` are scaled to the integer range,
    rounded half-to-even, and clipped; 16-bit output is big-endian as
    the format requires.
    """
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    if x_max <= 0:
        raise ValueError("x_max must be positive")
    maxval = (1 << bits) - 1
    scaled = np.clip(np.round(img.pixels * (maxval / x_max)), 0.0, maxval)
    dtype = np.uint8 if bits == 8 else np.dtype(">u2")
    header = f"P5\n{img.cols} {img.rows}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + scaled.astype(dtype).tobytes())


def _next_token(buf, pos):
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("truncated PGM header")
    return buf[start:pos], pos


def read_pgm(path, x_max=1.0):
    """Read a binary (P5) portable graymap, scaling values to [0, x_max]."""
    buf = Path(path).read_bytes()
    magic, pos = _next_token(buf, 0)
    if magic != b"P5":
        raise ValueError(f"not a binary PGM file: magic {magic!r}")
    w_tok, pos = _next_token(buf, pos)
    h_tok, pos = _next_token(buf, pos)
    m_tok, pos = _next_token(buf, pos)
    cols, rows, maxval = int(w_tok), int(h_tok), int(m_tok)
    if not (0 < maxval < 65536):
        raise ValueError(f"invalid maxval {maxval}")
    pos += 1  # single whitespace byte separates header from raster
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    count = rows * cols
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
    pixels = data.astype(float) * (x_max / maxval)
    return ImageGrid(rows, cols, pixels)
