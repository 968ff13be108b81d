"""Periodic grid, complex fields and Fourier-multiplier machinery.

Everything lives on a square periodic box [-S, S)^2 sampled at N x N nodes
(N a power of two, S >= 2 so that coefficients supported in the unit disk sit
well inside the box).  The discrete Fourier transform uses the convention

    fhat(xi) = sum_z f(z) exp(-i(xi1*x + xi2*y)) h^2,

with xi on the lattice (2*pi/(N*h)) * {-N/2, ..., N/2-1}^2.  Frequencies are
bundled as complex numbers xi = xi1 + i*xi2 so that the Wirtinger derivatives
become the multipliers  d/dz ~ (i/2)*conj(xi)  and  d/dzbar ~ (i/2)*xi.

The unimodular modulations e_k(z) = exp(i(k*z + conj(k*z))) pair a *spectral*
parameter k with the internal frequency xi = 2*conj(k); `to_internal_frequency`
and `to_spectral_parameter` implement that bridge.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
from scipy import fft as sfft

from .errors import InvalidGrid

__all__ = [
    "Grid",
    "ComplexField",
    "FourierSymbol",
    "build_grid",
    "apply_symbol",
    "lp_norm",
    "disk_mask",
    "modulation",
    "to_internal_frequency",
    "to_spectral_parameter",
    "dz_symbol",
    "dbar_symbol",
    "save_field",
    "load_field",
]

_MAGIC = b"BLAB1"


@dataclass(frozen=True)
class Grid:
    """Square periodic grid: N nodes per axis on [-S, S), spacing h = 2S/N."""

    N: int
    S: float

    @property
    def h(self) -> float:
        return 2.0 * self.S / self.N

    @property
    def nyquist(self) -> float:
        """Largest representable frequency magnitude per axis, pi/h."""
        return np.pi / self.h

    def nodes(self) -> np.ndarray:
        """Complex node coordinates z[j, k] = (-S + j h) + i(-S + k h)."""
        return _nodes(self.N, self.S)

    def freqs(self) -> np.ndarray:
        """Complex frequency lattice xi[j, k] = xi1 + i xi2 (fft ordering)."""
        return _freqs(self.N, self.S)


@lru_cache(maxsize=16)
def _nodes(N: int, S: float) -> np.ndarray:
    x = -S + (2.0 * S / N) * np.arange(N)
    X, Y = np.meshgrid(x, x, indexing="ij")
    z = X + 1j * Y
    z.setflags(write=False)
    return z


@lru_cache(maxsize=16)
def _freqs(N: int, S: float) -> np.ndarray:
    xi = 2.0 * np.pi * np.fft.fftfreq(N, d=2.0 * S / N)
    X1, X2 = np.meshgrid(xi, xi, indexing="ij")
    out = X1 + 1j * X2
    out.setflags(write=False)
    return out


def build_grid(N: int, S: float) -> Grid:
    """Validate and build a grid; N must be a power of two >= 8, S >= 2."""
    if not isinstance(N, (int, np.integer)) or N < 8 or (N & (N - 1)) != 0:
        raise InvalidGrid(f"N must be a power of two >= 8, got {N!r}")
    S = float(S)
    if not np.isfinite(S) or S < 2.0:
        raise InvalidGrid(f"S must be >= 2, got {S!r}")
    return Grid(int(N), S)


class ComplexField:
    """Immutable complex samples on a grid.

    The sample array is (N, N) in row-major order, index [j, k] at node
    (-S + j h) + i(-S + k h).  Arithmetic is defined between fields on the
    identical grid and with scalars; all constructors reject non-finite data.
    """

    __slots__ = ("grid", "data", "tag")

    def __init__(self, grid: Grid, data: np.ndarray, tag: str = ""):
        arr = np.ascontiguousarray(data, dtype=np.complex128)
        if arr.shape != (grid.N, grid.N):
            raise ValueError(f"expected shape {(grid.N, grid.N)}, got {arr.shape}")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("field contains non-finite samples")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "tag", tag)

    def __setattr__(self, name, value):
        raise AttributeError("ComplexField is immutable")

    def _same_grid(self, other: "ComplexField"):
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, ComplexField):
            self._same_grid(other)
            return ComplexField(self.grid, self.data + other.data)
        return ComplexField(self.grid, self.data + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ComplexField):
            self._same_grid(other)
            return ComplexField(self.grid, self.data - other.data)
        return ComplexField(self.grid, self.data - other)

    def __rsub__(self, other):
        return ComplexField(self.grid, other - self.data)

    def __mul__(self, other):
        if isinstance(other, ComplexField):
            self._same_grid(other)
            return ComplexField(self.grid, self.data * other.data)
        return ComplexField(self.grid, self.data * other)

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexField(self.grid, -self.data)

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.data), self.tag)

    def with_tag(self, tag: str) -> "ComplexField":
        return ComplexField(self.grid, self.data, tag)

    def __repr__(self):
        g = self.grid
        return f"ComplexField(N={g.N}, S={g.S}, tag={self.tag!r})"


@dataclass(frozen=True)
class FourierSymbol:
    """Pointwise multiplier rule on the frequency lattice.

    ``rule`` maps an array of complex frequencies to multiplier values and must
    be pure.  Symbols that are singular at xi = 0 must declare ``zero_mode``:
    either "annihilate" (multiplier forced to 0 there) or an explicit complex
    value.  Regular symbols may leave it as None, in which case the rule is
    evaluated at 0 like everywhere else.
    """

    rule: Callable[[np.ndarray], np.ndarray]
    zero_mode: Union[None, str, complex] = None
    name: str = ""

    def on_grid(self, grid: Grid) -> np.ndarray:
        xi = grid.freqs()
        if self.zero_mode is None:
            return np.asarray(self.rule(xi), dtype=np.complex128)
        safe = xi.copy()
        safe[0, 0] = 1.0  # placeholder, overwritten below
        vals = np.asarray(self.rule(safe), dtype=np.complex128)
        vals = vals.copy()
        vals[0, 0] = 0.0 if self.zero_mode == "annihilate" else complex(self.zero_mode)
        return vals

    def __mul__(self, other: "FourierSymbol") -> "FourierSymbol":
        def prod(xi, a=self, b=other):
            return a.rule(xi) * b.rule(xi)

        zm: Union[None, str, complex]
        if self.zero_mode is None and other.zero_mode is None:
            zm = None
        elif "annihilate" in (self.zero_mode, other.zero_mode):
            zm = "annihilate"
        else:
            za = self.zero_mode if self.zero_mode is not None else self.rule(np.array([0j]))[0]
            zb = other.zero_mode if other.zero_mode is not None else other.rule(np.array([0j]))[0]
            zm = complex(za) * complex(zb)
        return FourierSymbol(prod, zm, f"{self.name}*{other.name}")


def dz_symbol() -> FourierSymbol:
    """Wirtinger d/dz: multiplier (i/2) * conj(xi)."""
    return FourierSymbol(lambda xi: 0.5j * np.conj(xi), None, "dz")


def dbar_symbol() -> FourierSymbol:
    """Wirtinger d/dzbar: multiplier (i/2) * xi."""
    return FourierSymbol(lambda xi: 0.5j * xi, None, "dbar")


def apply_symbol(f: ComplexField, symbol: FourierSymbol) -> ComplexField:
    """Inverse transform of symbol(xi) * fhat(xi); exact on discrete plane waves."""
    F = sfft.fft2(f.data)
    F *= symbol.on_grid(f.grid)
    return ComplexField(f.grid, sfft.ifft2(F))


def lp_norm(f: ComplexField, p: float, mask: Optional[np.ndarray] = None) -> float:
    """(sum |f|^p h^2)^(1/p) over the mask (default: whole grid); p = inf -> max.

    The mask may be boolean or a nonnegative weight array (fractional cell
    coverage); for p = inf only the boolean support of the mask is used.
    """
    if not (p > 0):
        raise ValueError("p must be positive")
    a = np.abs(f.data)
    if np.isinf(p):
        if mask is None:
            return float(a.max())
        sel = np.asarray(mask) > 0
        return float(a[sel].max()) if np.any(sel) else 0.0
    h2 = f.grid.h ** 2
    if mask is None:
        s = np.sum(a ** p)
    else:
        s = np.sum(a ** p * np.asarray(mask, dtype=float))
    return float((s * h2) ** (1.0 / p))


def disk_mask(grid: Grid, radius: float = 1.0, center: complex = 0j) -> np.ndarray:
    """Boolean mask of nodes with |z - center| < radius."""
    return np.abs(grid.nodes() - center) < radius


def to_internal_frequency(k: complex) -> complex:
    """Internal frequency of the modulation e_k: xi = 2 * conj(k)."""
    return 2.0 * np.conj(k)


def to_spectral_parameter(xi: complex) -> complex:
    """Inverse of `to_internal_frequency`."""
    return 0.5 * np.conj(xi)


def modulation(grid: Grid, k: complex) -> ComplexField:
    """Unimodular e_k(z) = exp(i(kz + conj(kz))) = exp(2i Re(kz)) sampled on the grid."""
    phase = 2.0 * np.real(k * grid.nodes())
    return ComplexField(grid, np.exp(1j * phase), f"e_k({k})")


def parseval_norm2(f: ComplexField) -> float:
    """L2 norm computed on the frequency side; equals lp_norm(f, 2) up to round-off."""
    g = f.grid
    F = sfft.fft2(f.data)
    dxi2 = (2.0 * np.pi / (g.N * g.h)) ** 2
    val2 = np.sum(np.abs(F) ** 2) * (g.h ** 4) * dxi2 / (2.0 * np.pi) ** 2
    return float(np.sqrt(val2))


def save_field(f: ComplexField, path) -> None:
    """Binary persistence: magic, N, S, tag, then N^2 little-endian complex pairs."""
    tag = f.tag.encode("utf-8")
    header = _MAGIC + struct.pack("<Id I", f.grid.N, f.grid.S, len(tag))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(tag)
        fh.write(f.data.astype("<c16").tobytes(order="C"))


def load_field(path) -> ComplexField:
    """Load a field written by `save_field`; validates magic and finiteness."""
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        N, S, taglen = struct.unpack("<Id I", fh.read(struct.calcsize("<Id I")))
        tag = fh.read(taglen).decode("utf-8")
        data = np.frombuffer(fh.read(16 * N * N), dtype="<c16").reshape(N, N)
    grid = build_grid(N, S)
    return ComplexField(grid, data, tag)
