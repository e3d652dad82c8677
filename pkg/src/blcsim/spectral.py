"""Periodic grids, spectral/physical fields and the basic Fourier operators.

Conventions used throughout the package:

* The domain is the N-torus (N = 2 or 3) of side ``period`` (default 2*pi),
  sampled on a uniform collocation grid with M points per axis (M even).
* Frequencies per axis are the integers {-M/2+1, ..., M/2} in multiples of
  the fundamental 2*pi/period. The Nyquist index is labelled +M/2; it is
  excluded from first-derivative multipliers so that derivatives of real
  fields stay real.
* The forward transform divides by M^N, so coefficients are Fourier-series
  amplitudes: u(x) = sum_k u_hat(k) exp(i k.x). A constant field c has the
  single coefficient c at k = 0, and cos(6 x_1) has coefficients 1/2 at
  k = (+-6, 0, ...).
* L^p norms are collocation means: ||u||_{L^p} = (mean |u|^p)^{1/p}, with the
  max for p = infinity. Under this normalization Parseval reads
  mean |u|^2 = sum_k |u_hat(k)|^2.
* Dealiasing follows the 2/3 rule: coefficients with any |k_i| > M/3 are set
  to zero, so quadratic products of dealiased fields are alias-free on the
  retained modes.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from typing import BinaryIO

import numpy as np

TWO_PI = 2.0 * np.pi

SNAPSHOT_MAGIC = b"BLCF"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIId")


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class ShapeMismatchError(ValueError):
    """Coefficient array does not match the declared rank and grid."""


class BlowUpError(RuntimeError):
    """Non-finite values or a norm past the configured blow-up threshold."""

    def __init__(self, message: str, time: float | None = None,
                 norms: dict[str, float] | None = None):
        super().__init__(message)
        self.time = time
        self.norms = dict(norms or {})


@dataclass(frozen=True)
class Grid:
    """Uniform periodic collocation grid.

    Attributes:
        dim: spatial dimension, 2 or 3.
        points: number of collocation points per axis (even, >= 8).
        period: side length of the torus.
    """

    dim: int
    points: int
    period: float = TWO_PI

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.points < 8 or self.points % 2 != 0:
            raise ValueError(f"points must be even and >= 8, got {self.points}")
        if not self.period > 0:
            raise ValueError("period must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def fundamental(self) -> float:
        """Smallest nonzero frequency magnitude, 2*pi/period."""
        return TWO_PI / self.period

    @property
    def dealias_cutoff(self) -> float:
        """Largest per-axis frequency kept by dealias(), (M/3) * fundamental."""
        return (self.points / 3.0) * self.fundamental

    @cached_property
    def int_freqs(self) -> np.ndarray:
        """Per-axis integer frequencies in FFT order, Nyquist labelled +M/2."""
        n = np.fft.fftfreq(self.points, d=1.0 / self.points).astype(np.int64)
        n[self.points // 2] = self.points // 2
        return n

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Physical frequency arrays, shape (dim, M, ..., M)."""
        axes = []
        for i in range(self.dim):
            sh = [1] * self.dim
            sh[i] = self.points
            axes.append(self.int_freqs.reshape(sh) * self.fundamental)
        return np.stack(np.broadcast_arrays(*axes))

    @cached_property
    def deriv_wavenumbers(self) -> np.ndarray:
        """Like wavenumbers but with the Nyquist mode zeroed per axis.

        First derivatives of real fields have no well-defined sign at the
        Nyquist frequency; zeroing it keeps d/dx real-to-real. The mode is
        removed by dealias() anyway.
        """
        freqs = self.int_freqs.astype(np.float64)
        freqs[self.points // 2] = 0.0
        axes = []
        for i in range(self.dim):
            sh = [1] * self.dim
            sh[i] = self.points
            axes.append(freqs.reshape(sh) * self.fundamental)
        return np.stack(np.broadcast_arrays(*axes))

    @cached_property
    def k_squared(self) -> np.ndarray:
        return np.sum(self.wavenumbers ** 2, axis=0)

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cutoff = self.points / 3.0
        keep = np.abs(self.int_freqs) <= cutoff
        mask = np.ones(self.shape, dtype=bool)
        for i in range(self.dim):
            sh = [1] * self.dim
            sh[i] = self.points
            mask &= keep.reshape(sh)
        return mask

    def coordinates(self) -> np.ndarray:
        """Collocation coordinates, shape (dim, M, ..., M)."""
        x = np.arange(self.points) * (self.period / self.points)
        grids = np.meshgrid(*([x] * self.dim), indexing="ij")
        return np.stack(grids)


def _component_shape(dim: int, rank: int) -> tuple[int, ...]:
    return (dim,) * rank


def _check_array(grid: Grid, rank: int, arr: np.ndarray) -> None:
    expected = _component_shape(grid.dim, rank) + grid.shape
    if arr.shape != expected:
        raise ShapeMismatchError(
            f"array shape {arr.shape} does not match rank {rank} on grid "
            f"{grid.shape}; expected {expected}")


@dataclass
class SpectralField:
    """Fourier-side field of tensor rank 0, 1 or 2.

    coeffs has shape (dim,)*rank + (M,)*dim, complex. Real-valued fields are
    represented by conjugate-symmetric coefficients.
    """

    grid: Grid
    rank: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.rank not in (0, 1, 2):
            raise ValueError(f"rank must be 0, 1 or 2, got {self.rank}")
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        _check_array(self.grid, self.rank, self.coeffs)

    @classmethod
    def zeros(cls, grid: Grid, rank: int = 0) -> "SpectralField":
        shape = _component_shape(grid.dim, rank) + grid.shape
        return cls(grid, rank, np.zeros(shape, dtype=np.complex128))

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.rank, self.coeffs.copy())

    def flat_components(self) -> np.ndarray:
        """View with all component axes collapsed: (n_comp,) + grid.shape."""
        return self.coeffs.reshape((-1,) + self.grid.shape)

    def mean_coefficient(self) -> np.ndarray:
        """k = 0 coefficient(s), one per component."""
        zero = (0,) * self.grid.dim
        return self.flat_components()[(slice(None),) + zero]

    def is_real_consistent(self, tol: float = 1e-12) -> bool:
        """True if coefficients are conjugate-symmetric to within tol."""
        for comp in self.flat_components():
            mirrored = np.conj(_reverse_modes(comp))
            if np.max(np.abs(comp - mirrored)) > tol * max(1.0, np.max(np.abs(comp))):
                return False
        return True

    def _binary_op(self, other, op):
        if isinstance(other, SpectralField):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            if other.rank != self.rank:
                raise ShapeMismatchError("fields have different ranks")
            return SpectralField(self.grid, self.rank, op(self.coeffs, other.coeffs))
        return SpectralField(self.grid, self.rank, op(self.coeffs, other))

    def __add__(self, other):
        return self._binary_op(other, np.add)

    def __sub__(self, other):
        return self._binary_op(other, np.subtract)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.rank, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, self.rank, -self.coeffs)


def _reverse_modes(comp: np.ndarray) -> np.ndarray:
    # coefficient at -k for every k, respecting FFT index layout
    rev = comp
    for ax in range(comp.ndim):
        rev = np.roll(np.flip(rev, axis=ax), 1, axis=ax)
    return rev


def hermitian_expand(half: np.ndarray, dim: int, points: int) -> np.ndarray:
    """Rebuild a full FFT spectrum from its rfft half (last axis truncated).

    The input's trailing dim axes are (M, ..., M, M/2 + 1); the missing
    last-axis columns j in (M/2, M) are filled with conj at the mirrored
    frequency, so the result is exactly conjugate-symmetric whenever the
    half-spectrum came from a real field.
    """
    m, h = points, points // 2 + 1
    if half.shape[-1] != h or half.shape[-dim:-1] != (m,) * (dim - 1):
        raise ShapeMismatchError(
            f"half spectrum shape {half.shape} does not match rfft layout "
            f"for dim={dim}, points={m}")
    full = np.empty(half.shape[:-1] + (m,), dtype=np.complex128)
    full[..., :h] = half
    src = half[..., 1:m - h + 1][..., ::-1]  # columns M-1 .. M/2+1 mirrored
    for ax in range(-dim, -1):
        src = np.roll(np.flip(src, axis=ax), 1, axis=ax)
    full[..., h:] = np.conj(src)
    return full


@dataclass
class PhysicalField:
    """Collocation-sampled field of tensor rank 0, 1 or 2."""

    grid: Grid
    rank: int
    values: np.ndarray

    def __post_init__(self):
        if self.rank not in (0, 1, 2):
            raise ValueError(f"rank must be 0, 1 or 2, got {self.rank}")
        self.values = np.asarray(self.values, dtype=np.float64)
        _check_array(self.grid, self.rank, self.values)

    @classmethod
    def zeros(cls, grid: Grid, rank: int = 0) -> "PhysicalField":
        shape = _component_shape(grid.dim, rank) + grid.shape
        return cls(grid, rank, np.zeros(shape))

    def flat_components(self) -> np.ndarray:
        return self.values.reshape((-1,) + self.grid.shape)

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean (Frobenius for rank 2) magnitude."""
        flat = self.flat_components()
        return np.sqrt(np.sum(flat ** 2, axis=0))

    def __add__(self, other):
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")
        return PhysicalField(self.grid, self.rank, self.values + other.values)

    def __sub__(self, other):
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")
        return PhysicalField(self.grid, self.rank, self.values - other.values)

    def __mul__(self, scalar):
        return PhysicalField(self.grid, self.rank, self.values * scalar)

    __rmul__ = __mul__


def to_physical(f: SpectralField) -> PhysicalField:
    """Inverse transform; imaginary residue of conjugate-symmetric input is dropped."""
    n = f.grid.dim
    scale = f.grid.points ** n
    vals = np.fft.ifftn(f.coeffs, axes=tuple(range(-n, 0))) * scale
    return PhysicalField(f.grid, f.rank, np.ascontiguousarray(vals.real))


def to_spectral(f: PhysicalField) -> SpectralField:
    n = f.grid.dim
    scale = f.grid.points ** n
    coeffs = np.fft.fftn(f.values, axes=tuple(range(-n, 0))) / scale
    return SpectralField(f.grid, f.rank, coeffs)


def gradient(f: SpectralField) -> SpectralField:
    """Spectral gradient; raises rank by one, new derivative axis first.

    For a vector field tau the result G[i, k] = d_i tau_k.
    """
    if f.rank >= 2:
        raise ValueError("gradient supports rank 0 and 1 fields")
    k = f.grid.deriv_wavenumbers  # (dim, *shape)
    expand = (slice(None),) + (None,) * f.rank
    out = 1j * k[expand + (Ellipsis,)] * f.coeffs[None, ...]
    return SpectralField(f.grid, f.rank + 1, out)


def divergence(f: SpectralField) -> SpectralField:
    """Contract the leading component axis with ik; lowers rank by one."""
    if f.rank < 1:
        raise ValueError("divergence needs rank >= 1")
    k = f.grid.deriv_wavenumbers
    expand = (slice(None),) + (None,) * (f.rank - 1)
    out = np.sum(1j * k[expand + (Ellipsis,)] * f.coeffs, axis=0)
    return SpectralField(f.grid, f.rank - 1, out)


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, f.rank, -f.grid.k_squared * f.coeffs)


def inverse_laplacian(f: SpectralField) -> SpectralField:
    """Solve Laplace(u) = f on zero-mean data; the k = 0 output is 0."""
    k2 = f.grid.k_squared.copy()
    zero = (0,) * f.grid.dim
    k2[zero] = 1.0  # avoid 0/0; the mode is zeroed below
    out = -f.coeffs / k2
    out[(Ellipsis,) + zero] = 0.0
    return SpectralField(f.grid, f.rank, out)


def leray_project(v: SpectralField) -> SpectralField:
    """Project a vector field onto divergence-free modes.

    Mode-wise (I - k k^T / |k|^2) v_hat(k); the k = 0 mode maps to 0.
    """
    if v.rank != 1:
        raise ValueError("leray_project needs a rank-1 field")
    k = v.grid.wavenumbers
    k2 = v.grid.k_squared.copy()
    zero = (0,) * v.grid.dim
    k2[zero] = 1.0
    kdotv = np.sum(k * v.coeffs, axis=0)
    out = v.coeffs - k * (kdotv / k2)[None, ...]
    out[(slice(None),) + zero] = 0.0
    return SpectralField(v.grid, 1, out)


def dealias(f: SpectralField) -> SpectralField:
    """Zero every coefficient with any |k_i| > M/3 (2/3 rule). Idempotent."""
    return SpectralField(f.grid, f.rank, f.coeffs * f.grid.dealias_mask)


def outer_product(a: PhysicalField, b: PhysicalField) -> PhysicalField:
    """Pointwise outer product of two vector fields, rank 2 result."""
    if a.rank != 1 or b.rank != 1:
        raise ValueError("outer_product needs rank-1 fields")
    vals = a.values[:, None, ...] * b.values[None, :, ...]
    return PhysicalField(a.grid, 2, vals)


def grad_outer(tau: SpectralField) -> SpectralField:
    """Dealiased tensor with entries sum_k d_i tau_k d_j tau_k."""
    g = to_physical(gradient(tau))  # g[i, k] = d_i tau_k
    vals = np.einsum("ik...,jk...->ij...", g.values, g.values)
    return dealias(to_spectral(PhysicalField(tau.grid, 2, vals)))


def recover_pressure(u: SpectralField, tau: SpectralField) -> SpectralField:
    """Pressure from -Laplace(p) = div div(u (x) u + grad tau (.) grad tau).

    Products are formed in physical space and dealiased before the spectral
    double divergence.
    """
    uu = dealias(to_spectral(outer_product(to_physical(u), to_physical(u))))
    stress = uu + grad_outer(tau)
    rhs = divergence(divergence(stress))
    # -Laplace(p) = rhs  =>  Laplace(p) = -rhs
    return inverse_laplacian(-1.0 * rhs)


# ---------------------------------------------------------------------------
# Binary snapshot format
#
# One record per field: header <4s I I I I d> = magic "BLCF", version,
# dim, M, rank, time; then the physical samples as little-endian float64,
# component-major, row-major within each component.
# ---------------------------------------------------------------------------

def write_field(fh: BinaryIO, f: PhysicalField, time: float) -> None:
    fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, f.grid.dim,
                          f.grid.points, f.rank, float(time)))
    fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(fh: BinaryIO, period: float = TWO_PI) -> tuple[PhysicalField, float]:
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise ValueError("truncated snapshot header")
    magic, version, dim, m, rank, time = _HEADER.unpack(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    grid = Grid(dim, m, period)
    count = (dim ** rank) * m ** dim
    data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
    vals = data.reshape(_component_shape(dim, rank) + grid.shape).copy()
    return PhysicalField(grid, rank, vals), time
