"""Homogeneous Besov norms and time-mixed (Chemin-Lerner) norms.

All norms contract over the grid-resolvable block range q in [q_min, q_max];
content in the residuals (the mean and the Nyquist-corner shoulder) does not
enter, consistent with the homogeneous, zero-mean convention. Semi-norms with
r = infinity over this truncated range are reported as truncated in exported
output.

Time integration uses the trapezoidal rule on the stored sample times; the
rho = infinity norm is the max over samples. For exponents r >= rho the
time-mixed norm is dominated by the time-then-block norm (Minkowski); for
r <= rho the inequality reverses; r = rho makes both equal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dyadic import DyadicPartition, block_l2_norms, block_project
from .spectral import BlowUpError, PhysicalField, SpectralField, to_physical
from .threads import ordered_map

INF = math.inf


class MinkowskiOrderingError(RuntimeError):
    """Computed norms violate the Minkowski ordering; internal inconsistency."""


def _valid_exponent(x: float) -> bool:
    return x == INF or 1.0 <= x < INF


@dataclass(frozen=True)
class BesovIndex:
    """Index triple (s, p, r) of a homogeneous Besov space B^s_{p,r}."""

    s: float
    p: float
    r: float

    def __post_init__(self):
        if not _valid_exponent(self.p):
            raise ValueError(f"p must be in [1, inf], got {self.p}")
        if not _valid_exponent(self.r):
            raise ValueError(f"r must be in [1, inf], got {self.r}")


@dataclass(frozen=True)
class CheminLernerIndex:
    """Time exponent rho paired with a Besov index."""

    rho: float
    space: BesovIndex

    def __post_init__(self):
        if not _valid_exponent(self.rho):
            raise ValueError(f"rho must be in [1, inf], got {self.rho}")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times."""

    samples: tuple[float, ...]

    def __post_init__(self):
        t = np.asarray(self.samples, dtype=np.float64)
        if t.size == 0:
            raise ValueError("empty time grid")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("time samples must be strictly increasing")
        object.__setattr__(self, "samples", tuple(float(x) for x in t))

    def array(self) -> np.ndarray:
        return np.asarray(self.samples)


def lp_norm(f: PhysicalField, p: float) -> float:
    """Collocation L^p norm of the pointwise magnitude; max for p = inf."""
    if not _valid_exponent(p):
        raise ValueError(f"p must be in [1, inf], got {p}")
    mag = f.magnitude()
    if not np.all(np.isfinite(mag)):
        raise BlowUpError("non-finite values in lp_norm input")
    if p == INF:
        return float(np.max(mag))
    if p == 2.0:
        return float(np.sqrt(np.mean(mag ** 2)))
    return float(np.mean(mag ** p) ** (1.0 / p))


def _lr_contract(values: np.ndarray, r: float) -> float:
    """l^r norm of a nonnegative sequence; max for r = inf."""
    if values.size == 0:
        return 0.0
    if r == INF:
        return float(np.max(values))
    if r == 1.0:
        return float(np.sum(values))
    return float(np.sum(values ** r) ** (1.0 / r))


def block_lp_norms(u: SpectralField, part: DyadicPartition, p: float) -> np.ndarray:
    """||Delta_q u||_{L^p} for q in q_range.

    p = 2 goes through Parseval; other p transform each block to physical
    space (parallel across blocks when BLC_THREADS > 1).
    """
    if p == 2.0:
        return block_l2_norms(u, part)

    def one(q: int) -> float:
        return lp_norm(to_physical(block_project(u, q, part)), p)

    return np.asarray(ordered_map(one, list(part.q_range)))


def besov_norm(u: SpectralField, idx: BesovIndex, part: DyadicPartition) -> float:
    """Homogeneous Besov norm over the resolvable block range.

    ||u|| = l^r over q of 2^(q s) ||Delta_q u||_{L^p}. The k = 0 mode never
    contributes (annuli exclude the origin).
    """
    norms = block_lp_norms(u, part, idx.p)
    weights = 2.0 ** (idx.s * np.arange(part.q_min, part.q_max + 1))
    return _lr_contract(weights * norms, idx.r)


@dataclass
class BlockNormSeries:
    """Per-block L^p norms sampled in time: values[i, j] = ||Delta_{q_i} u(t_j)||."""

    qs: np.ndarray
    times: np.ndarray
    values: np.ndarray
    p: float

    def __post_init__(self):
        self.qs = np.asarray(self.qs, dtype=np.int64)
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.qs.size, self.times.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({self.qs.size} blocks, {self.times.size} times)")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("time samples must be strictly increasing")

    def window(self, t_min: float = -INF, t_max: float = INF) -> "BlockNormSeries":
        keep = (self.times >= t_min) & (self.times <= t_max)
        if not np.any(keep):
            raise ValueError("window contains no samples")
        return BlockNormSeries(self.qs, self.times[keep],
                               self.values[:, keep], self.p)


def build_block_norm_series(fields: Sequence[SpectralField],
                            times: TimeGrid | Sequence[float],
                            part: DyadicPartition, p: float) -> BlockNormSeries:
    t = times.array() if isinstance(times, TimeGrid) else np.asarray(times, float)
    if len(fields) != t.size:
        raise ValueError("one field per time sample required")
    cols = [block_lp_norms(f, part, p) for f in fields]
    values = np.stack(cols, axis=1) if cols else np.zeros((part.n_blocks, 0))
    return BlockNormSeries(np.arange(part.q_min, part.q_max + 1), t, values, p)


def _time_lr(values: np.ndarray, times: np.ndarray, rho: float) -> np.ndarray:
    """Per-row time L^rho norm over [times[0], times[-1]] by trapezoid."""
    if times.size == 0:
        raise ValueError("empty time grid")
    if rho == INF:
        return np.max(values, axis=-1)
    if times.size == 1:
        return np.zeros(values.shape[:-1])
    return np.trapezoid(values ** rho, times, axis=-1) ** (1.0 / rho)


def chemin_lerner_norm(series: BlockNormSeries, idx: CheminLernerIndex) -> float:
    """Block-then-time norm: l^r over q of 2^(q s) ||series_q||_{L^rho_t}."""
    per_block = _time_lr(series.values, series.times, idx.rho)
    weights = 2.0 ** (idx.space.s * series.qs)
    return _lr_contract(weights * per_block, idx.space.r)


def lebesgue_besov_norm(series: BlockNormSeries, idx: CheminLernerIndex) -> float:
    """Time-then-block norm: L^rho in time of the instantaneous Besov norm."""
    weights = 2.0 ** (idx.space.s * series.qs)
    weighted = weights[:, None] * series.values
    if idx.space.r == INF:
        inst = np.max(weighted, axis=0)
    elif idx.space.r == 1.0:
        inst = np.sum(weighted, axis=0)
    else:
        inst = np.sum(weighted ** idx.space.r, axis=0) ** (1.0 / idx.space.r)
    return float(_time_lr(inst[None, :], series.times, idx.rho)[0])


def minkowski_compare(series: BlockNormSeries,
                      idx: CheminLernerIndex) -> tuple[float, float]:
    """Return (time-mixed, plain) norms, enforcing the Minkowski ordering.

    r >= rho requires tilde <= plain; r <= rho the reverse; equality for
    r = rho. A violation beyond roundoff raises MinkowskiOrderingError.
    """
    tilde = chemin_lerner_norm(series, idx)
    plain = lebesgue_besov_norm(series, idx)
    scale = max(tilde, plain, 1e-300)
    slack = 1e-12 * scale
    r, rho = idx.space.r, idx.rho
    if r == rho:
        ok = abs(tilde - plain) <= slack
    elif r >= rho:
        ok = tilde <= plain + slack
    else:
        ok = tilde >= plain - slack
    if not ok:
        raise MinkowskiOrderingError(
            f"ordering violated for r={r}, rho={rho}: "
            f"time-mixed={tilde!r}, plain={plain!r}")
    return tilde, plain
