"""Phase estimation from outcome counts.

The likelihood groups the eight counters into four exponents,

    L(phi) ~ (1+sin phi)^(n1+n4) (1-sin phi)^(n2+n3)
             (1+cos phi)^(n5+n8) (1-cos phi)^(n6+n7),

maximized on a fine grid with golden-section refinement. The background
correction subtracts the pre-calibrated click probabilities from the
per-row empirical frequencies before the likelihood is built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .engine import CalibrationTable, OutcomeCounts, pair_partner

TWO_PI = 2.0 * math.pi
LOG_CLAMP = 1e-12
DEFAULT_GRID_SIZE = 2048
GOLDEN_TOL = 1e-6
# A grid local maximum counts as a real mode only if its prominence exceeds
# this many nats per detection event (scale-free in the total count).
DEFAULT_PROMINENCE_PER_EVENT = 0.15

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class EstimationError(ValueError):
    pass


class InsufficientDataError(EstimationError):
    pass


class DegenerateRowError(EstimationError):
    pass


@dataclass(frozen=True)
class LikelihoodCurve:
    """Log-likelihood samples on a phase grid, shifted so the maximum is 0."""

    grid: np.ndarray
    log_values: np.ndarray

    def __post_init__(self) -> None:
        if self.grid.shape != self.log_values.shape:
            raise EstimationError("grid and log_values must have equal shape")
        if np.any(np.diff(self.grid) <= 0):
            raise EstimationError("grid must be strictly increasing")

    def to_csv(self) -> str:
        lines = ["phi,normalized_log_likelihood"]
        lines += [f"{p:.12g},{v:.12g}" for p, v in zip(self.grid, self.log_values)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PhaseEstimate:
    phi_hat: float
    curve: LikelihoodCurve
    num_maxima: int


@dataclass(frozen=True)
class CorrectedFrequencies:
    """Background-corrected outcome frequencies and their effective counts."""

    f: tuple
    effective_counts: tuple


CountsLike = Union[OutcomeCounts, Sequence[float]]


def _counters(counts: CountsLike) -> np.ndarray:
    if isinstance(counts, OutcomeCounts):
        arr = counts.as_array()
    else:
        arr = np.asarray(counts, dtype=float)
    if arr.shape != (8,):
        raise EstimationError("need exactly 8 counters")
    if np.any(arr < 0):
        raise EstimationError("counters must be non-negative")
    return arr


def _exponents(counters: np.ndarray) -> np.ndarray:
    """(sin+, sin-, cos+, cos-) exponents of the likelihood."""
    n = counters
    return np.array([n[0] + n[3], n[1] + n[2], n[4] + n[7], n[5] + n[6]])


def _log_likelihood_exponents(exponents: np.ndarray, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    s, c = np.sin(phi), np.cos(phi)
    terms = (
        exponents[0] * np.log(np.maximum(1.0 + s, LOG_CLAMP))
        + exponents[1] * np.log(np.maximum(1.0 - s, LOG_CLAMP))
        + exponents[2] * np.log(np.maximum(1.0 + c, LOG_CLAMP))
        + exponents[3] * np.log(np.maximum(1.0 - c, LOG_CLAMP))
    )
    return terms


def log_likelihood(counts: CountsLike, phi):
    """Log of the phase likelihood (up to an additive constant); total on any phi."""
    counters = _counters(counts)
    if counters.sum() <= 0:
        raise InsufficientDataError("no events recorded")
    return _log_likelihood_exponents(_exponents(counters), phi)


def _golden_section_max(f, a: float, b: float, tol: float = GOLDEN_TOL) -> float:
    """Golden-section search for the maximum of f on [a, b]."""
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _count_maxima(values: np.ndarray, threshold: float) -> int:
    """Circular local maxima with prominence >= threshold, near the top.

    values is a max-normalized log curve. Besides the prominence cut, a peak
    must lie within threshold of the global maximum: the clamped log floors
    create deep secondary ripples whose prominence is huge but whose
    likelihood ratio against the mode is astronomically small.
    """
    from scipy.signal import find_peaks

    n = values.size
    tiled = np.concatenate([values, values, values])
    peaks, _ = find_peaks(tiled, prominence=threshold)
    keep = (peaks >= n) & (peaks < 2 * n) & (tiled[peaks] >= -threshold)
    return int(np.count_nonzero(keep))


def estimate_phase(
    counts: CountsLike,
    grid_size: int = DEFAULT_GRID_SIZE,
    prominence_per_event: float = DEFAULT_PROMINENCE_PER_EVENT,
) -> PhaseEstimate:
    """Maximum-likelihood phase from the eight counters.

    Grid search over [0, 2pi) refined by golden-section search; ties between
    exactly degenerate grid maxima resolve to the smallest phase. num_maxima
    reports how many distinct modes survive the prominence threshold so a
    bimodal (failed) estimate is visible to the caller.
    """
    counters = _counters(counts)
    total = counters.sum()
    if total <= 0:
        raise InsufficientDataError("no events recorded")
    exponents = _exponents(counters)

    grid = np.arange(grid_size) * (TWO_PI / grid_size)
    values = _log_likelihood_exponents(exponents, grid)
    best = int(np.argmax(values))  # argmax returns the first (smallest phi) tie

    step = TWO_PI / grid_size
    lo, hi = grid[best] - step, grid[best] + step
    refined = _golden_section_max(
        lambda p: float(_log_likelihood_exponents(exponents, p)), lo, hi)
    phi_hat = refined % TWO_PI

    shifted = values - values[best]
    curve = LikelihoodCurve(grid=grid, log_values=shifted)
    num_maxima = _count_maxima(shifted, prominence_per_event * total)
    return PhaseEstimate(phi_hat=phi_hat, curve=curve, num_maxima=max(num_maxima, 1))


def apply_calibration(counts: OutcomeCounts,
                      table: CalibrationTable) -> CorrectedFrequencies:
    """Subtract pre-calibrated backgrounds from the per-row frequencies.

    Each label row (pair of outcome indices) is corrected independently:
    f_i' = max(f_i - p_bg_i, 0), the pair renormalized to sum 1, and scaled
    back to effective counts for the likelihood exponents.
    """
    counters = _counters(counts)
    f = np.zeros(8)
    eff = np.zeros(8)
    for first in (1, 3, 5, 7):
        second = pair_partner(first)
        i, j = first - 1, second - 1
        row_total = counters[i] + counters[j]
        if row_total <= 0:
            raise InsufficientDataError(
                f"no events for outcome pair ({first}, {second})")
        fi = max(counters[i] / row_total - table.p_bg[i], 0.0)
        fj = max(counters[j] / row_total - table.p_bg[j], 0.0)
        norm = fi + fj
        if norm <= 0.0:
            raise DegenerateRowError(
                f"corrected pair ({first}, {second}) sums to zero")
        f[i], f[j] = fi / norm, fj / norm
        eff[i], eff[j] = f[i] * row_total, f[j] * row_total
    return CorrectedFrequencies(f=tuple(f), effective_counts=tuple(eff))


def estimate_phase_corrected(
    counts: OutcomeCounts,
    table: CalibrationTable,
    grid_size: int = DEFAULT_GRID_SIZE,
    prominence_per_event: float = DEFAULT_PROMINENCE_PER_EVENT,
) -> PhaseEstimate:
    """Background-corrected maximum-likelihood phase estimate."""
    corrected = apply_calibration(counts, table)
    return estimate_phase(corrected.effective_counts, grid_size=grid_size,
                          prominence_per_event=prominence_per_event)


def circular_distance(a: float, b: float) -> float:
    """Shortest angular distance between two phases."""
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)
