"""Protocol rounds: Alice's source, Bob's two measurement paths, Eve's view.

Two execution styles are provided for the same stochastic model:

* :func:`simulate_round` draws every pulse individually (vectorized numpy)
  and keeps per-slot records, which is what the event logs and Eve's view
  are built from;
* :func:`run_sensing_counts` / :func:`run_check_path` sample aggregate
  counts directly from the exact per-pulse click distribution (multinomial
  decomposition), which is statistically identical and fast enough for the
  large sweeps used in the analysis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .channel import (
    ChannelParams,
    PathKind,
    survival_probability,
)
from .qubit import (
    CALIBRATION_PHASES,
    LABELS,
    Basis,
    StateLabel,
    table1_probability,
)


class EngineError(ValueError):
    pass


class InsufficientStatisticsError(EngineError):
    pass


class EmptyViewError(EngineError):
    pass


RngLike = Union[int, np.random.Generator]


def _as_rng(seed: RngLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class OutcomeCounts:
    """The eight sensing-path counters n_1..n_8 (row-major over labels)."""

    n: tuple

    def __post_init__(self) -> None:
        if len(self.n) != 8:
            raise EngineError("need exactly 8 counters")
        if any(v < 0 for v in self.n):
            raise EngineError("counters must be non-negative")

    @property
    def m(self) -> int:
        return int(sum(self.n))

    def __add__(self, other: "OutcomeCounts") -> "OutcomeCounts":
        return OutcomeCounts(tuple(a + b for a, b in zip(self.n, other.n)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.n, dtype=float)


def pair_partner(index: int) -> int:
    """Partner outcome index within the same label row (1-based)."""
    return index + 1 if index % 2 == 1 else index - 1


@dataclass(frozen=True)
class CalibrationTable:
    """Eight background probabilities, each measured at its zero phase."""

    p_bg: tuple
    phases: tuple = tuple(CALIBRATION_PHASES[i] for i in range(1, 9))

    def __post_init__(self) -> None:
        if len(self.p_bg) != 8:
            raise EngineError("need exactly 8 background probabilities")
        if any(not 0.0 <= p < 1.0 for p in self.p_bg):
            raise EngineError("background probabilities must be in [0, 1)")

    @classmethod
    def zeros(cls) -> "CalibrationTable":
        return cls(p_bg=(0.0,) * 8)


@dataclass(frozen=True)
class EveView:
    """What crosses the classical channel: time slot, detector, path. No labels."""

    time_slots: np.ndarray
    detector_ids: np.ndarray
    paths: np.ndarray  # PathKind values as strings

    def __len__(self) -> int:
        return len(self.time_slots)

    def to_jsonl(self) -> str:
        lines = [
            json.dumps({"slot": int(s), "detector": int(d), "path": str(p)},
                       sort_keys=True)
            for s, d, p in zip(self.time_slots, self.detector_ids, self.paths)
        ]
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class QberReport:
    sifted_count: int
    error_count: int
    qber: float

    @classmethod
    def from_counts(cls, sifted: int, errors: int) -> "QberReport":
        if sifted <= 0:
            raise InsufficientStatisticsError("no sifted events")
        return cls(sifted_count=sifted, error_count=errors, qber=errors / sifted)


@dataclass(frozen=True)
class InterceptResend:
    """Eve measures every transiting pulse and resends the collapsed state.

    basis None means Eve picks sigma_x or sigma_y uniformly per pulse.
    """

    basis: Optional[Basis] = None

    def mixing_matrix(self) -> np.ndarray:
        """M[alice_label, arriving_label] after Eve's measure-and-resend."""
        mats = []
        bases = (0, 1) if self.basis is None else (
            0 if self.basis is Basis.SIGMA_X else 1,)
        for b in bases:
            m = np.zeros((4, 4))
            for lab in range(4):
                if lab // 2 == b:
                    m[lab, lab] = 1.0
                else:
                    m[lab, 2 * b] = 0.5
                    m[lab, 2 * b + 1] = 0.5
            mats.append(m)
        return sum(mats) / len(mats)

    def transform_labels(self, labels: np.ndarray,
                         rng: np.random.Generator) -> np.ndarray:
        if self.basis is None:
            eve_basis = rng.integers(0, 2, labels.size)
        else:
            eve_basis = np.full(labels.size,
                                0 if self.basis is Basis.SIGMA_X else 1)
        match = (labels // 2) == eve_basis
        collapsed = 2 * eve_basis + rng.integers(0, 2, labels.size)
        return np.where(match, labels, collapsed)


def intercept_resend(basis: Optional[Basis] = None) -> InterceptResend:
    return InterceptResend(basis=basis)


# ---------------------------------------------------------------------------
# Exact click distributions (the aggregate counterpart of sample_detection)
# ---------------------------------------------------------------------------

def sensing_click_distribution(params: ChannelParams, phi: float,
                               label: StateLabel) -> np.ndarray:
    """(P(detector 1), P(detector 2), P(no click)) for one sensing pulse."""
    p0 = float(table1_probability(label, 0, phi))
    e = float(params.total_sensing_flip(phi))
    p0f = p0 * (1.0 - e) + (1.0 - p0) * e
    s = survival_probability(params)
    d = params.dark_count_prob
    true_probs = {0: s * p0f, 1: s * (1.0 - p0f), None: 1.0 - s}
    out = np.zeros(3)
    for t, pt in true_probs.items():
        for d1 in (False, True):
            for d2 in (False, True):
                w = pt * (d if d1 else 1 - d) * (d if d2 else 1 - d)
                fired = [(t == 0) or d1, (t == 1) or d2]
                k = sum(fired)
                if k == 0:
                    out[2] += w
                else:
                    for i in (0, 1):
                        if fired[i]:
                            out[i] += w / k
    return out


def check_click_distribution(params: ChannelParams,
                             label: StateLabel) -> np.ndarray:
    """(P(det 3), P(det 4), P(det 5), P(det 6), P(no click)) for a check pulse.

    Bob's module choice (sigma_x vs sigma_y) is a 50/50 beam split; dark
    counts can fire any of the four detectors regardless of the split.
    """
    s = survival_probability(params)
    d = params.dark_count_prob
    b = params.misalignment_prob
    # True-click distribution over detectors 3..6 (index 0..3) or None.
    true_probs = {None: 1.0 - s}
    for module in (0, 1):  # 0 -> sigma_x (dets 3,4), 1 -> sigma_y (dets 5,6)
        if label.value // 2 == module:
            p0 = 1.0 if label.eigenvalue == 0 else 0.0
        else:
            p0 = 0.5
        p0f = p0 * (1.0 - b) + (1.0 - p0) * b
        true_probs[2 * module] = 0.5 * s * p0f
        true_probs[2 * module + 1] = 0.5 * s * (1.0 - p0f)
    out = np.zeros(5)
    for t, pt in true_probs.items():
        if pt == 0.0:
            continue
        for pattern in range(16):
            darks = [(pattern >> i) & 1 for i in range(4)]
            w = pt
            for bit in darks:
                w *= d if bit else 1 - d
            if w == 0.0:
                continue
            fired = [bool(bit) or (t == i) for i, bit in enumerate(darks)]
            k = sum(fired)
            if k == 0:
                out[4] += w
            else:
                for i in range(4):
                    if fired[i]:
                        out[i] += w / k
    return out


# ---------------------------------------------------------------------------
# Per-pulse simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundRecords:
    """Per-slot record of a simulated round (both paths)."""

    phi: float
    labels: np.ndarray          # Alice's prepared label per pulse (0..3)
    on_sensing_path: np.ndarray  # bool per pulse
    detectors: np.ndarray       # recorded detector id 1..6, or 0 for no click

    @property
    def num_pulses(self) -> int:
        return self.labels.size


def _choose_among_fired(fired: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
    """Uniformly pick one fired column per row; -1 where none fired."""
    counts = fired.sum(axis=1)
    pick = np.floor(rng.random(fired.shape[0]) * counts).astype(int)
    pick = np.minimum(pick, np.maximum(counts - 1, 0))
    cumulative = np.cumsum(fired, axis=1)
    idx = np.argmax(cumulative == (pick + 1)[:, None], axis=1)
    return np.where(counts > 0, idx, -1)


def _label_p0(labels: np.ndarray, phi: float) -> np.ndarray:
    """Vectorized Table-1 outcome-0 probability for integer label codes."""
    trig = np.where(labels < 2, math.sin(phi), math.cos(phi))
    sign = np.where(labels % 2 == 0, 1.0, -1.0)
    return 0.5 * (1.0 + sign * trig)


def simulate_round(
    params: ChannelParams,
    phi: float,
    num_pulses: int,
    seed: RngLike,
    labels: Optional[Sequence[StateLabel]] = None,
    attack: Optional[InterceptResend] = None,
) -> RoundRecords:
    """Simulate every pulse of one protocol round, both paths."""
    if num_pulses <= 0:
        raise EngineError("num_pulses must be > 0")
    rng = _as_rng(seed)
    allowed = np.array([l.value for l in (labels or LABELS)])
    alice = allowed[rng.integers(0, allowed.size, num_pulses)]
    arriving = attack.transform_labels(alice, rng) if attack else alice

    sensing = rng.random(num_pulses) < params.path1_split
    detectors = np.zeros(num_pulses, dtype=int)
    s = survival_probability(params)
    d = params.dark_count_prob

    # Path 1: phase encoding + sigma_y measurement on detectors 1/2.
    sl = arriving[sensing]
    ns = sl.size
    if ns:
        p0 = _label_p0(sl, phi)
        e = float(params.total_sensing_flip(phi))
        p0f = p0 * (1.0 - e) + (1.0 - p0) * e
        outcome = (rng.random(ns) >= p0f).astype(int)  # 0 -> det 1, 1 -> det 2
        survived = rng.random(ns) < s
        fired = np.zeros((ns, 2), dtype=bool)
        fired[np.arange(ns), outcome] = survived
        fired |= rng.random((ns, 2)) < d
        idx = _choose_among_fired(fired, rng)
        detectors[sensing] = np.where(idx >= 0, idx + 1, 0)

    # Path 2: BB84-style check measurement on detectors 3..6.
    cl = arriving[~sensing]
    nc = cl.size
    if nc:
        module = rng.integers(0, 2, nc)  # 0 -> sigma_x, 1 -> sigma_y
        match = (cl // 2) == module
        p0 = np.where(match, 1.0 - (cl % 2), 0.5)
        b = params.misalignment_prob
        p0f = p0 * (1.0 - b) + (1.0 - p0) * b
        outcome = (rng.random(nc) >= p0f).astype(int)
        survived = rng.random(nc) < s
        fired = np.zeros((nc, 4), dtype=bool)
        fired[np.arange(nc), 2 * module + outcome] = survived
        fired |= rng.random((nc, 4)) < d
        idx = _choose_among_fired(fired, rng)
        detectors[~sensing] = np.where(idx >= 0, idx + 3, 0)

    return RoundRecords(phi=phi, labels=alice, on_sensing_path=sensing,
                        detectors=detectors)


# ---------------------------------------------------------------------------
# Views over round records
# ---------------------------------------------------------------------------

def counts_from_records(records: RoundRecords) -> OutcomeCounts:
    mask = records.on_sensing_path & (records.detectors > 0)
    idx = 2 * records.labels[mask] + (records.detectors[mask] - 1)
    return OutcomeCounts(tuple(int(v) for v in np.bincount(idx, minlength=8)))


def eve_view_from_records(records: RoundRecords) -> EveView:
    clicked = records.detectors > 0
    slots = np.flatnonzero(clicked)
    dets = records.detectors[clicked]
    paths = np.where(records.on_sensing_path[clicked],
                     PathKind.SENSING.value, PathKind.CHECK.value)
    return EveView(time_slots=slots, detector_ids=dets, paths=paths)


def qber_from_records(records: RoundRecords) -> QberReport:
    mask = (~records.on_sensing_path) & (records.detectors > 0)
    dets = records.detectors[mask] - 3
    labels = records.labels[mask]
    sifted = (dets // 2) == (labels // 2)
    errors = sifted & ((dets % 2) != (labels % 2))
    return QberReport.from_counts(int(sifted.sum()), int(errors.sum()))


def alice_records_jsonl(records: RoundRecords,
                        theta: Optional[float] = None) -> str:
    """Alice-visible event log: slot, prepared label, optional theta, detector."""
    clicked = np.flatnonzero(records.detectors > 0)
    lines = []
    for slot in clicked:
        rec = {
            "slot": int(slot),
            "label": StateLabel(int(records.labels[slot])).name,
            "detector": int(records.detectors[slot]),
        }
        if theta is not None:
            rec["theta"] = theta
        lines.append(json.dumps(rec, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Public round runners
# ---------------------------------------------------------------------------

def run_sensing(
    params: ChannelParams,
    phi: float,
    num_pulses: int,
    seed: RngLike,
    labels: Optional[Sequence[StateLabel]] = None,
    attack: Optional[InterceptResend] = None,
) -> tuple:
    """Run one sensing round; returns (OutcomeCounts, EveView)."""
    records = simulate_round(params, phi, num_pulses, seed,
                             labels=labels, attack=attack)
    return counts_from_records(records), eve_view_from_records(records)


def run_sensing_counts(
    params: ChannelParams,
    phi: float,
    num_pulses: int,
    seed: RngLike,
    labels: Optional[Sequence[StateLabel]] = None,
    attack: Optional[InterceptResend] = None,
) -> OutcomeCounts:
    """Aggregate-count equivalent of run_sensing (no per-slot records)."""
    if num_pulses <= 0:
        raise EngineError("num_pulses must be > 0")
    rng = _as_rng(seed)
    allowed = [l for l in (labels or LABELS)]
    per_label = rng.multinomial(num_pulses,
                                np.full(len(allowed), 1.0 / len(allowed)))
    mixing = attack.mixing_matrix() if attack else np.eye(4)
    counters = np.zeros(8, dtype=np.int64)
    for lab, n_lab in zip(allowed, per_label):
        n_sens = rng.binomial(n_lab, params.path1_split)
        if n_sens == 0:
            continue
        dist = np.zeros(3)
        for arriving in LABELS:
            w = mixing[lab.value, arriving.value]
            if w:
                dist += w * sensing_click_distribution(params, phi, arriving)
        draw = rng.multinomial(n_sens, dist)
        counters[2 * lab.value] += draw[0]
        counters[2 * lab.value + 1] += draw[1]
    return OutcomeCounts(tuple(int(v) for v in counters))


def run_check_path(
    params: ChannelParams,
    num_pulses: int,
    seed: RngLike,
    attack: Optional[InterceptResend] = None,
) -> QberReport:
    """BB84-style verification on Path 2: sift matched bases, count errors."""
    if num_pulses <= 0:
        raise EngineError("num_pulses must be > 0")
    rng = _as_rng(seed)
    per_label = rng.multinomial(num_pulses, np.full(4, 0.25))
    mixing = attack.mixing_matrix() if attack else np.eye(4)
    sifted = 0
    errors = 0
    for lab in LABELS:
        n_check = rng.binomial(per_label[lab.value], 1.0 - params.path1_split)
        if n_check == 0:
            continue
        dist = np.zeros(5)
        for arriving in LABELS:
            w = mixing[lab.value, arriving.value]
            if w:
                dist += w * check_click_distribution(params, arriving)
        draw = rng.multinomial(n_check, dist)
        for det in range(4):
            if det // 2 == lab.value // 2:  # recorded basis matches Alice's
                sifted += int(draw[det])
                if det % 2 != lab.value % 2:
                    errors += int(draw[det])
    return QberReport.from_counts(sifted, errors)


def run_calibration(
    params: ChannelParams,
    pulses_per_phase: int,
    seed: RngLike,
) -> CalibrationTable:
    """Measure the eight background probabilities at their zero phases."""
    if pulses_per_phase <= 0:
        raise EngineError("pulses_per_phase must be > 0")
    streams = np.random.SeedSequence(seed).spawn(4) \
        if not isinstance(seed, np.random.Generator) else None
    p_bg = [0.0] * 8
    thetas = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
    for k, theta in enumerate(thetas):
        rng = np.random.default_rng(streams[k]) if streams else seed
        counts = run_sensing_counts(params, theta, pulses_per_phase, rng)
        for index in range(1, 9):
            if not math.isclose(CALIBRATION_PHASES[index], theta):
                continue
            partner = pair_partner(index)
            row_total = counts.n[index - 1] + counts.n[partner - 1]
            if row_total == 0:
                raise InsufficientStatisticsError(
                    f"no events for outcome index {index} at theta={theta}")
            p_bg[index - 1] = counts.n[index - 1] / row_total
    return CalibrationTable(p_bg=tuple(p_bg))


def eve_ratio(view: EveView) -> float:
    """Fraction of sensing-path clicks landing on detector 1."""
    sensing = view.paths == PathKind.SENSING.value
    total = int(sensing.sum())
    if total == 0:
        raise EmptyViewError("no sensing-path clicks in view")
    return int((view.detector_ids[sensing] == 1).sum()) / total


def eve_ratio_from_counts(counts: OutcomeCounts) -> float:
    """Same ratio computed from the detector-1 counters (n1+n3+n5+n7)/m."""
    if counts.m == 0:
        raise EmptyViewError("no sensing-path clicks")
    return sum(counts.n[i] for i in (0, 2, 4, 6)) / counts.m
