"""Experiment orchestration: configs, deterministic runs, figure data files.

Every run takes its randomness from seeds derived off the config seed with
fixed spawn keys, so any command with the same config is byte-deterministic.
All outputs are CSV or JSON-lines; plotting is left to external tools.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .channel import ChannelParams, PRESETS
from .engine import (
    CalibrationTable,
    InterceptResend,
    OutcomeCounts,
    alice_records_jsonl,
    counts_from_records,
    eve_ratio_from_counts,
    eve_view_from_records,
    run_calibration,
    run_check_path,
    run_sensing_counts,
    simulate_round,
)
from .estimation import (
    circular_distance,
    estimate_phase,
    estimate_phase_corrected,
)
from .fisher import crb, eve_cfi_from_ratio, ProbabilityTriplet, cfi_empirical
from .qubit import LABELS, StateLabel, table1_probability

TWO_PI = 2.0 * math.pi

# Operating points highlighted in the asymmetry analysis.
PHI_8 = 5.515
PHI_9 = 6.013

QBER_THRESHOLD = 0.06

FIGURES = ("fig2", "fig4", "fig5", "fig6")


class ExperimentError(ValueError):
    pass


def default_phase_grid() -> List[float]:
    """Nine phases evenly spaced over [0, 2pi)."""
    return [k * TWO_PI / 9 for k in range(9)]


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelParams = field(default_factory=PRESETS["paper-noise"])
    phases: List[float] = field(default_factory=default_phase_grid)
    pulses_per_phase: int = 42000
    calibration_pulses: int = 10500  # per calibration phase
    seed: int = 20240901
    output_dir: str = "out"

    def __post_init__(self) -> None:
        if not self.phases:
            raise ExperimentError("phases must be non-empty")
        if self.pulses_per_phase <= 0 or self.calibration_pulses <= 0:
            raise ExperimentError("pulse counts must be > 0")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["channel"]["phase_flip_coeffs"] = list(self.channel.phase_flip_coeffs)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        channel = data.get("channel", "paper-noise")
        if isinstance(channel, str):
            if channel not in PRESETS:
                raise ExperimentError(f"unknown channel preset {channel!r}")
            data["channel"] = PRESETS[channel]()
        elif isinstance(channel, dict):
            channel = dict(channel)
            if "phase_flip_coeffs" in channel:
                channel["phase_flip_coeffs"] = tuple(channel["phase_flip_coeffs"])
            data["channel"] = ChannelParams(**channel)
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


def derive_seed(config_seed: int, *key: int) -> np.random.SeedSequence:
    """Deterministic child seed for a named task."""
    return np.random.SeedSequence(entropy=config_seed, spawn_key=tuple(key))


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def simulate_experiment(config: ExperimentConfig,
                        attack: Optional[InterceptResend] = None) -> Dict[str, str]:
    """One sensing round per configured phase; returns output files by name."""
    files: Dict[str, str] = {}
    eve_lines: List[str] = []
    alice_lines: List[str] = []
    for k, phi in enumerate(config.phases):
        rng = np.random.default_rng(derive_seed(config.seed, 0, k))
        records = simulate_round(config.channel, phi, config.pulses_per_phase,
                                 rng, attack=attack)
        counts = counts_from_records(records)
        files[f"counts_phase{k}.json"] = json.dumps(
            {"phi": phi, "n": list(counts.n), "m": counts.m},
            sort_keys=True) + "\n"
        view = eve_view_from_records(records)
        offset = k * config.pulses_per_phase
        for s, d, p in zip(view.time_slots, view.detector_ids, view.paths):
            eve_lines.append(json.dumps(
                {"slot": int(s) + offset, "detector": int(d), "path": str(p)},
                sort_keys=True))
        for line in alice_records_jsonl(records).splitlines():
            rec = json.loads(line)
            rec["slot"] += offset
            alice_lines.append(json.dumps(rec, sort_keys=True))
    files["eve_view.jsonl"] = "\n".join(eve_lines) + ("\n" if eve_lines else "")
    files["alice_events.jsonl"] = "\n".join(alice_lines) + ("\n" if alice_lines else "")
    return files


def calibrate_experiment(config: ExperimentConfig) -> CalibrationTable:
    return run_calibration(config.channel, config.calibration_pulses,
                           np.random.default_rng(derive_seed(config.seed, 1)))


def qber_experiment(config: ExperimentConfig) -> dict:
    """Check-path QBER with and without a full intercept-resend attack."""
    pulses = config.pulses_per_phase
    clean = run_check_path(config.channel, pulses,
                           np.random.default_rng(derive_seed(config.seed, 2, 0)))
    attacked = run_check_path(config.channel, pulses,
                              np.random.default_rng(derive_seed(config.seed, 2, 1)),
                              attack=InterceptResend())
    return {
        "threshold": QBER_THRESHOLD,
        "no_attack": {"sifted": clean.sifted_count, "errors": clean.error_count,
                      "qber": clean.qber, "pass": clean.qber < QBER_THRESHOLD},
        "attack": {"sifted": attacked.sifted_count, "errors": attacked.error_count,
                   "qber": attacked.qber, "pass": attacked.qber < QBER_THRESHOLD},
    }


# ---------------------------------------------------------------------------
# Figure reproduction
# ---------------------------------------------------------------------------

def _measured_det1_frequency(counts: OutcomeCounts, label: StateLabel) -> float:
    i = 2 * label.value
    row = counts.n[i] + counts.n[i + 1]
    if row == 0:
        raise ExperimentError(f"no events for state {label.name}")
    return counts.n[i] / row


def _fig2(config: ExperimentConfig) -> Dict[str, str]:
    phi = math.pi
    counts = run_sensing_counts(config.channel, phi, config.pulses_per_phase,
                                np.random.default_rng(derive_seed(config.seed, 10)))
    table = run_calibration(config.channel, config.calibration_pulses,
                            np.random.default_rng(derive_seed(config.seed, 11)))
    uncorrected = estimate_phase(counts)
    corrected = estimate_phase_corrected(counts, table)
    lines = ["phi,log_likelihood_uncorrected,log_likelihood_corrected"]
    for g, u, c in zip(uncorrected.curve.grid, uncorrected.curve.log_values,
                       corrected.curve.log_values):
        lines.append(f"{_fmt(g)},{_fmt(u)},{_fmt(c)}")
    summary = {
        "phi_true": phi,
        "uncorrected": {"phi_hat": uncorrected.phi_hat,
                        "num_maxima": uncorrected.num_maxima},
        "corrected": {"phi_hat": corrected.phi_hat,
                      "num_maxima": corrected.num_maxima},
    }
    return {
        "fig2.csv": "\n".join(lines) + "\n",
        "fig2_summary.json": json.dumps(summary, sort_keys=True, indent=2) + "\n",
    }


def _phase_sweep_counts(config: ExperimentConfig, phases: List[float],
                        key: int) -> List[OutcomeCounts]:
    return [
        run_sensing_counts(config.channel, phi, config.pulses_per_phase,
                           np.random.default_rng(derive_seed(config.seed, key, k)))
        for k, phi in enumerate(phases)
    ]


def _fig4(config: ExperimentConfig) -> Dict[str, str]:
    counts = _phase_sweep_counts(config, config.phases, 12)
    header = ("phi,"
              + ",".join(f"{l.name.lower()}_measured,{l.name.lower()}_ideal"
                         for l in LABELS)
              + ",eve_ratio")
    lines = [header]
    for phi, c in zip(config.phases, counts):
        cells = [_fmt(phi)]
        for label in LABELS:
            cells.append(_fmt(_measured_det1_frequency(c, label)))
            cells.append(_fmt(float(table1_probability(label, 0, phi))))
        cells.append(_fmt(eve_ratio_from_counts(c)))
        lines.append(",".join(cells))
    return {"fig4.csv": "\n".join(lines) + "\n"}


def _fig5(config: ExperimentConfig, span: float = TWO_PI / 9) -> Dict[str, str]:
    lines = ["phase_name,phi,series,cfi,crb"]
    for which, center in (("phi_8", PHI_8), ("phi_9", PHI_9)):
        phases = [center - span, center, center + span]
        counts = _phase_sweep_counts(config, phases, 13 if which == "phi_8" else 14)
        n_meas = counts[1].m
        for label in LABELS:
            probs = tuple(_measured_det1_frequency(c, label) for c in counts)
            cfi = cfi_empirical(ProbabilityTriplet(phis=tuple(phases), probs=probs))
            bound = crb(cfi, n_meas) if cfi > 0 else math.inf
            lines.append(f"{which},{_fmt(center)},{label.name.lower()},"
                         f"{_fmt(cfi)},{_fmt(bound)}")
        ratio_curve = [(p, eve_ratio_from_counts(c))
                       for p, c in zip(phases, counts)]
        eve = eve_cfi_from_ratio(ratio_curve, 1, n_meas)
        lines.append(f"{which},{_fmt(center)},eve,{_fmt(eve.cfi)},{_fmt(eve.crb)}")
    return {"fig5.csv": "\n".join(lines) + "\n"}


def _fig6(config: ExperimentConfig) -> Dict[str, str]:
    table = run_calibration(config.channel, config.calibration_pulses,
                            np.random.default_rng(derive_seed(config.seed, 15)))
    counts = _phase_sweep_counts(config, config.phases, 16)
    lines = ["phi,phi_hat,abs_error,crb"]
    for phi, c in zip(config.phases, counts):
        estimate = estimate_phase_corrected(c, table)
        bound = crb(4.0, c.m)
        err = circular_distance(estimate.phi_hat, phi)
        lines.append(f"{_fmt(phi)},{_fmt(estimate.phi_hat)},{_fmt(err)},{_fmt(bound)}")
    return {"fig6.csv": "\n".join(lines) + "\n"}


def reproduce_figure(figure: str, config: ExperimentConfig) -> Dict[str, str]:
    """Emit the data files behind one of the published figures."""
    handlers = {"fig2": _fig2, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6}
    if figure not in handlers:
        raise ExperimentError(
            f"unknown figure {figure!r}; expected one of {FIGURES}")
    return handlers[figure](config)
