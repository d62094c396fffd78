"""Exact single-qubit polarization math.

States are pure polarization qubits written in the {|H>, |V>} basis. The
four transmitted eigenstates, the phase gate acting on the V component, and
the projective sigma_y / sigma_x measurements are all closed-form, so this
module is deterministic and allocation-light; everything stochastic lives in
:mod:`sqrs.channel`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

NORM_TOL = 1e-12

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class StateLabel(Enum):
    """The four eigenstates Alice transmits (sigma_x / sigma_y, eigenvalue 0/1)."""

    X0 = 0
    X1 = 1
    Y0 = 2
    Y1 = 3

    @property
    def basis(self) -> "Basis":
        return Basis.SIGMA_X if self.value < 2 else Basis.SIGMA_Y

    @property
    def eigenvalue(self) -> int:
        """Outcome bit this state yields when measured in its own basis."""
        return self.value % 2


class Basis(Enum):
    SIGMA_X = "x"
    SIGMA_Y = "y"


@dataclass(frozen=True)
class Measurement:
    """A projective measurement outcome: basis plus binary result."""

    basis: Basis
    outcome: int

    def __post_init__(self) -> None:
        if self.outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {self.outcome}")


@dataclass(frozen=True)
class QubitState:
    """Pure polarization qubit, amplitudes on |H> and |V>."""

    amp_h: complex
    amp_v: complex

    def __post_init__(self) -> None:
        norm = abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: |amp|^2 = {norm}")

    def inner(self, other: "QubitState") -> complex:
        """<self|other>."""
        return (
            self.amp_h.conjugate() * other.amp_h
            + self.amp_v.conjugate() * other.amp_v
        )

    def equals_up_to_global_phase(self, other: "QubitState", tol: float = NORM_TOL) -> bool:
        return abs(abs(self.inner(other)) - 1.0) <= tol


_EIGENSTATES = {
    StateLabel.X0: QubitState(_INV_SQRT2, _INV_SQRT2),
    StateLabel.X1: QubitState(_INV_SQRT2, -_INV_SQRT2),
    StateLabel.Y0: QubitState(_INV_SQRT2, 1j * _INV_SQRT2),
    StateLabel.Y1: QubitState(_INV_SQRT2, -1j * _INV_SQRT2),
}

# Projector state for each (basis, outcome).
_OUTCOME_STATES = {
    (Basis.SIGMA_X, 0): _EIGENSTATES[StateLabel.X0],
    (Basis.SIGMA_X, 1): _EIGENSTATES[StateLabel.X1],
    (Basis.SIGMA_Y, 0): _EIGENSTATES[StateLabel.Y0],
    (Basis.SIGMA_Y, 1): _EIGENSTATES[StateLabel.Y1],
}


def prepare(label: StateLabel) -> QubitState:
    """Return the normalized eigenstate for one of the four transmit labels."""
    return _EIGENSTATES[label]


def apply_phase(state: QubitState, phi: float) -> QubitState:
    """Encode phase phi on the V component: (a_h, a_v) -> (a_h, e^{i phi} a_v)."""
    return QubitState(state.amp_h, cmath.exp(1j * phi) * state.amp_v)


def born_probability(state: QubitState, meas: Measurement) -> float:
    """|<psi_out|state>|^2 for the projector of the requested outcome."""
    out = _OUTCOME_STATES[(meas.basis, meas.outcome)]
    return abs(out.inner(state)) ** 2


# Table of closed forms: outcome-0 probability is (1 + sign * trig(phi)) / 2,
# where trig is sin for the sigma_x rows and cos for the sigma_y rows.
_ROW_SIGN = {
    StateLabel.X0: 1.0,
    StateLabel.X1: -1.0,
    StateLabel.Y0: 1.0,
    StateLabel.Y1: -1.0,
}


def table1_probability(label: StateLabel, outcome: int, phi) -> float:
    """Closed-form sigma_y outcome probability for a prepared state at phase phi.

    Accepts a scalar or ndarray phi. Matches the Born-rule route within 1e-12.
    """
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    trig = np.sin(phi) if label.basis is Basis.SIGMA_X else np.cos(phi)
    p0 = 0.5 * (1.0 + _ROW_SIGN[label] * trig)
    return p0 if outcome == 0 else 1.0 - p0


def table1_derivative(label: StateLabel, outcome: int, phi) -> float:
    """d/dphi of table1_probability, in closed form."""
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    dtrig = np.cos(phi) if label.basis is Basis.SIGMA_X else -np.sin(phi)
    d0 = 0.5 * _ROW_SIGN[label] * dtrig
    return d0 if outcome == 0 else -d0


def outcome_index(label: StateLabel, outcome: int) -> int:
    """1-based index of the (label, sigma_y outcome) cell, row-major over labels."""
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    return 2 * label.value + outcome + 1


# Calibration phase for each outcome index: the phase where the ideal
# probability of that cell vanishes.
CALIBRATION_PHASES = {
    1: 3 * math.pi / 2,
    2: math.pi / 2,
    3: math.pi / 2,
    4: 3 * math.pi / 2,
    5: math.pi,
    6: 0.0,
    7: 0.0,
    8: math.pi,
}

LABELS = tuple(StateLabel)
