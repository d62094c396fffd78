"""Classical Fisher information and Cramér-Rao precision bounds.

Alice's per-state information uses the closed-form outcome probabilities and
their analytic derivatives; the empirical route fits the slope from two
neighboring points of a measured probability curve, which is also the only
route available for Eve's detector-ratio observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .qubit import StateLabel, table1_derivative, table1_probability

PROB_EDGE_TOL = 1e-12


class FisherError(ValueError):
    pass


class SingularProbabilityError(FisherError):
    pass


class NoInformationError(FisherError):
    pass


class InvalidTripletError(FisherError):
    pass


@dataclass(frozen=True)
class FisherResult:
    cfi: float
    n_measurements: int
    crb: float


@dataclass(frozen=True)
class ProbabilityTriplet:
    """Three (phi, probability) samples: left neighbor, center, right neighbor."""

    phis: tuple
    probs: tuple

    def __post_init__(self) -> None:
        if len(self.phis) != 3 or len(self.probs) != 3:
            raise InvalidTripletError("triplet needs exactly three points")
        if not (self.phis[0] < self.phis[1] < self.phis[2]):
            raise InvalidTripletError("phases must be strictly increasing")
        if not PROB_EDGE_TOL < self.probs[1] < 1.0 - PROB_EDGE_TOL:
            raise InvalidTripletError("center probability must lie in (0, 1)")


def cfi_analytic(label: StateLabel, phi: float, outcome: int = 0) -> float:
    """Fisher information of one Table-1 row at phase phi, closed form.

    [dp/dphi]^2 / (p (1-p)); equal to 1 everywhere the probability is not
    degenerate, which is exactly the asymmetry baseline for Alice.
    """
    p = float(table1_probability(label, outcome, phi))
    if p <= PROB_EDGE_TOL or p >= 1.0 - PROB_EDGE_TOL:
        raise SingularProbabilityError(
            f"probability degenerate at phi={phi} for {label.name}")
    dp = float(table1_derivative(label, outcome, phi))
    return dp * dp / (p * (1.0 - p))


def cfi_empirical(triplet: ProbabilityTriplet) -> float:
    """Fisher information from a central-difference slope fit."""
    span = triplet.phis[2] - triplet.phis[0]
    if span <= 0:
        raise InvalidTripletError("zero phase span")
    slope = (triplet.probs[2] - triplet.probs[0]) / span
    pc = triplet.probs[1]
    return slope * slope / (pc * (1.0 - pc))


def crb(cfi: float, n: int) -> float:
    """Cramér-Rao precision bound 1/sqrt(n * cfi) in radians."""
    if cfi <= 0:
        raise NoInformationError("cfi must be > 0")
    if n <= 0:
        raise FisherError("n must be > 0")
    return 1.0 / math.sqrt(n * cfi)


def eve_cfi_from_ratio(
    ratio_curve: Sequence[tuple],
    center_index: int,
    n_measurements: int,
) -> FisherResult:
    """Eve's information about the phase from her detector-1 ratio curve.

    ratio_curve is a list of (phi, ratio) points; the slope at the requested
    center is fit from its two neighbors. A flat curve carries no information
    and reports cfi = 0 with an infinite bound.
    """
    if len(ratio_curve) < 3:
        raise InvalidTripletError("need at least three ratio points")
    if not 1 <= center_index <= len(ratio_curve) - 2:
        raise InvalidTripletError("center point needs a neighbor on each side")
    left, center, right = (ratio_curve[center_index - 1],
                           ratio_curve[center_index],
                           ratio_curve[center_index + 1])
    triplet = ProbabilityTriplet(
        phis=(left[0], center[0], right[0]),
        probs=(left[1], center[1], right[1]),
    )
    cfi = cfi_empirical(triplet)
    bound = crb(cfi, n_measurements) if cfi > 0 else math.inf
    return FisherResult(cfi=cfi, n_measurements=n_measurements, crb=bound)


def fisher_rows_to_csv(rows: Sequence[tuple]) -> str:
    """CSV of (state_label, phi, cfi, crb) rows, matching the bar-chart layout."""
    lines = ["state_label,phi,cfi,crb"]
    lines += [f"{label},{phi:.12g},{cfi:.12g},{bound:.12g}"
              for label, phi, cfi, bound in rows]
    return "\n".join(lines) + "\n"
