import math

import numpy as np
import pytest

from sqrs.fisher import (
    FisherError,
    InvalidTripletError,
    NoInformationError,
    ProbabilityTriplet,
    SingularProbabilityError,
    cfi_analytic,
    cfi_empirical,
    crb,
    eve_cfi_from_ratio,
    fisher_rows_to_csv,
)
from sqrs.qubit import LABELS, StateLabel, table1_probability


def test_cfi_analytic_is_unity_everywhere_regular():
    for label in LABELS:
        for phi in (0.1, 0.9, 2.3, 4.0, 5.8):
            try:
                value = cfi_analytic(label, phi)
            except SingularProbabilityError:
                continue
            assert value == pytest.approx(1.0, rel=1e-10)


def test_cfi_analytic_singular_points():
    # sigma_y outcome-0 probability hits 1 at phi = 0 for Y0.
    with pytest.raises(SingularProbabilityError):
        cfi_analytic(StateLabel.Y0, 0.0)
    with pytest.raises(SingularProbabilityError):
        cfi_analytic(StateLabel.X0, math.pi / 2)


def test_cfi_empirical_converges_to_analytic():
    # Finite-difference estimate from exact probabilities approaches the
    # closed form as the span shrinks.
    label, phi = StateLabel.X0, 1.1
    for h, tol in ((0.2, 0.02), (0.05, 0.002)):
        phis = (phi - h, phi, phi + h)
        probs = tuple(float(table1_probability(label, 0, x)) for x in phis)
        est = cfi_empirical(ProbabilityTriplet(phis=phis, probs=probs))
        assert est == pytest.approx(cfi_analytic(label, phi), abs=tol)


def test_triplet_validation():
    with pytest.raises(InvalidTripletError):
        ProbabilityTriplet(phis=(0.0, 1.0), probs=(0.4, 0.5))
    with pytest.raises(InvalidTripletError):
        ProbabilityTriplet(phis=(1.0, 0.5, 2.0), probs=(0.4, 0.5, 0.6))
    with pytest.raises(InvalidTripletError):
        ProbabilityTriplet(phis=(0.0, 1.0, 2.0), probs=(0.4, 1.0, 0.6))


def test_crb_values_and_errors():
    assert crb(4.0, 21_000) == pytest.approx(1.0 / math.sqrt(84_000))
    assert crb(1.0, 100) == pytest.approx(0.1)
    with pytest.raises(NoInformationError):
        crb(0.0, 10)
    with pytest.raises(FisherError):
        crb(1.0, 0)


def test_eve_flat_ratio_carries_no_information():
    curve = [(0.5, 0.5), (1.0, 0.5), (1.5, 0.5)]
    result = eve_cfi_from_ratio(curve, 1, 10_000)
    assert result.cfi == 0.0
    assert math.isinf(result.crb)


def test_eve_sloped_ratio():
    curve = [(0.9, 0.45), (1.0, 0.5), (1.1, 0.55)]
    result = eve_cfi_from_ratio(curve, 1, 400)
    # slope 0.5, center 0.5 -> cfi = 0.25 / 0.25 = 1.
    assert result.cfi == pytest.approx(1.0)
    assert result.crb == pytest.approx(0.05)
    with pytest.raises(InvalidTripletError):
        eve_cfi_from_ratio(curve, 0, 400)
    with pytest.raises(InvalidTripletError):
        eve_cfi_from_ratio(curve[:2], 1, 400)


def test_fisher_rows_csv():
    csv = fisher_rows_to_csv([("X0", 1.0, 1.0, 0.01)])
    lines = csv.splitlines()
    assert lines[0] == "state_label,phi,cfi,crb"
    assert lines[1].startswith("X0,1,")


def test_crb_shrinks_with_sqrt_n():
    ratio = crb(1.0, 100) / crb(1.0, 400)
    assert ratio == pytest.approx(2.0)
    assert np.isclose(crb(0.008, 21_000), 0.0772, atol=5e-4)
    assert np.isclose(crb(0.011, 21_000), 0.0658, atol=5e-4)
