import math

import numpy as np
import pytest

from sqrs.qubit import (
    CALIBRATION_PHASES,
    LABELS,
    Basis,
    Measurement,
    QubitState,
    StateLabel,
    apply_phase,
    born_probability,
    outcome_index,
    prepare,
    table1_derivative,
    table1_probability,
)

INV_SQRT2 = 1 / math.sqrt(2)
TOL = 1e-12


def test_prepare_x0():
    s = prepare(StateLabel.X0)
    assert s.amp_h == pytest.approx(INV_SQRT2, abs=TOL)
    assert s.amp_v == pytest.approx(INV_SQRT2, abs=TOL)


def test_prepare_y1():
    s = prepare(StateLabel.Y1)
    assert s.amp_h == pytest.approx(INV_SQRT2, abs=TOL)
    assert s.amp_v == pytest.approx(-1j * INV_SQRT2, abs=TOL)


def test_prepared_states_orthogonal_within_basis():
    assert abs(prepare(StateLabel.X0).inner(prepare(StateLabel.X1))) < TOL
    assert abs(prepare(StateLabel.Y0).inner(prepare(StateLabel.Y1))) < TOL


def test_apply_phase_identity():
    s = apply_phase(prepare(StateLabel.X0), 0.0)
    assert s.equals_up_to_global_phase(prepare(StateLabel.X0))
    assert s.amp_v == pytest.approx(INV_SQRT2, abs=TOL)


def test_apply_phase_pi_maps_x0_to_x1():
    s = apply_phase(prepare(StateLabel.X0), math.pi)
    assert s.equals_up_to_global_phase(prepare(StateLabel.X1))


def test_apply_phase_half_pi_maps_x0_to_y0():
    s = apply_phase(prepare(StateLabel.X0), math.pi / 2)
    assert s.equals_up_to_global_phase(prepare(StateLabel.Y0))


def test_born_eigenstate_in_own_basis():
    p = born_probability(prepare(StateLabel.Y0), Measurement(Basis.SIGMA_Y, 0))
    assert p == pytest.approx(1.0, abs=TOL)


def test_born_mutually_unbiased():
    p = born_probability(prepare(StateLabel.X0), Measurement(Basis.SIGMA_Y, 0))
    assert p == pytest.approx(0.5, abs=TOL)


def test_born_encoded_x0_at_half_pi():
    state = apply_phase(prepare(StateLabel.X0), math.pi / 2)
    p = born_probability(state, Measurement(Basis.SIGMA_Y, 0))
    assert p == pytest.approx(1.0, abs=TOL)


def test_table1_reference_points():
    assert table1_probability(StateLabel.X0, 0, math.pi / 2) == pytest.approx(1.0, abs=TOL)
    assert table1_probability(StateLabel.Y0, 0, 0.0) == pytest.approx(1.0, abs=TOL)
    assert table1_probability(StateLabel.X1, 1, 0.0) == pytest.approx(0.5, abs=TOL)


def test_table1_matches_born_rule_on_random_triples():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        label = LABELS[rng.integers(4)]
        outcome = int(rng.integers(2))
        phi = float(rng.uniform(-4 * math.pi, 4 * math.pi))
        closed = table1_probability(label, outcome, phi)
        born = born_probability(apply_phase(prepare(label), phi),
                                Measurement(Basis.SIGMA_Y, outcome))
        assert closed == pytest.approx(born, abs=TOL)


def test_normalization_preserved_by_phase():
    rng = np.random.default_rng(5)
    for _ in range(200):
        label = LABELS[rng.integers(4)]
        s = apply_phase(prepare(label), float(rng.uniform(0, 2 * math.pi)))
        norm = abs(s.amp_h) ** 2 + abs(s.amp_v) ** 2
        assert norm == pytest.approx(1.0, abs=TOL)


def test_phase_is_unitary_on_inner_products():
    rng = np.random.default_rng(6)
    for _ in range(200):
        a = prepare(LABELS[rng.integers(4)])
        b = prepare(LABELS[rng.integers(4)])
        phi = float(rng.uniform(0, 2 * math.pi))
        before = abs(a.inner(b))
        after = abs(apply_phase(a, phi).inner(apply_phase(b, phi)))
        assert after == pytest.approx(before, abs=TOL)


def test_outcome_probabilities_sum_to_one():
    rng = np.random.default_rng(7)
    for _ in range(100):
        state = apply_phase(prepare(LABELS[rng.integers(4)]),
                            float(rng.uniform(0, 2 * math.pi)))
        for basis in Basis:
            total = sum(born_probability(state, Measurement(basis, o))
                        for o in (0, 1))
            assert total == pytest.approx(1.0, abs=TOL)


def test_table1_periodicity():
    rng = np.random.default_rng(8)
    for _ in range(100):
        label = LABELS[rng.integers(4)]
        outcome = int(rng.integers(2))
        phi = float(rng.uniform(0, 2 * math.pi))
        assert table1_probability(label, outcome, phi) == pytest.approx(
            table1_probability(label, outcome, phi + 2 * math.pi), abs=TOL)


def test_table1_derivative_matches_finite_difference():
    h = 1e-6
    rng = np.random.default_rng(9)
    for _ in range(50):
        label = LABELS[rng.integers(4)]
        outcome = int(rng.integers(2))
        phi = float(rng.uniform(0, 2 * math.pi))
        fd = (table1_probability(label, outcome, phi + h)
              - table1_probability(label, outcome, phi - h)) / (2 * h)
        assert table1_derivative(label, outcome, phi) == pytest.approx(fd, abs=1e-8)


def test_outcome_index_layout():
    assert outcome_index(StateLabel.X0, 0) == 1
    assert outcome_index(StateLabel.X1, 1) == 4
    assert outcome_index(StateLabel.Y0, 0) == 5
    assert outcome_index(StateLabel.Y1, 1) == 8


def test_calibration_phases_are_the_zeros():
    for index in range(1, 9):
        label = LABELS[(index - 1) // 2]
        outcome = (index - 1) % 2
        p = table1_probability(label, outcome, CALIBRATION_PHASES[index])
        assert p == pytest.approx(0.0, abs=TOL)


def test_unnormalized_state_rejected():
    with pytest.raises(ValueError):
        QubitState(1.0, 1.0)
