import math

import numpy as np
import pytest

from noonsense.errors import DimensionError, SpecError, UnsupportedProbeError
from noonsense.measurement import (FringeModel, FullCountingModel, LocalMeasurementModel,
                                   VisibilityModel, enumerate_outcomes, fringe_probabilities,
                                   ideal_probabilities)
from noonsense.network import SensorNetwork
from noonsense.probes import multi_mode_noon, separable_noon

from oracle import closed_form_2002, oracle_outcome_probabilities

GRID = np.linspace(0, math.pi, 100)


@pytest.fixture(scope="module")
def model_2002():
    return LocalMeasurementModel(multi_mode_noon(2, 2), 2)


def test_enumerate_outcomes():
    assert len(enumerate_outcomes(2, 2)) == 6
    assert len(enumerate_outcomes(1, 1)) == 2
    assert len(enumerate_outcomes(3, 2)) == 9
    labels = [o.label for o in enumerate_outcomes(2, 2)]
    assert labels == ["P1_20", "P1_11", "P1_02", "P2_20", "P2_11", "P2_02"]


def test_2002_at_zero_and_half_pi():
    probe = multi_mode_noon(2, 2)
    at0 = ideal_probabilities(probe, SensorNetwork(2))
    assert np.allclose(at0.probabilities, [0, 0.5, 0, 0, 0.5, 0], atol=1e-15)
    at90 = ideal_probabilities(probe, SensorNetwork(2).uniform_scan(math.pi / 2))
    assert np.allclose(at90.probabilities, [0.25, 0, 0.25, 0.25, 0, 0.25], atol=1e-15)


def test_2002_matches_closed_form_and_oracle(model_2002):
    probe = multi_mode_noon(2, 2)
    rng = np.random.default_rng(0)
    for phi1, phi2 in zip(GRID, rng.permutation(GRID)):
        sparse = ideal_probabilities(probe, SensorNetwork(2, phases=(phi1, phi2))).probabilities
        assert np.abs(sparse - closed_form_2002(phi1, phi2)).max() < 1e-10
        assert np.abs(sparse - oracle_outcome_probabilities(probe, (phi1, phi2))).max() < 1e-10
        assert np.abs(sparse - model_2002.probabilities([phi1, phi2])).max() < 1e-12


@pytest.mark.parametrize("d,N", [(1, 3), (2, 3), (3, 1), (1, 4)])
def test_general_probes_match_oracle(d, N):
    probe = multi_mode_noon(d, N)
    model = LocalMeasurementModel(probe, d)
    rng = np.random.default_rng(d * 7 + N)
    for _ in range(5):
        phases = rng.uniform(0, math.pi, d)
        sparse = ideal_probabilities(probe, SensorNetwork(d, phases=phases)).probabilities
        assert np.abs(sparse - oracle_outcome_probabilities(probe, phases)).max() < 1e-10
        assert np.abs(sparse - model.probabilities(phases)).max() < 1e-12


def test_normalization_over_grid(model_2002):
    fringe = FringeModel(model_2002, VisibilityModel.measured())
    grid = np.stack([GRID, GRID[::-1]], axis=1)
    assert np.abs(model_2002.probabilities(grid).sum(axis=1) - 1).max() < 1e-10
    assert np.abs(fringe.probabilities(grid).sum(axis=1) - 1).max() < 1e-10


def test_node_locality(model_2002):
    h = 1e-3
    for phi1 in GRID:
        for phi2 in (0.2, 1.3):
            up = model_2002.probabilities([phi1, phi2 + h])
            down = model_2002.probabilities([phi1, phi2 - h])
            assert np.abs((up - down)[:3]).max() < 1e-10
            up = model_2002.probabilities([phi2 + h, phi1])
            down = model_2002.probabilities([phi2 - h, phi1])
            assert np.abs((up - down)[3:]).max() < 1e-10


def test_cross_node_probe_rejected():
    with pytest.raises(UnsupportedProbeError):
        ideal_probabilities(separable_noon(2, 2), SensorNetwork(2))


def test_full_counting_separable_normalized():
    model = FullCountingModel(separable_noon(2, 4), 2)
    p = model.probabilities(np.array([[0.2, 0.9], [1.4, 0.1]]))
    assert np.allclose(p.sum(axis=1), 1)


def test_visibility_one_is_ideal(model_2002):
    fringe = FringeModel(model_2002, VisibilityModel.uniform(1.0))
    grid = np.stack([GRID, GRID[::-1]], axis=1)
    assert np.abs(fringe.probabilities(grid) - model_2002.probabilities(grid)).max() < 1e-10


def test_visibility_zero_is_flat():
    dist = fringe_probabilities(SensorNetwork(2, phases=(0.3, 1.2)), VisibilityModel.uniform(0.0))
    assert np.allclose(dist.probabilities, [0.125, 0.25, 0.125] * 2)


def test_damped_fringe_closed_form(model_2002):
    vis = VisibilityModel((0.9, 0.8, 0.7, 0.6, 0.5, 0.4), offsets=(0.3, -0.2))
    fringe = FringeModel(model_2002, vis)
    for phi1, phi2 in [(0.1, 0.2), (0.7, 1.4), (1.0, 0.0)]:
        raw = []
        for phi, delta, (v20, v11, v02) in ((phi1, 0.3, (0.9, 0.8, 0.7)), (phi2, -0.2, (0.6, 0.5, 0.4))):
            c = math.cos(2 * phi + delta)
            raw += [(1 - v20 * c) / 8, (1 + v11 * c) / 4, (1 - v02 * c) / 8]
        raw = np.array(raw)
        assert np.allclose(fringe.unnormalized([phi1, phi2]), raw, atol=1e-12)
        assert np.allclose(fringe.probabilities([phi1, phi2]), raw / raw.sum(), atol=1e-12)


def test_measured_visibility_fringes(model_2002):
    vis = VisibilityModel.measured()
    assert vis.visibilities == (0.96, 0.97, 0.96, 0.97, 0.94, 0.99)
    fringe = FringeModel(model_2002, vis)
    # P2_02 is smallest at phi = 0 where cos(2 phi) = 1
    assert fringe.unnormalized([0.0, 0.0])[5] == pytest.approx((1 - 0.99) / 8)
    grid = np.stack([GRID, GRID], axis=1)
    assert fringe.renormalization(grid).max() < 0.02


def test_visibility_validation(model_2002):
    with pytest.raises(SpecError):
        VisibilityModel((1.1,) * 6)
    with pytest.raises(DimensionError):
        FringeModel(model_2002, VisibilityModel((0.9,) * 5))
