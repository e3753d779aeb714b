import cmath
import math

import numpy as np
import pytest

from noonsense.errors import DimensionError, SpecError
from noonsense.fock import PureState
from noonsense.network import SensorNetwork, encode_phases, global_parameter
from noonsense.probes import multi_mode_noon, separable_noon

from oracle import DenseFock


def test_default_weights_uniform():
    assert np.allclose(SensorNetwork(4).nu, 0.25)


def test_weights_must_be_normalized():
    with pytest.raises(SpecError):
        SensorNetwork(2, weights=(0.5, 0.6))
    SensorNetwork(2, weights=(0.75, -0.25))


def test_global_parameter():
    assert global_parameter(SensorNetwork(2, phases=(0.3, 0.5))).value == pytest.approx(0.4)
    assert global_parameter(SensorNetwork(3).uniform_scan(1.2)).value == pytest.approx(1.2)
    assert global_parameter(SensorNetwork(2).uniform_scan(math.pi / 8)).value == pytest.approx(math.pi / 8)


def test_zero_phases_leave_probe_unchanged():
    psi = multi_mode_noon(3, 2)
    assert encode_phases(psi, SensorNetwork(3)).allclose(psi)


def test_2002_encoding():
    p1, p2 = 0.31, 1.07
    out = encode_phases(multi_mode_noon(2, 2), SensorNetwork(2, phases=(p1, p2)))
    expected = PureState(4, {(2, 0, 0, 0): cmath.exp(2j * p1), (0, 2, 0, 0): 1,
                             (0, 0, 2, 0): cmath.exp(2j * p2), (0, 0, 0, 2): 1})
    assert out.allclose(expected)
    fock = DenseFock(4, 2)
    dense = fock.phase(2, p2) @ fock.phase(0, p1) @ multi_mode_noon(2, 2).to_dense(2)
    assert np.allclose(dense, out.to_dense(2), atol=1e-12)


def test_encoding_inverse():
    psi = separable_noon(2, 4)
    net = SensorNetwork(2, phases=(0.7, -1.3))
    back = encode_phases(encode_phases(psi, net), net.with_phases(-net.phi))
    assert back.allclose(psi, atol=1e-12)


def test_encoding_order_and_periodicity():
    rng = np.random.default_rng(5)
    psi = multi_mode_noon(3, 3)
    for _ in range(10):
        phases = rng.uniform(-3, 3, 3)
        net = SensorNetwork(3, phases=phases)
        ref = encode_phases(psi, net)
        assert encode_phases(psi, net, order=[2, 0, 1]).allclose(ref, atol=1e-12)
        shifted = net.with_phases(phases + 2 * np.pi * np.array([1, 0, -1]))
        assert encode_phases(psi, shifted).allclose(ref, atol=1e-12)


def test_encoding_dimension_mismatch():
    with pytest.raises(DimensionError):
        encode_phases(multi_mode_noon(2, 2), SensorNetwork(3))
