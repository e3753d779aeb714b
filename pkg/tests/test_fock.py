import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noonsense.errors import DimensionError, SpecError
from noonsense.fock import (Arm, ModeRef, PureState, apply_beam_splitter, apply_phase,
                            inner_product, ket, number_moments)
from noonsense.probes import multi_mode_noon

from oracle import DenseFock


def random_state(rng, modes, photons, terms=4):
    amps = {}
    for _ in range(terms):
        occ = [0] * modes
        for _ in range(photons):
            occ[rng.integers(modes)] += 1
        amps[tuple(occ)] = complex(rng.normal(), rng.normal())
    return PureState(modes, amps)


def test_ket_rejects_negative():
    with pytest.raises(SpecError):
        ket(1, -1)


def test_state_is_normalized_and_pruned():
    s = PureState(2, {(2, 0): 3.0, (0, 2): 4j, (1, 1): 1e-17})
    assert s.norm() == pytest.approx(1.0, abs=1e-12)
    assert len(s) == 2
    assert s.amplitude((2, 0)) == pytest.approx(0.6)


def test_mode_ref_flat_index():
    assert ModeRef(0, Arm.A).index == 0
    assert ModeRef(1, Arm.B).index == 3
    assert ModeRef.from_index(3) == ModeRef(1, Arm.B)


def test_ket_length_mismatch():
    with pytest.raises(DimensionError):
        PureState(3, {(1, 0): 1})


def test_inner_product_examples():
    psi = multi_mode_noon(2, 2)
    assert inner_product(psi, psi) == pytest.approx(1.0, abs=1e-12)
    assert inner_product(PureState.basis((2, 0)), PureState.basis((0, 2))) == 0
    assert inner_product(psi, PureState.basis((2, 0, 0, 0))) == pytest.approx(0.5)


def test_inner_product_conjugate_symmetric():
    rng = np.random.default_rng(3)
    x, y = random_state(rng, 3, 2, 5), random_state(rng, 3, 2, 5)
    assert inner_product(x, y) == pytest.approx(inner_product(y, x).conjugate())


def test_inner_product_dimension_error():
    with pytest.raises(DimensionError):
        inner_product(PureState.basis((1, 0)), PureState.basis((1, 0, 0)))


def test_phase_on_number_eigenstate():
    phi = 0.37
    out = apply_phase(PureState.basis((2, 0)), ModeRef(0, Arm.A), phi)
    assert out.amplitude((2, 0)) == pytest.approx(cmath.exp(2j * phi))


def test_phase_identity():
    psi = multi_mode_noon(2, 3)
    assert apply_phase(psi, 1, 0.0).allclose(psi)


def test_phase_noon_half_pi():
    noon = PureState(2, {(2, 0): 1, (0, 2): 1})
    out = apply_phase(noon, ModeRef(0), math.pi / 2)
    expected = PureState(2, {(2, 0): -1, (0, 2): 1})
    assert out.allclose(expected)
    fock = DenseFock(2, 2)
    dense = fock.phase(0, math.pi / 2) @ noon.to_dense(2)
    assert np.allclose(dense, out.to_dense(2), atol=1e-12)


def test_phase_mode_out_of_range():
    with pytest.raises(DimensionError):
        apply_phase(PureState.basis((1, 0)), 2, 0.1)


def test_beam_splitter_single_photon():
    out = apply_beam_splitter(PureState.basis((1, 0)), 0, 1)
    r = 1 / math.sqrt(2)
    assert out.allclose(PureState(2, {(1, 0): r, (0, 1): 1j * r}))


def test_beam_splitter_two_photons():
    out = apply_beam_splitter(PureState.basis((2, 0)), 0, 1)
    expected = {(2, 0): 0.5, (1, 1): 1j * math.sqrt(2) / 2, (0, 2): -0.5}
    for k, a in expected.items():
        assert out.amplitude(k) == pytest.approx(a, abs=1e-12)
    fock = DenseFock(2, 2)
    dense = fock.beam_splitter(0, 1) @ PureState.basis((2, 0)).to_dense(2)
    assert np.allclose(dense, out.to_dense(2), atol=1e-12)


@pytest.mark.parametrize("phi", [0.0, 0.3, 1.1, 2.5])
def test_beam_splitter_noon_fringe(phi):
    noon = PureState(2, {(2, 0): cmath.exp(2j * phi), (0, 2): 1})
    out = apply_beam_splitter(noon, 0, 1)
    assert abs(out.amplitude((1, 1))) ** 2 == pytest.approx((1 + math.cos(2 * phi)) / 2, abs=1e-12)


def test_beam_splitter_same_mode():
    with pytest.raises(SpecError):
        apply_beam_splitter(PureState.basis((1, 0)), 0, 0)


def test_number_moments_2002():
    means, cov = number_moments(multi_mode_noon(2, 2), [ModeRef(0), ModeRef(1)])
    assert np.allclose(means, [0.5, 0.5])
    assert np.allclose(cov, [[0.75, -0.25], [-0.25, 0.75]])
    assert np.allclose(4 * cov, [[3, -1], [-1, 3]])


def test_number_moments_eigenstate_and_noon():
    _, cov = number_moments(PureState.basis((3, 0)), [0, 1])
    assert np.allclose(cov, 0)
    means, cov = number_moments(PureState(2, {(2, 0): 1, (0, 2): 1}), [0])
    assert means[0] == pytest.approx(1)
    assert cov[0, 0] == pytest.approx(1)


def test_json_roundtrip():
    psi = apply_phase(multi_mode_noon(2, 2), 0, 0.4)
    back = PureState.from_json(psi.to_json())
    assert back.allclose(psi, atol=1e-15)


# -- properties ------------------------------------------------------------------------


ops = st.lists(
    st.one_of(
        st.tuples(st.just("phase"), st.integers(0, 3), st.floats(-7, 7)),
        st.tuples(st.just("bs"), st.integers(0, 3), st.integers(0, 3)),
    ),
    max_size=8,
)


def _apply(state, op):
    if op[0] == "phase":
        return apply_phase(state, op[1], op[2])
    if op[1] == op[2]:
        return state
    return apply_beam_splitter(state, op[1], op[2])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), photons=st.integers(1, 3), sequence=ops)
def test_norm_and_photon_number_preserved(seed, photons, sequence):
    state = random_state(np.random.default_rng(seed), 4, photons)
    for op in sequence:
        state = _apply(state, op)
    assert abs(state.norm() - 1) < 1e-12
    assert state.photon_numbers() == {photons}


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), photons=st.integers(1, 4),
       pair=st.sampled_from([(0, 1), (1, 0), (0, 2), (3, 1)]))
def test_beam_splitter_inverse_restores_input(seed, photons, pair):
    state = random_state(np.random.default_rng(seed), 4, photons)
    back = apply_beam_splitter(apply_beam_splitter(state, *pair), *pair, inverse=True)
    assert back.allclose(state, atol=1e-12)


@pytest.mark.parametrize("modes,photons", [(2, 1), (2, 3), (3, 2), (4, 2), (4, 3)])
def test_sparse_matches_dense_oracle(modes, photons):
    rng = np.random.default_rng(modes * 10 + photons)
    fock = DenseFock(modes, photons)
    for _ in range(5):
        state = random_state(rng, modes, photons)
        dense = state.to_dense(photons)
        for _ in range(6):
            if rng.random() < 0.5:
                m, phi = int(rng.integers(modes)), float(rng.uniform(-4, 4))
                state = apply_phase(state, m, phi)
                dense = fock.phase(m, phi) @ dense
            else:
                m1, m2 = rng.choice(modes, 2, replace=False)
                state = apply_beam_splitter(state, int(m1), int(m2))
                dense = fock.beam_splitter(int(m1), int(m2)) @ dense
            assert np.abs(state.to_dense(photons) - dense).max() < 1e-10
        idx = list(range(modes))
        means, cov = number_moments(state, idx)
        n_ops = [fock.number(m) for m in idx]
        dm = np.array([np.vdot(dense, n @ dense).real for n in n_ops])
        dc = np.array([[np.vdot(dense, a @ b @ dense).real for b in n_ops] for a in n_ops]) - np.outer(dm, dm)
        assert np.allclose(means, dm, atol=1e-10)
        assert np.allclose(cov, dc, atol=1e-10)
