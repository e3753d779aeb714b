"""Local beam-splitter + photon-number-resolving measurement at each node.

Two evaluation paths produce the same post-selected outcome probabilities:

* :func:`ideal_probabilities` pushes the full sparse state through phase
  encoding and the per-node beam splitters for one phase vector.
* :class:`LocalMeasurementModel` precomputes, once per probe, the
  beam-splitter transfer amplitudes and afterwards evaluates whole phase grids
  as a single vectorized expression. Estimation and Fisher scans use this path.

:class:`FringeModel` adds the visibility damping used to describe the
experimental fringes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, SpecError, UnsupportedProbeError
from .fock import Arm, ModeRef, PureState, apply_beam_splitter, ket
from .network import SensorNetwork, encode_phases
from .probes import is_node_bunched, multi_mode_noon

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class Outcome:
    """``counts[0]`` photons in output port a', ``counts[1]`` in b' of ``node``."""

    node: int
    counts: tuple

    @property
    def label(self) -> str:
        return f"P{self.node + 1}_{self.counts[0]}{self.counts[1]}"


def enumerate_outcomes(d: int, N: int) -> list:
    """Node-major, a'-count descending: for d=2, N=2 that is P1_20, P1_11, P1_02, P2_20, ..."""
    return [Outcome(j, (na, N - na)) for j in range(d) for na in range(N, -1, -1)]


@dataclass(frozen=True)
class OutcomeDistribution:
    outcomes: tuple
    probabilities: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (len(self.outcomes),):
            raise DimensionError("one probability per outcome required")
        if np.any(p < -NORMALIZATION_TOL):
            raise SpecError("negative probability")
        if abs(p.sum() - 1) > NORMALIZATION_TOL:
            raise SpecError(f"probabilities sum to {p.sum()}, not 1")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "probabilities", p)

    @property
    def labels(self) -> list:
        return [o.label if isinstance(o, Outcome) else str(o) for o in self.outcomes]

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.probabilities.tolist()))

    def __getitem__(self, label: str) -> float:
        return self.as_dict()[label]


def _photon_number(probe: PureState) -> int:
    ns = probe.photon_numbers()
    if len(ns) != 1:
        raise UnsupportedProbeError(f"probe mixes photon numbers {sorted(ns)}")
    return ns.pop()


def _check_local_probe(probe: PureState, d: int) -> int:
    if probe.mode_count != 2 * d:
        raise DimensionError(f"probe has {probe.mode_count} modes, expected {2 * d}")
    if not is_node_bunched(probe):
        raise UnsupportedProbeError(
            "local post-selected measurement needs all photons of each ket at a single node")
    return _photon_number(probe)


def _outcome_ket(outcome: Outcome, d: int) -> tuple:
    occ = [0] * (2 * d)
    occ[2 * outcome.node], occ[2 * outcome.node + 1] = outcome.counts
    return ket(*occ)


def apply_local_beam_splitters(state: PureState) -> PureState:
    for j in range(state.mode_count // 2):
        state = apply_beam_splitter(state, ModeRef(j, Arm.A), ModeRef(j, Arm.B))
    return state


def ideal_probabilities(probe: PureState, network: SensorNetwork) -> OutcomeDistribution:
    """Encode, interfere at every node, and project onto each post-selected outcome."""
    N = _check_local_probe(probe, network.d)
    out = apply_local_beam_splitters(encode_phases(probe, network))
    outcomes = enumerate_outcomes(network.d, N)
    probs = np.array([abs(out.amplitude(_outcome_ket(o, network.d))) ** 2 for o in outcomes])
    return OutcomeDistribution(outcomes, probs)


def full_counting_probabilities(probe: PureState, network: SensorNetwork) -> OutcomeDistribution:
    """Joint photon-counting distribution over every output ket, for any probe.

    Outcomes are the occupation tuples after the local beam splitters; no
    post-selection is applied.
    """
    out = apply_local_beam_splitters(encode_phases(probe, network))
    kets = out.kets()
    probs = np.array([abs(out.amplitude(k)) ** 2 for k in kets])
    return OutcomeDistribution(kets, probs / probs.sum())


def _as_phase_matrix(phis, d: int) -> tuple:
    arr = np.asarray(phis, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != d:
        raise DimensionError(f"phase vectors must have length {d}")
    return arr, single


class LocalMeasurementModel:
    """Phase -> outcome-probability map for a fixed node-bunched probe.

    Each outcome amplitude is a finite Fourier sum over the probe kets,
    ``sum_k C[l, k] exp(i n_k . phi)``, where ``n_k`` holds the arm-A photon
    numbers of ket ``k`` and ``C`` comes from the sparse beam-splitter engine.
    """

    def __init__(self, probe: PureState, d: int):
        self.N = _check_local_probe(probe, d)
        self.d = d
        self.probe = probe
        self._compile(enumerate_outcomes(d, self.N), lambda o: _outcome_ket(o, d))

    def _compile(self, outcomes, ket_of) -> None:
        self.outcomes = tuple(outcomes)
        index = {ket_of(o): i for i, o in enumerate(self.outcomes)}
        kets = self.probe.kets()
        self._gen = np.array([[k[2 * j] for j in range(self.d)] for k in kets], dtype=float)
        self._coef = np.zeros((len(self.outcomes), len(kets)), dtype=complex)
        for c, k in enumerate(kets):
            out = apply_local_beam_splitters(PureState.basis(k))
            for ok, amp in out.amplitudes.items():
                self._coef[index[ok], c] += self.probe.amplitude(k) * amp

    @property
    def labels(self) -> list:
        return [o.label if isinstance(o, Outcome) else "n" + "".join(map(str, o))
                for o in self.outcomes]

    def probabilities(self, phis) -> np.ndarray:
        """Shape ``(L,)`` for one phase vector, ``(m, L)`` for an ``(m, d)`` array."""
        arr, single = _as_phase_matrix(phis, self.d)
        phase = np.exp(1j * (arr @ self._gen.T))
        p = np.abs(phase @ self._coef.T) ** 2
        return p[0] if single else p

    def along_scan(self, phi) -> np.ndarray:
        """Probabilities on the line phi_1 = ... = phi_d = phi; ``phi`` scalar or 1-D."""
        phi = np.asarray(phi, dtype=float)
        return self.probabilities(np.repeat(np.atleast_1d(phi)[:, None], self.d, axis=1)).reshape(
            phi.shape + (len(self.outcomes),))

    def distribution(self, phis) -> OutcomeDistribution:
        return OutcomeDistribution(self.outcomes, self.probabilities(np.asarray(phis, float)))

    def __call__(self, phis) -> OutcomeDistribution:
        return self.distribution(phis)


class FullCountingModel(LocalMeasurementModel):
    """Joint photon counting at every output port, for any fixed-photon-number probe.

    Outcomes are all output kets reachable through the local beam splitters,
    sorted; there is no post-selection.
    """

    def __init__(self, probe: PureState, d: int):
        if probe.mode_count != 2 * d:
            raise DimensionError(f"probe has {probe.mode_count} modes, expected {2 * d}")
        self.N = _photon_number(probe)
        self.d = d
        self.probe = probe
        reachable = set()
        for k in probe.kets():
            reachable.update(apply_local_beam_splitters(PureState.basis(k)).amplitudes)
        self._compile(sorted(reachable), lambda o: o)


@dataclass(frozen=True)
class VisibilityModel:
    """Per-outcome fringe visibilities (canonical outcome order) and per-node offsets."""

    visibilities: tuple
    offsets: Optional[tuple] = None

    def __post_init__(self):
        v = tuple(float(x) for x in self.visibilities)
        if any(not 0.0 <= x <= 1.0 for x in v):
            raise SpecError(f"visibilities must lie in [0, 1]: {v}")
        object.__setattr__(self, "visibilities", v)
        if self.offsets is not None:
            object.__setattr__(self, "offsets", tuple(float(x) for x in self.offsets))

    @classmethod
    def uniform(cls, v: float, d: int = 2, N: int = 2) -> "VisibilityModel":
        return cls((v,) * (d * (N + 1)))

    @classmethod
    def from_coincidence_first(cls, values: Sequence[float], offsets=None) -> "VisibilityModel":
        """Reorder d=2, N=2 values given as (P1_11, P1_20, P1_02, P2_11, P2_20, P2_02)."""
        if len(values) != 6:
            raise DimensionError("coincidence-first ordering lists six visibilities")
        v = list(values)
        return cls((v[1], v[0], v[2], v[4], v[3], v[5]), offsets)

    @classmethod
    def measured(cls) -> "VisibilityModel":
        return cls.from_coincidence_first(MEASURED_VISIBILITIES)


# measured fringe visibilities of the 2002-state experiment, listed as P1_11, P1_20,
# P1_02, P2_11, P2_20, P2_02
MEASURED_VISIBILITIES = (0.97, 0.96, 0.96, 0.94, 0.97, 0.99)


class FringeModel:
    """Visibility-damped fringes around the ideal model, renormalized to sum 1.

    For outcome ``l`` at node ``j``: ``P_l = mean_l + V_l (P_l^ideal(phi_j + delta_j / N) - mean_l)``
    where ``mean_l`` is the period average of the ideal fringe. With d=2, N=2
    this gives ``(1 + V cos(2 phi + delta)) / 4`` and ``(1 - V cos(2 phi + delta)) / 8``
    before renormalization.
    """

    def __init__(self, base: LocalMeasurementModel, vis: VisibilityModel):
        L = len(base.outcomes)
        if len(vis.visibilities) != L:
            raise DimensionError(f"{L} visibilities required, got {len(vis.visibilities)}")
        offsets = np.zeros(base.d) if vis.offsets is None else np.asarray(vis.offsets, float)
        if offsets.shape != (base.d,):
            raise DimensionError(f"{base.d} phase offsets required")
        self.base = base
        self.vis = vis
        self.d, self.N, self.outcomes = base.d, base.N, base.outcomes
        self._v = np.asarray(vis.visibilities)
        self._shift = offsets / base.N

    labels = LocalMeasurementModel.labels

    def unnormalized(self, phis) -> np.ndarray:
        arr, single = _as_phase_matrix(phis, self.d)
        shifted = arr + self._shift
        # arm-A generators take values 0..N, so N + 1 equally spaced samples
        # average out every harmonic exactly
        K = self.N + 1
        samples = [self.base.probabilities(shifted + 2 * np.pi * t / K) for t in range(K)]
        mean = sum(samples) / K
        p = mean + self._v * (samples[0] - mean)
        return p[0] if single else p

    def probabilities(self, phis) -> np.ndarray:
        p = self.unnormalized(phis)
        return p / p.sum(axis=-1, keepdims=True)

    along_scan = LocalMeasurementModel.along_scan

    def renormalization(self, phis) -> np.ndarray:
        """Relative correction ``|sum(P_unnormalized) - 1|`` per phase vector."""
        return np.abs(self.unnormalized(phis).sum(axis=-1) - 1)

    def distribution(self, phis) -> OutcomeDistribution:
        phis = np.asarray(phis, float)
        return OutcomeDistribution(self.outcomes, self.probabilities(phis),
                                   {"renormalization": float(self.renormalization(phis))})

    __call__ = distribution


def fringe_probabilities(network: SensorNetwork, vis: VisibilityModel, N: int = 2) -> OutcomeDistribution:
    """Visibility-model distribution for the multi-mode N00N probe on ``network``."""
    model = FringeModel(LocalMeasurementModel(multi_mode_noon(network.d, N), network.d), vis)
    return model.distribution(network.phi)
