"""Distributed sensing scenario: d nodes, one unknown phase per node, a weighted global phase."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, SpecError
from .fock import Arm, ModeRef, PureState, apply_phase

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class SensorNetwork:
    """``d`` two-arm interferometers with weights ``nu`` and true phases ``phases``.

    Weights default to the uniform average ``1/d`` and must satisfy
    ``sum |nu_j| = 1``.
    """

    d: int
    weights: Optional[Sequence[float]] = None
    phases: Optional[Sequence[float]] = None
    _w: np.ndarray = field(init=False, repr=False, compare=False)
    _p: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise SpecError(f"node count must be positive, got {self.d}")
        w = np.full(self.d, 1.0 / self.d) if self.weights is None else np.asarray(self.weights, float)
        p = np.zeros(self.d) if self.phases is None else np.asarray(self.phases, float)
        if w.shape != (self.d,) or p.shape != (self.d,):
            raise DimensionError(f"weights and phases must have length d={self.d}")
        if abs(np.abs(w).sum() - 1) > WEIGHT_TOL:
            raise SpecError(f"weights must satisfy sum |nu_j| = 1, got {np.abs(w).sum()}")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "phases", tuple(float(x) for x in p))
        object.__setattr__(self, "_w", w)
        object.__setattr__(self, "_p", p)

    @property
    def nu(self) -> np.ndarray:
        return self._w.copy()

    @property
    def phi(self) -> np.ndarray:
        return self._p.copy()

    @property
    def mode_count(self) -> int:
        return 2 * self.d

    def with_phases(self, phases: Sequence[float]) -> "SensorNetwork":
        return replace(self, phases=tuple(phases))

    def uniform_scan(self, phi: float) -> "SensorNetwork":
        """All node phases set to ``phi`` (the experiment's scan line)."""
        return self.with_phases([phi] * self.d)


@dataclass(frozen=True)
class GlobalParameter:
    value: float


def global_parameter(network: SensorNetwork) -> GlobalParameter:
    return GlobalParameter(float(sum(w * p for w, p in zip(network.weights, network.phases))))


def encode_phases(probe: PureState, network: SensorNetwork, order: Optional[Sequence[int]] = None) -> PureState:
    """Imprint phase ``phi_j`` on arm A of every node; arm B is the reference.

    ``order`` permutes the node application order (the result does not depend on it).
    """
    if probe.mode_count != network.mode_count:
        raise DimensionError(
            f"probe has {probe.mode_count} modes, network needs {network.mode_count}")
    state = probe
    for j in (range(network.d) if order is None else order):
        state = apply_phase(state, ModeRef(j, Arm.A), network.phases[j])
    return state
