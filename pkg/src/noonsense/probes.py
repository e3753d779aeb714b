"""Probe-state constructors: multi-mode N00N, separable N00N and the four-mode 2002 state."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import CapacityError, InvalidSpecError, UnsupportedProbeError
from .fock import PureState

MAX_MODES = 12
MAX_PHOTONS = 6


class ProbeKind(str, enum.Enum):
    MULTI_MODE_NOON = "mn"
    SEPARABLE_NOON = "sn"
    FOUR_MODE_2002 = "2002"
    # analytic-only rows of the comparison table
    MEPE = "mepe"
    CLASSICAL = "classical"

    @classmethod
    def parse(cls, value) -> "ProbeKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "multimodenoon": cls.MULTI_MODE_NOON, "multi_mode_noon": cls.MULTI_MODE_NOON,
            "separablenoon": cls.SEPARABLE_NOON, "separable_noon": cls.SEPARABLE_NOON,
            "fourmode2002": cls.FOUR_MODE_2002, "four_mode_2002": cls.FOUR_MODE_2002,
        }
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise InvalidSpecError(f"unknown probe kind {value!r}") from None


@dataclass(frozen=True)
class ProbeSpec:
    kind: ProbeKind
    d: int
    N: int

    def __post_init__(self):
        object.__setattr__(self, "kind", ProbeKind.parse(self.kind))
        if self.d < 1 or self.N < 1:
            raise InvalidSpecError(f"need d >= 1 and N >= 1, got d={self.d}, N={self.N}")
        if self.kind is ProbeKind.SEPARABLE_NOON and self.N % self.d:
            raise InvalidSpecError(
                f"separable N00N needs N divisible by d (N={self.N}, d={self.d})")
        if self.kind is ProbeKind.FOUR_MODE_2002 and (self.d, self.N) != (2, 2):
            raise InvalidSpecError("the four-mode 2002 state has d = 2 and N = 2")

    def build(self) -> PureState:
        if self.kind in (ProbeKind.MULTI_MODE_NOON, ProbeKind.FOUR_MODE_2002):
            return multi_mode_noon(self.d, self.N)
        if self.kind is ProbeKind.SEPARABLE_NOON:
            return separable_noon(self.d, self.N)
        raise UnsupportedProbeError(f"no state constructor for {self.kind.value}")


def _check_capacity(d: int, N: int) -> None:
    if d < 1 or N < 1:
        raise InvalidSpecError(f"need d >= 1 and N >= 1, got d={d}, N={N}")
    if 2 * d > MAX_MODES or N > MAX_PHOTONS:
        raise CapacityError(
            f"d={d}, N={N} exceeds soft limits ({MAX_MODES} modes, {MAX_PHOTONS} photons)")


def multi_mode_noon(d: int, N: int) -> PureState:
    """All N photons in exactly one of the 2d modes, equal weights, zero relative phases."""
    _check_capacity(d, N)
    amp = 1 / math.sqrt(2 * d)
    amps = {}
    for m in range(2 * d):
        occ = [0] * (2 * d)
        occ[m] = N
        amps[tuple(occ)] = amp
    return PureState(2 * d, amps)


def noon(N: int) -> PureState:
    """Two-mode (|N,0> + |0,N>)/sqrt(2)."""
    return PureState(2, {(N, 0): 1.0, (0, N): 1.0})


def separable_noon(d: int, N: int) -> PureState:
    """Product over nodes of N/d-photon two-mode N00N states."""
    _check_capacity(d, N)
    if N % d:
        raise InvalidSpecError(f"separable N00N needs N divisible by d (N={N}, d={d})")
    return PureState.tensor(*[noon(N // d) for _ in range(d)])


def four_mode_2002() -> PureState:
    return multi_mode_noon(2, 2)


def is_node_bunched(state: PureState) -> bool:
    """True when every ket carries all of its photons at a single node."""
    for k in state.amplitudes:
        nodes = {i // 2 for i, n in enumerate(k) if n}
        if len(nodes) > 1:
            return False
    return True
