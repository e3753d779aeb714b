"""Sparse multi-mode Fock states and the linear-optical operations acting on them.

A :class:`PureState` stores only the occupation-number kets it populates, so a
multi-mode N00N state over ``2d`` modes costs ``2d`` dictionary entries
regardless of how large the full Fock basis is.

Mode layout: node ``j`` owns arms A and B at flat indices ``2j`` and ``2j + 1``.

Beam-splitter convention (fixed throughout the package)::

    a† -> (a† + i b†) / sqrt(2)
    b† -> (i a† + b†) / sqrt(2)
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DimensionError, SpecError

FockKet = tuple  # tuple[int, ...] of photons per mode

PRUNE_TOL = 1e-15
NORM_TOL = 1e-12

_INV_SQRT2 = 1 / math.sqrt(2)
BS_MATRIX = np.array([[1, 1j], [1j, 1]], dtype=complex) * _INV_SQRT2


class Arm(enum.IntEnum):
    A = 0
    B = 1


@dataclass(frozen=True)
class ModeRef:
    """One arm of one node's interferometer."""

    node: int
    arm: Arm = Arm.A

    def __post_init__(self):
        if self.node < 0:
            raise SpecError(f"node index must be non-negative, got {self.node}")
        object.__setattr__(self, "arm", Arm(self.arm))

    @property
    def index(self) -> int:
        return 2 * self.node + int(self.arm)

    @classmethod
    def from_index(cls, index: int) -> "ModeRef":
        return cls(index // 2, Arm(index % 2))


ModeLike = Union[ModeRef, int]


def ket(*occupations: int) -> FockKet:
    """Validated occupation tuple, e.g. ``ket(2, 0, 0, 0)``."""
    occ = tuple(int(n) for n in occupations)
    if any(n < 0 for n in occ):
        raise SpecError(f"occupations must be non-negative: {occ}")
    return occ


class PureState:
    """Normalized superposition of Fock kets over ``mode_count`` modes.

    Instances are immutable; every operation returns a new state.
    """

    __slots__ = ("_mode_count", "_amps")

    def __init__(self, mode_count: int, amplitudes: Mapping[Sequence[int], complex],
                 normalize: bool = True):
        if mode_count < 1:
            raise SpecError(f"mode_count must be positive, got {mode_count}")
        amps = {}
        for occ, amp in amplitudes.items():
            k = ket(*occ)
            if len(k) != mode_count:
                raise DimensionError(f"ket {k} does not have {mode_count} modes")
            amp = complex(amp)
            if abs(amp) < PRUNE_TOL:
                continue
            amps[k] = amps.get(k, 0j) + amp
        if not amps:
            raise SpecError("state has no non-zero amplitudes")
        norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
        if normalize:
            amps = {k: a / norm for k, a in amps.items()}
        elif abs(norm - 1) > 1e-9:
            raise SpecError(f"state is not normalized (norm {norm})")
        self._mode_count = mode_count
        self._amps = MappingProxyType(amps)

    @classmethod
    def _trusted(cls, mode_count: int, amps: dict) -> "PureState":
        # skips validation; used after unitaries, which preserve the norm
        self = object.__new__(cls)
        self._mode_count = mode_count
        self._amps = MappingProxyType({k: a for k, a in amps.items() if abs(a) >= PRUNE_TOL})
        return self

    @classmethod
    def basis(cls, occupations: Sequence[int]) -> "PureState":
        occ = ket(*occupations)
        return cls(len(occ), {occ: 1.0})

    @property
    def mode_count(self) -> int:
        return self._mode_count

    @property
    def amplitudes(self) -> Mapping[FockKet, complex]:
        return self._amps

    def amplitude(self, occupations: Sequence[int]) -> complex:
        return self._amps.get(tuple(occupations), 0j)

    def kets(self) -> list:
        return sorted(self._amps)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._amps.values()))

    def photon_numbers(self) -> set:
        return {sum(k) for k in self._amps}

    def __len__(self):
        return len(self._amps)

    def __repr__(self):
        terms = " + ".join(f"({a:.4g})|{','.join(map(str, k))}>" for k, a in sorted(self._amps.items()))
        return f"PureState({self._mode_count}: {terms})"

    def allclose(self, other: "PureState", atol: float = 1e-12) -> bool:
        """Ket-by-ket amplitude comparison."""
        if other.mode_count != self.mode_count:
            return False
        keys = set(self._amps) | set(other.amplitudes)
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= atol for k in keys)

    def to_dense(self, cutoff: int) -> np.ndarray:
        """Dense vector over ``(cutoff + 1) ** mode_count`` basis states, C order."""
        shape = (cutoff + 1,) * self._mode_count
        vec = np.zeros(shape, dtype=complex)
        for k, a in self._amps.items():
            if max(k) > cutoff:
                raise DimensionError(f"ket {k} exceeds cutoff {cutoff}")
            vec[k] = a
        return vec.reshape(-1)

    def to_records(self) -> list:
        """``[[occupations], re, im]`` triples in sorted ket order."""
        return [[list(k), a.real, a.imag] for k, a in sorted(self._amps.items())]

    def to_json(self) -> str:
        return json.dumps({"mode_count": self._mode_count, "amplitudes": self.to_records()})

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        data = json.loads(text)
        return cls(data["mode_count"], {tuple(o): complex(re, im) for o, re, im in data["amplitudes"]})

    @classmethod
    def tensor(cls, *states: "PureState") -> "PureState":
        """Tensor product in the given mode order."""
        amps = {(): 1 + 0j}
        for st in states:
            amps = {k + k2: a * a2 for k, a in amps.items() for k2, a2 in st.amplitudes.items()}
        return cls._trusted(sum(s.mode_count for s in states), amps)


def _mode_index(mode: ModeLike, mode_count: int) -> int:
    idx = mode.index if isinstance(mode, ModeRef) else int(mode)
    if not 0 <= idx < mode_count:
        raise DimensionError(f"mode {mode} out of range for {mode_count} modes")
    return idx


def inner_product(x: PureState, y: PureState) -> complex:
    """<x|y>, conjugate-linear in ``x``."""
    if x.mode_count != y.mode_count:
        raise DimensionError(f"mode counts differ: {x.mode_count} vs {y.mode_count}")
    small, large = (x, y) if len(x) <= len(y) else (y, x)
    total = 0j
    for k, a in small.amplitudes.items():
        b = large.amplitudes.get(k)
        if b is not None:
            total += a.conjugate() * b if small is x else b.conjugate() * a
    return total


def apply_phase(state: PureState, mode: ModeLike, phi: float) -> PureState:
    """Apply exp(i phi n) on one mode."""
    idx = _mode_index(mode, state.mode_count)
    if phi == 0:
        return state
    amps = {k: a * complex(math.cos(k[idx] * phi), math.sin(k[idx] * phi))
            for k, a in state.amplitudes.items()}
    return PureState._trusted(state.mode_count, amps)


@lru_cache(maxsize=4096)
def _two_mode_image(n1: int, n2: int, u: tuple) -> tuple:
    """Image of |n1, n2> under a1† -> u00 a1† + u10 a2†, a2† -> u01 a1† + u11 a2†.

    Returns ``((p, q, amplitude), ...)`` with p + q = n1 + n2.
    """
    u00, u01, u10, u11 = u
    out = {}
    pref = 1 / math.sqrt(math.factorial(n1) * math.factorial(n2))
    for k in range(n1 + 1):
        c1 = math.comb(n1, k) * u00 ** k * u10 ** (n1 - k)
        for l in range(n2 + 1):
            c2 = math.comb(n2, l) * u01 ** l * u11 ** (n2 - l)
            p = k + l
            out[p] = out.get(p, 0j) + c1 * c2
    n = n1 + n2
    return tuple((p, n - p, pref * c * math.sqrt(math.factorial(p) * math.factorial(n - p)))
                 for p, c in sorted(out.items()))


def apply_two_mode_unitary(state: PureState, m1: ModeLike, m2: ModeLike,
                           u: np.ndarray) -> PureState:
    """Apply the passive two-mode transform whose creation-operator image is ``u``.

    Column 0 of ``u`` is the image of the ``m1`` creation operator, column 1
    that of ``m2``, both expressed in the (m1, m2) basis.
    """
    i1 = _mode_index(m1, state.mode_count)
    i2 = _mode_index(m2, state.mode_count)
    if i1 == i2:
        raise SpecError("two-mode operation needs two distinct modes")
    u = np.asarray(u, dtype=complex)
    key = (complex(u[0, 0]), complex(u[0, 1]), complex(u[1, 0]), complex(u[1, 1]))
    amps: dict = {}
    for k, a in state.amplitudes.items():
        lst = list(k)
        for p, q, c in _two_mode_image(k[i1], k[i2], key):
            lst[i1], lst[i2] = p, q
            nk = tuple(lst)
            amps[nk] = amps.get(nk, 0j) + a * c
    return PureState._trusted(state.mode_count, amps)


def apply_beam_splitter(state: PureState, m1: ModeLike, m2: ModeLike,
                        inverse: bool = False) -> PureState:
    """Balanced beam splitter between ``m1`` (playing arm a) and ``m2`` (arm b)."""
    u = BS_MATRIX.conj().T if inverse else BS_MATRIX
    return apply_two_mode_unitary(state, m1, m2, u)


def number_moments(state: PureState, modes: Iterable[ModeLike]) -> tuple:
    """Means and covariance matrix of the photon numbers in ``modes``."""
    idx = [_mode_index(m, state.mode_count) for m in modes]
    if len(set(idx)) != len(idx):
        raise SpecError("modes must be distinct")
    kets = list(state.amplitudes)
    probs = np.array([abs(state.amplitudes[k]) ** 2 for k in kets])
    occ = np.array([[k[i] for i in idx] for k in kets], dtype=float).reshape(len(kets), len(idx))
    means = probs @ occ
    centered = occ - means
    cov = (centered * probs[:, None]).T @ centered
    return means, cov
