"""Fisher information matrices, Cramér-Rao-type bounds and gain figures of merit."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import SingularInformationError, SingularityError, SpecError, UnsupportedProbeError
from .fock import Arm, ModeRef, PureState, number_moments
from .network import WEIGHT_TOL, SensorNetwork, encode_phases
from .probes import ProbeKind

DEFAULT_STEP = 1e-4
ZERO_PROB = 1e-12
ZERO_SLOPE = 1e-9
MAX_CONDITION = 1e12
# finite-difference noise floor: below this a Fisher matrix carries no information
MIN_FISHER = 1e-12


class FisherKind(str, enum.Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"


@dataclass(frozen=True)
class FisherMatrix:
    entries: np.ndarray
    kind: FisherKind

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise SpecError(f"Fisher matrix must be square, got shape {F.shape}")
        scale = max(1.0, float(np.abs(F).max()))
        if np.abs(F - F.T).max() > 1e-9 * scale:
            raise SpecError("Fisher matrix is not symmetric")
        F = (F + F.T) / 2
        if np.linalg.eigvalsh(F).min() < -1e-9 * scale:
            raise SpecError("Fisher matrix is not positive semidefinite")
        F.setflags(write=False)
        object.__setattr__(self, "entries", F)
        object.__setattr__(self, "kind", FisherKind(self.kind))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    def weighted_variance(self, nu: Sequence[float]) -> float:
        """nu^T F^-1 nu."""
        return weighted_variance(self.entries, nu)

    def scalar(self, nu: Sequence[float]) -> float:
        """Fisher information of the global parameter, 1 / (nu^T F^-1 nu)."""
        return 1.0 / self.weighted_variance(nu)


def _check_weights(nu, d: int) -> np.ndarray:
    nu = np.asarray(nu, dtype=float)
    if nu.shape != (d,):
        raise SpecError(f"weight vector must have length {d}")
    if abs(np.abs(nu).sum() - 1) > WEIGHT_TOL:
        raise SpecError(f"weights must satisfy sum |nu_j| = 1, got {np.abs(nu).sum()}")
    return nu


def weighted_variance(F: np.ndarray, nu: Sequence[float]) -> float:
    F = np.asarray(F, dtype=float)
    nu = _check_weights(nu, F.shape[0])
    if np.abs(F).max() < MIN_FISHER:
        raise SingularInformationError("Fisher matrix vanishes")
    cond = np.linalg.cond(F)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularInformationError(f"Fisher matrix is singular (condition number {cond:.3g})")
    return float(nu @ np.linalg.solve(F, nu))


# -- quantum Fisher information ---------------------------------------------------------


def qfim(probe: PureState, network: Optional[SensorNetwork] = None) -> FisherMatrix:
    """QFIM of the encoded probe: 4 x covariance of the arm-A photon numbers.

    The phase generators are commuting number operators, so the result does
    not depend on the encoded phase values.
    """
    d = probe.mode_count // 2
    state = probe if network is None else encode_phases(probe, network)
    _, cov = number_moments(state, [ModeRef(j, Arm.A) for j in range(d)])
    return FisherMatrix(4 * cov, FisherKind.QUANTUM)


def qfim_analytic(kind, d: float, N: float) -> FisherMatrix:
    """Closed-form QFIM of the multi-mode or separable N00N probe; N may be real."""
    kind = ProbeKind.parse(kind)
    if d < 1 or N <= 0:
        raise SpecError(f"need d >= 1 and N > 0, got d={d}, N={N}")
    d = int(d)
    if kind in (ProbeKind.MULTI_MODE_NOON, ProbeKind.FOUR_MODE_2002):
        off = -(N / d) ** 2
        F = np.full((d, d), off)
        np.fill_diagonal(F, (2 * d - 1) * N ** 2 / d ** 2)
    elif kind is ProbeKind.SEPARABLE_NOON:
        F = (N / d) ** 2 * np.eye(d)
    else:
        raise UnsupportedProbeError(f"no closed-form QFIM for {kind.value}")
    return FisherMatrix(F, FisherKind.QUANTUM)


def cfim_analytic_mn(d: int, N: float) -> FisherMatrix:
    """Classical FIM of the multi-mode N00N probe under local BS + PNRD: (N^2/d) I."""
    return FisherMatrix(N ** 2 / d * np.eye(int(d)), FisherKind.CLASSICAL)


# -- classical Fisher information -------------------------------------------------------


def _assemble(P: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Sum_l D_jl D_kl / P_l for P of shape (m, L) and D of shape (m, d, L)."""
    tiny = P < ZERO_PROB
    slope = np.abs(D).max(axis=1)
    bad = tiny & (slope >= ZERO_SLOPE)
    if bad.any():
        m, l = np.argwhere(bad)[0]
        raise SingularityError(
            f"outcome {l} has P={P[m, l]:.3g} but slope {slope[m, l]:.3g}: Fisher term diverges")
    inv = np.where(tiny, 0.0, 1.0 / np.where(tiny, 1.0, P))
    return np.einsum("mjl,mkl,ml->mjk", D, D, inv)


def _derivatives(prob_fn: Callable, phis: np.ndarray, h: float) -> np.ndarray:
    m, d = phis.shape
    D = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        D.append((prob_fn(phis + e) - prob_fn(phis - e)) / (2 * h))
    return np.stack(D, axis=1)


def cfim_batch(prob_fn: Callable, phis, h: float = DEFAULT_STEP, richardson: bool = True) -> np.ndarray:
    """CFIM at many phase vectors at once.

    ``prob_fn`` maps an ``(m, d)`` phase array to ``(m, L)`` probabilities;
    returns an ``(m, d, d)`` array. Derivatives are central differences,
    Richardson-extrapolated from steps ``h`` and ``h/2`` unless disabled.
    """
    if h <= 0:
        raise SpecError("finite-difference step must be positive")
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    P = np.asarray(prob_fn(phis), dtype=float)
    D = _derivatives(prob_fn, phis, h)
    if richardson:
        D = (4 * _derivatives(prob_fn, phis, h / 2) - D) / 3
    return _assemble(P, D)


def _prob_vector(result) -> np.ndarray:
    return np.asarray(getattr(result, "probabilities", result), dtype=float)


def cfim(dist_fn: Callable, phi, h: float = DEFAULT_STEP, richardson: bool = True) -> FisherMatrix:
    """CFIM sum_l (1/P_l) dP_l/dphi_j dP_l/dphi_k at one phase vector.

    ``dist_fn`` maps a phase vector to an :class:`OutcomeDistribution` (or a
    probability array). Zero-probability outcomes with vanishing slope add
    nothing; zero probability with a finite slope raises :class:`SingularityError`.
    """
    def batched(phis):
        return np.stack([_prob_vector(dist_fn(row)) for row in phis])

    F = cfim_batch(batched, np.asarray(phi, dtype=float)[None, :], h, richardson)[0]
    return FisherMatrix(F, FisherKind.CLASSICAL)


def scalar_fisher_scan(model, phis, nu: Optional[Sequence[float]] = None,
                       h: float = DEFAULT_STEP) -> np.ndarray:
    """Global-parameter Fisher information 1/(nu^T F^-1 nu) along phi_1 = ... = phi_d = phi.

    Points where the CFIM is singular (possible only where the 0/0 convention
    drops terms) come back as NaN.
    """
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    nu = np.full(model.d, 1.0 / model.d) if nu is None else _check_weights(nu, model.d)
    grid = np.repeat(phis[:, None], model.d, axis=1)
    Fs = cfim_batch(model.probabilities, grid, h)
    out = np.empty(len(Fs))
    for i, F in enumerate(Fs):
        try:
            out[i] = 1.0 / weighted_variance(F, nu)
        except SingularInformationError:
            out[i] = np.nan
    return out


# -- bounds and gains ------------------------------------------------------------------


@dataclass(frozen=True)
class SensitivityReport:
    """Variance bound nu^T F^-1 nu / mu and its gain over the standard quantum limit.

    ``sql`` and ``hs`` are the variance limits 1/(mu N) and 1/(mu N^2) at the same
    measurement count, so the gain does not depend on ``mu``.
    """

    probe: str
    bound: float
    fisher: float
    sql: float
    hs: float
    gain: float
    db_gain: float
    mu: int
    N: float
    kind: str

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _report(probe: str, bound: float, mu: int, N: float, kind: str) -> SensitivityReport:
    sql = 1.0 / (mu * N)
    gain = sql / bound
    return SensitivityReport(probe=probe, bound=bound, fisher=1.0 / (mu * bound), sql=sql,
                             hs=1.0 / (mu * N ** 2), gain=gain, db_gain=10 * math.log10(gain),
                             mu=mu, N=N, kind=kind)


def bounds(F: Optional[FisherMatrix], nu: Optional[Sequence[float]] = None, mu: int = 1,
           N: float = 1, probe_kind=None) -> SensitivityReport:
    """Cramér-Rao-type variance bound of the weighted global phase.

    ``probe_kind`` of ``mepe`` or ``classical`` emits the analytic table row
    (1/N^2 or 1/N) and ignores ``F``.
    """
    if mu < 1 or N <= 0:
        raise SpecError(f"need mu >= 1 and N > 0, got mu={mu}, N={N}")
    kind = None if probe_kind is None else ProbeKind.parse(probe_kind)
    if kind is ProbeKind.MEPE:
        return _report(kind.value, 1.0 / (mu * N ** 2), mu, N, "analytic")
    if kind is ProbeKind.CLASSICAL:
        return _report(kind.value, 1.0 / (mu * N), mu, N, "analytic")
    if F is None:
        raise SpecError("a Fisher matrix is required for state-based bounds")
    nu = np.full(F.d, 1.0 / F.d) if nu is None else nu
    label = kind.value if kind is not None else "custom"
    return _report(label, F.weighted_variance(nu) / mu, mu, N, F.kind.value)


def db_gain(fisher: float, N: float) -> float:
    """Gain of a scalar Fisher information over the SQL value N, in dB."""
    return 10 * math.log10(fisher / N)


def table1(d: int, N: float, mu: int = 1) -> list:
    """Bounds and gains of the classical, separable, multi-mode and MePe probes."""
    return [
        bounds(None, mu=mu, N=N, probe_kind=ProbeKind.CLASSICAL),
        bounds(qfim_analytic(ProbeKind.SEPARABLE_NOON, d, N), mu=mu, N=N,
               probe_kind=ProbeKind.SEPARABLE_NOON),
        bounds(qfim_analytic(ProbeKind.MULTI_MODE_NOON, d, N), mu=mu, N=N,
               probe_kind=ProbeKind.MULTI_MODE_NOON),
        bounds(None, mu=mu, N=N, probe_kind=ProbeKind.MEPE),
    ]


def format_table(rows: Sequence[SensitivityReport]) -> str:
    lines = [f"{'probe':<10} {'bound':>16} {'gain':>16}"]
    lines += [f"{r.probe:<10} {r.bound:>16.12g} {r.gain:>16.12g}" for r in rows]
    return "\n".join(lines)


def reference_lines(N: float, mu: int) -> tuple:
    """Standard-deviation references (SQL, HS) = (1/sqrt(mu N), 1/(sqrt(mu) N))."""
    if N < 1 or mu < 1:
        raise SpecError(f"need N >= 1 and mu >= 1, got N={N}, mu={mu}")
    return 1.0 / math.sqrt(mu * N), 1.0 / (math.sqrt(mu) * N)
