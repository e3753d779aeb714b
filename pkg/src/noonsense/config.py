"""Experiment configuration: TOML file plus command-line overrides."""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import SpecError
from .measurement import FringeModel, FullCountingModel, LocalMeasurementModel, VisibilityModel
from .network import SensorNetwork
from .probes import ProbeKind, ProbeSpec, is_node_bunched


@dataclass(frozen=True)
class ScanSpec:
    """Scan line phi_1 = ... = phi_d from ``start`` to ``stop``.

    Unset ends default to a margin of 0.2/N rad inside the identifiable interval
    (0, pi/N), i.e. (0.1, pi/2 - 0.1) for two photons.
    """

    start: Optional[float] = None
    stop: Optional[float] = None
    points: int = 9

    def resolved(self, N: int) -> "ScanSpec":
        margin = 0.2 / N
        return ScanSpec(margin if self.start is None else float(self.start),
                        math.pi / N - margin if self.stop is None else float(self.stop),
                        self.points)

    def values(self) -> list:
        step = (self.stop - self.start) / (self.points - 1)
        return [self.start + i * step for i in range(self.points)]


@dataclass(frozen=True)
class VisibilitySpec:
    preset: Optional[str] = None     # "measured"
    values: Optional[tuple] = None
    order: str = "canonical"         # or "coincidence-first" (P_11, P_20, P_02 per node)
    uniform: Optional[float] = None
    offsets: Optional[tuple] = None

    def build(self, d: int, N: int) -> VisibilityModel:
        offsets = None if self.offsets is None else tuple(self.offsets)
        if self.preset is not None:
            if self.preset != "measured":
                raise SpecError(f"unknown visibility preset {self.preset!r}")
            if (d, N) != (2, 2):
                raise SpecError("the measured visibility preset applies to d = 2, N = 2")
            return VisibilityModel(VisibilityModel.measured().visibilities, offsets)
        if self.uniform is not None:
            return VisibilityModel((float(self.uniform),) * (d * (N + 1)), offsets)
        if self.values is None:
            raise SpecError("visibility section needs preset, uniform or values")
        if self.order == "coincidence-first":
            return VisibilityModel.from_coincidence_first(self.values, offsets)
        if self.order != "canonical":
            raise SpecError(f"unknown visibility order {self.order!r}")
        return VisibilityModel(tuple(self.values), offsets)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "mn"
    d: int = 2
    N: int = 2
    weights: Optional[tuple] = None
    scan: ScanSpec = field(default_factory=ScanSpec)
    visibility: Optional[VisibilitySpec] = None
    mu: int = 4931
    bootstrap: int = 500
    seed: int = 0
    domain: Optional[tuple] = None
    parametric: bool = False
    mode: str = "scalar"
    fisher_points: int = 201
    step: float = 1e-4

    def __post_init__(self):
        spec = self.probe_spec  # validates kind, d, N
        object.__setattr__(self, "scan", self.scan.resolved(spec.N))
        self.network()
        if self.visibility is not None:
            self.visibility.build(self.d, self.N)
        if self.scan.points < 2:
            raise SpecError("a scan needs at least 2 points")
        limit = math.pi / spec.N
        if not 0 < self.scan.start < self.scan.stop < limit:
            raise SpecError(
                f"scan interval ({self.scan.start}, {self.scan.stop}) must lie inside (0, pi/{spec.N})")
        if self.mu < 1:
            raise SpecError("mu must be at least 1")
        if self.bootstrap < 100:
            raise SpecError("bootstrap needs at least 100 resamples")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise SpecError("seed must be an unsigned 64-bit integer")
        if self.mode not in ("scalar", "joint"):
            raise SpecError(f"estimation mode must be scalar or joint, got {self.mode!r}")
        if self.fisher_points < 2:
            raise SpecError("fisher_points must be at least 2")

    @property
    def probe_spec(self) -> ProbeSpec:
        return ProbeSpec(ProbeKind.parse(self.kind), self.d, self.N)

    def network(self) -> SensorNetwork:
        return SensorNetwork(self.d, self.weights)

    def model(self):
        """Ideal or visibility-damped outcome model for the configured probe."""
        probe = self.probe_spec.build()
        if not is_node_bunched(probe):
            if self.visibility is not None:
                raise SpecError("the visibility model applies to node-bunched probes only")
            return FullCountingModel(probe, self.d)
        base = LocalMeasurementModel(probe, self.d)
        if self.visibility is None:
            return base
        return FringeModel(base, self.visibility.build(self.d, self.N))

    def _scan_defaulted(self) -> bool:
        default = ScanSpec(points=self.scan.points).resolved(self.N)
        return (self.scan.start, self.scan.stop) == (default.start, default.stop)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.probe_spec.kind.value
        return out

    def override(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        scan = {k: changes.pop(k) for k in ("start", "stop", "points") if k in changes}
        if scan or "N" in changes:
            base = self.scan if not self._scan_defaulted() else ScanSpec(points=self.scan.points)
            changes["scan"] = replace(base, **scan)
        return replace(self, **changes)


def _tuple(x):
    return None if x is None else tuple(x)


def from_mapping(data: dict) -> ExperimentConfig:
    """Build a config from the parsed TOML layout documented in the README."""
    try:
        return _from_mapping(dict(data))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"invalid config: {exc}") from None


def _from_mapping(data: dict) -> ExperimentConfig:
    known = {"probe", "network", "scan", "visibility", "estimation",
             "mu", "bootstrap", "seed"}
    unknown = set(data) - known
    if unknown:
        raise SpecError(f"unknown config keys: {sorted(unknown)}")
    probe = data.get("probe", {})
    network = data.get("network", {})
    est = data.get("estimation", {})
    kw = {}
    if "kind" in probe:
        kw["kind"] = probe["kind"]
    if "d" in probe:
        kw["d"] = int(probe["d"])
    if "n" in probe or "N" in probe:
        kw["N"] = int(probe.get("n", probe.get("N")))
    if "weights" in network:
        kw["weights"] = _tuple(network["weights"])
    if "scan" in data:
        kw["scan"] = ScanSpec(**data["scan"])
    if "visibility" in data:
        v = dict(data["visibility"])
        for key in ("values", "offsets"):
            if key in v:
                v[key] = _tuple(v[key])
        kw["visibility"] = VisibilitySpec(**v)
    for key in ("mu", "bootstrap", "seed"):
        if key in data:
            kw[key] = int(data[key])
    if "domain" in est:
        kw["domain"] = _tuple(est["domain"])
    for key in ("parametric", "mode", "fisher_points", "step"):
        if key in est:
            kw[key] = est[key]
    return ExperimentConfig(**kw)


def load(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise SpecError(f"malformed config {path}: {exc}") from None
    return from_mapping(data)
