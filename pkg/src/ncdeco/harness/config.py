"""Scenario configuration and its JSON representation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..model import SYSTEM_HAMILTONIANS, CouplingMatrices, FieldSchedule
from ..operators import HilbertSpec, NCParams

BASES = ("position", "momentum")
INITIAL_KINDS = ("per_basis", "position_cat", "momentum_cat", "custom", "random")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InitialState:
    """Initial system state.

    ``per_basis`` evolves one cat per tracked basis (a position cat for the
    position trace, a momentum cat for the momentum trace); the other kinds
    evolve a single state and read every basis off it.  ``indices`` are flat
    product-basis indices i1 * d_axis + i2; None picks the corner pair
    (0, 0) and (d_axis - 1, 0).
    """

    kind: str = "per_basis"
    indices: tuple[int, int] | None = None
    vector: tuple[complex, ...] | None = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigError(f"initial_state.kind must be one of {INITIAL_KINDS}, got {self.kind!r}")
        if self.kind == "custom" and self.vector is None:
            raise ConfigError("custom initial state needs a vector")

    def cat_indices(self, d_axis: int) -> tuple[int, int]:
        m1, m2 = self.indices if self.indices is not None else (0, (d_axis - 1) * d_axis)
        if m1 == m2:
            raise ConfigError(f"cat indices must be distinct, got {m1} twice")
        for m in (m1, m2):
            if not 0 <= m < d_axis**2:
                raise ConfigError(f"cat index {m} outside [0, {d_axis**2})")
        return int(m1), int(m2)


@dataclass(frozen=True)
class TimeConfig:
    """Horizon and snapshot cadence.

    With ``auto_cadence`` each field segment samples at dt / n, the smallest
    integer n giving at least ``points_per_radian`` samples per radian of the
    segment's fastest rate.  ``max_snapshots`` caps the total; when the cap
    binds, the run stops early and the achieved horizon is reported.
    """

    t_end: float = 50.0
    dt: float = 0.02
    auto_cadence: bool = True
    points_per_radian: float = 10.0
    max_snapshots: int = 8000

    def __post_init__(self):
        if not (self.t_end > 0 and self.dt > 0):
            raise ConfigError("t_end and dt must be positive")
        if self.dt > self.t_end / 10 * (1 + 1e-12):
            raise ConfigError(f"dt={self.dt} must be at most t_end/10={self.t_end / 10}")
        if self.max_snapshots < 2:
            raise ConfigError("max_snapshots must be at least 2")


@dataclass(frozen=True)
class DiagnosticsConfig:
    bases: tuple[str, ...] = BASES
    bin_width: float = 1.0

    def __post_init__(self):
        for b in self.bases:
            if b not in BASES:
                raise ConfigError(f"unknown basis {b!r}; choose from {BASES}")
        if not self.bases:
            raise ConfigError("track at least one basis")
        if not self.bin_width > 0:
            raise ConfigError("bin_width must be positive")


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"
    name: str = "run"


@dataclass(frozen=True)
class ScenarioConfig:
    hilbert: HilbertSpec = field(default_factory=HilbertSpec)
    params: NCParams = field(default_factory=NCParams)
    couplings: CouplingMatrices = field(
        default_factory=lambda: CouplingMatrices(np.eye(2), np.eye(2))
    )
    schedule: FieldSchedule = field(default_factory=FieldSchedule)
    system_hamiltonian: str = "harmonic"
    env_omega: float = 1.0
    initial_state: InitialState = field(default_factory=InitialState)
    time: TimeConfig = field(default_factory=TimeConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    def __post_init__(self):
        if self.system_hamiltonian not in SYSTEM_HAMILTONIANS:
            raise ConfigError(
                f"system_hamiltonian must be one of {SYSTEM_HAMILTONIANS}, got {self.system_hamiltonian!r}"
            )
        if self.initial_state.kind in ("per_basis", "position_cat", "momentum_cat"):
            self.initial_state.cat_indices(self.hilbert.d_axis)
        if self.initial_state.kind == "custom":
            n = len(self.initial_state.vector)
            if n != self.hilbert.dim_system:
                raise ConfigError(f"custom state has length {n}, expected {self.hilbert.dim_system}")

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def with_field(self, B: float) -> "ScenarioConfig":
        return self.replace(schedule=FieldSchedule.constant(B))

    def to_dict(self) -> dict[str, Any]:
        init: dict[str, Any] = {"kind": self.initial_state.kind}
        if self.initial_state.indices is not None:
            init["indices"] = list(self.initial_state.indices)
        if self.initial_state.vector is not None:
            vec = np.asarray(self.initial_state.vector, dtype=complex)
            init["vector"] = {"real": vec.real.tolist(), "imag": vec.imag.tolist()}
        return {
            "hilbert": {
                "d_axis": self.hilbert.d_axis,
                "env_banks": [list(b) for b in self.hilbert.env_banks],
                "max_dim": self.hilbert.max_dim,
                "env_omega": self.env_omega,
            },
            "nc_params": dataclasses.asdict(self.params),
            "couplings": {"g": self.couplings.g.tolist(), "f": self.couplings.f.tolist()},
            "field_schedule": [list(s) for s in self.schedule.segments],
            "system_hamiltonian": self.system_hamiltonian,
            "initial_state": init,
            "time": dataclasses.asdict(self.time),
            "diagnostics": {"bases": list(self.diagnostics.bases), "bin_width": self.diagnostics.bin_width},
            "output": dataclasses.asdict(self.output),
            "seed": self.seed,
        }


def _pick(d: dict, allowed: set[str], section: str) -> dict:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")
    return d


def config_from_dict(raw: dict[str, Any]) -> ScenarioConfig:
    top = {"hilbert", "nc_params", "couplings", "field_schedule", "system_hamiltonian",
           "initial_state", "time", "diagnostics", "output", "seed"}
    _pick(raw, top, "config")
    kw: dict[str, Any] = {}
    try:
        if "hilbert" in raw:
            h = dict(_pick(raw["hilbert"], {"d_axis", "env_banks", "max_dim", "env_omega"}, "hilbert"))
            if "env_omega" in h:
                kw["env_omega"] = float(h.pop("env_omega"))
            if "env_banks" in h:
                h["env_banks"] = tuple((str(lbl), int(n)) for lbl, n in h["env_banks"])
            kw["hilbert"] = HilbertSpec(**h)
        if "nc_params" in raw:
            kw["params"] = NCParams(**_pick(raw["nc_params"], {"theta", "sigma", "hbar", "charge_e"}, "nc_params"))
        if "couplings" in raw:
            c = _pick(raw["couplings"], {"g", "f"}, "couplings")
            kw["couplings"] = CouplingMatrices(
                np.asarray(c.get("g", np.zeros((2, 2))), dtype=float),
                np.asarray(c.get("f", np.zeros((2, 2))), dtype=float),
            )
        if "field_schedule" in raw:
            segs = raw["field_schedule"]
            if isinstance(segs, dict):
                segs = segs.get("segments", [])
            kw["schedule"] = FieldSchedule(tuple((float(t), float(b)) for t, b in segs))
        if "system_hamiltonian" in raw:
            kw["system_hamiltonian"] = str(raw["system_hamiltonian"])
        if "initial_state" in raw:
            s = dict(_pick(raw["initial_state"], {"kind", "indices", "vector"}, "initial_state"))
            if s.get("indices") is not None:
                s["indices"] = tuple(int(i) for i in s["indices"])
            if s.get("vector") is not None:
                v = s["vector"]
                re = np.asarray(v["real"] if isinstance(v, dict) else v, dtype=float)
                im = np.asarray(v.get("imag", np.zeros_like(re)) if isinstance(v, dict) else np.zeros_like(re))
                s["vector"] = tuple(re + 1j * im)
            kw["initial_state"] = InitialState(**s)
        if "time" in raw:
            kw["time"] = TimeConfig(**_pick(raw["time"], {f.name for f in dataclasses.fields(TimeConfig)}, "time"))
        if "diagnostics" in raw:
            dg = dict(_pick(raw["diagnostics"], {"bases", "bin_width"}, "diagnostics"))
            if "bases" in dg:
                dg["bases"] = tuple(dg["bases"])
            kw["diagnostics"] = DiagnosticsConfig(**dg)
        if "output" in raw:
            kw["output"] = OutputConfig(**_pick(raw["output"], {"dir", "name"}, "output"))
        if "seed" in raw:
            kw["seed"] = int(raw["seed"])
        return ScenarioConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(raw)
