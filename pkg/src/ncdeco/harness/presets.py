"""Ready-made scenario configurations for the coupling cases studied.

All presets use H_S = 0 so the interaction alone selects the pointer basis;
a trap would rotate position into momentum with period 2 pi and mix the two
readouts.
"""

from __future__ import annotations

import numpy as np

from ..model import CouplingMatrices, FieldSchedule
from ..operators import NCParams
from .config import ScenarioConfig, TimeConfig

ZERO = np.zeros((2, 2))
EYE = np.eye(2)

# field values spanning weak (eB/2 <= 0.01 max|f|) to strong (eB/2 >= 100 max|f|) at unit couplings
SWEEP_FIELDS = (0.0, 0.01, 0.1, 1.0, 10.0, 200.0, 400.0)


def _base(couplings: CouplingMatrices, theta: float, sigma: float, B: float, **kw) -> ScenarioConfig:
    return ScenarioConfig(
        params=NCParams(theta=theta, sigma=sigma),
        couplings=couplings,
        schedule=FieldSchedule.constant(B),
        system_hamiltonian="none",
        **kw,
    )


def coordinate(gamma: float = 1.0, theta: float = 0.0, sigma: float = 0.0, B: float = 0.0, **kw) -> ScenarioConfig:
    """f = 0, g = gamma * identity."""
    return _base(CouplingMatrices(gamma * EYE, ZERO), theta, sigma, B, **kw)


def momentum(phi: float = 1.0, theta: float = 0.0, sigma: float = 0.0, B: float = 0.0, **kw) -> ScenarioConfig:
    """g = 0, f = phi * identity."""
    return _base(CouplingMatrices(ZERO, phi * EYE), theta, sigma, B, **kw)


def general(scale: float = 1.0, theta: float = 0.0, sigma: float = 0.0, B: float = 0.0, **kw) -> ScenarioConfig:
    """g = f = scale * identity."""
    return _base(CouplingMatrices(scale * EYE, scale * EYE), theta, sigma, B, **kw)


def reveal(theta: float = 0.1, sigma: float = 0.0, **kw) -> ScenarioConfig:
    return general(theta=theta, sigma=sigma, B=4 / theta, **kw)


def in_situ_switch(B_strong: float = 200.0, t_switch: float = 5.0, t_end: float = 10.0, **kw) -> ScenarioConfig:
    """Momentum coupling with the field switched on mid-run."""
    cfg = momentum(**kw)
    return cfg.replace(
        schedule=FieldSchedule(((0.0, 0.0), (t_switch, B_strong))),
        time=TimeConfig(t_end=t_end, dt=0.02, max_snapshots=20000),
    )


PRESETS = {
    "coordinate": coordinate,
    "momentum": momentum,
    "general": general,
    "reveal": reveal,
    "switch": in_situ_switch,
}
