from .config import ScenarioConfig, config_from_dict, load_config
from .scenarios import ScenarioReport, SweepResult, run_nc_reveal, run_scenario, run_sweep
from .io import emit_results, read_trace

__all__ = [
    "ScenarioConfig",
    "config_from_dict",
    "load_config",
    "ScenarioReport",
    "SweepResult",
    "run_nc_reveal",
    "run_scenario",
    "run_sweep",
    "emit_results",
    "read_trace",
]
