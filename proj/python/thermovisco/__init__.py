from ._core import (
    ConfigError,
    RunConfig,
    SimState,
    Simulation,
    StepFailure,
    check_admissibility,
    ledger_header,
    load_config,
    oracle_gap,
    oracle_run,
    parse_config,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "SimState",
    "Simulation",
    "StepFailure",
    "check_admissibility",
    "ledger_header",
    "load_config",
    "oracle_gap",
    "oracle_run",
    "parse_config",
]
