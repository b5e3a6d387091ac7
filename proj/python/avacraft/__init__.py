"""AVACraft battle simulator and agent pipeline."""

import os as _os

_bundled = _os.path.join(_os.path.dirname(__file__), "data")
if not _os.environ.get("AVACRAFT_DATA_DIR") and _os.path.isdir(_bundled):
    _os.environ["AVACRAFT_DATA_DIR"] = _bundled

from ._core import (  # noqa: E402
    AvacraftError,
    BindError,
    ConfigError,
    CorruptReplay,
    Env,
    Server,
    SessionManager,
    UnknownScenario,
    default_data_dir,
    knowledge,
    parse_action,
    parse_priorities,
    parse_skill_plan,
    pvp,
    run_episode,
    scenarios,
    win_rates,
)

__all__ = [
    "AvacraftError",
    "BindError",
    "ConfigError",
    "CorruptReplay",
    "Env",
    "Server",
    "SessionManager",
    "UnknownScenario",
    "default_data_dir",
    "knowledge",
    "parse_action",
    "parse_priorities",
    "parse_skill_plan",
    "pvp",
    "run_episode",
    "scenarios",
    "win_rates",
]
