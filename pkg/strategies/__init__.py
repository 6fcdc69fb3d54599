"""
Estratégias de limiar e fontes de realização
"""
from strategies.realization import BranchSource, RealizationSource, RngSource, ScriptedSource
from strategies.threshold import (
    FixedOrderStrategy,
    OrderMode,
    Schedule,
    ScheduleStrategy,
    Strategy,
    StrategyTrace,
    WeitzmanStrategy,
    build_strategy,
    pi_fixed,
    pi_instant,
    pi_main,
    pi_main_execute,
    pi_main_schedule,
    weitzman_baseline,
)

__all__ = [
    "BranchSource",
    "RealizationSource",
    "RngSource",
    "ScriptedSource",
    "FixedOrderStrategy",
    "OrderMode",
    "Schedule",
    "ScheduleStrategy",
    "Strategy",
    "StrategyTrace",
    "WeitzmanStrategy",
    "build_strategy",
    "pi_fixed",
    "pi_instant",
    "pi_main",
    "pi_main_execute",
    "pi_main_schedule",
    "weitzman_baseline",
]
