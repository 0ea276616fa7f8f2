"""gr1rs: robust GR(1) reactive synthesis.

Pipeline: parse a spec, build the Streett game (plain or robust), solve
it with the recursive fixpoint algorithm, extract a one-bit-memory
strategy, close it into a Mealy machine, and emit Verilog/DOT.
"""

from .expr import BoolExpr, parse_expr
from .game import (
    CapacityError,
    Game,
    StateSet,
    StreettPair,
    SysChoice,
    build_game,
    counter_bits,
    direct_game,
    game_from_dump,
    step_counter,
)
from .model import (
    GR1Spec,
    SafetyAutomaton,
    Signal,
    SpecError,
    Valuation,
    eval_expr,
    invariant_to_automaton,
    parse_spec,
    print_spec,
)
from .oracle import brute_force_region, check_strategy_sound
from .sim import EnvScript, RecoveryReport, Trace, recovery_metric, simulate
from .solver import IterateRecord, m_str, main_streett, str_solve
from .strategy import (
    ExtractionError,
    MealyMachine,
    Strategy,
    UnrealizableError,
    extract_strategy,
    extract_strategy_1pair,
    extract_strategy_2pairs,
    strategy_to_mealy,
)

__all__ = [
    "BoolExpr",
    "CapacityError",
    "EnvScript",
    "ExtractionError",
    "GR1Spec",
    "Game",
    "IterateRecord",
    "MealyMachine",
    "RecoveryReport",
    "SafetyAutomaton",
    "Signal",
    "SpecError",
    "StateSet",
    "Strategy",
    "StreettPair",
    "SysChoice",
    "Trace",
    "UnrealizableError",
    "Valuation",
    "brute_force_region",
    "build_game",
    "check_strategy_sound",
    "counter_bits",
    "direct_game",
    "eval_expr",
    "extract_strategy",
    "extract_strategy_1pair",
    "extract_strategy_2pairs",
    "game_from_dump",
    "invariant_to_automaton",
    "m_str",
    "main_streett",
    "parse_expr",
    "parse_spec",
    "print_spec",
    "recovery_metric",
    "simulate",
    "step_counter",
    "str_solve",
    "strategy_to_mealy",
]

__version__ = "0.1.0"
