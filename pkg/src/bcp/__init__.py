"""Broadcast consensus protocols: semantics, simulation, exhaustive
verification, and a compiler from counter machines."""

from .core import (Broadcast, BroadcastProtocol, Configuration, RendezVous, classify_consensus,
                   enabled_steps, initial_configuration, is_terminal, replay, validate)
from .engine import Engine, backend_name
from .errors import BCPError, BudgetExceeded, PopulationTooSmall
from .sim import batch_simulate, simulate
from .textfmt import load_protocol, parse_protocol, save_protocol, serialize_protocol
from .verify import (build_graph, check_computes, check_semi, check_silently_computes, decide,
                     verify_inputs)

__version__ = "0.1.0"

__all__ = [
    "BCPError", "Broadcast", "BroadcastProtocol", "BudgetExceeded", "Configuration", "Engine",
    "PopulationTooSmall", "RendezVous", "backend_name", "batch_simulate", "build_graph",
    "check_computes", "check_semi", "check_silently_computes", "classify_consensus", "decide",
    "enabled_steps", "initial_configuration", "is_terminal", "load_protocol", "parse_protocol",
    "replay", "save_protocol", "serialize_protocol", "simulate", "validate", "verify_inputs",
]
