"""Multi-drone frontier exploration simulator with a cooperative allocation heuristic."""
from .config import ScenarioConfig, load_config
from .engine import COMPLETE, EXHAUSTED, TIMEOUT, RunReport, Simulation, batch, run
from .world import World, generate_world, load_world, save_world

__version__ = "0.1.0"

__all__ = [
    "COMPLETE", "EXHAUSTED", "TIMEOUT", "RunReport", "ScenarioConfig", "Simulation", "World",
    "batch", "generate_world", "load_config", "load_world", "run", "save_world",
]
