"""Pipeline and command-line modules for the tv-spectrum package."""

# Export important classes and functions
from ..core.config import RunConfig
from .pipeline import compare_fidelities, decompose, oracle_check
from .cli import main as run_cli
