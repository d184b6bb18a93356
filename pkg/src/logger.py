"""
Logging configuration for the RMDP solver
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Iterable, TYPE_CHECKING

if TYPE_CHECKING:
    from .config import Config


def setup_logging(config: 'Config'):
    """Setup logging configuration"""

    # Configure logging level
    level = getattr(logging, config.logging_level.upper(), logging.WARNING)

    # Create formatter
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Configure root logger
    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    # Remove existing handlers
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    # Console handler; stdout carries the JSON report
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    # File handler with rotation
    if config.logging_enable_file:
        log_file_path = Path(config.logging_file_path)
        log_file_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file_path,
            maxBytes=config.logging_max_file_size_mb * 1024 * 1024,
            backupCount=config.logging_backup_count
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    logging.debug("Logging configured successfully")


def _names(states: Iterable[str]) -> str:
    return '{' + ', '.join(states) + '}'


class SolverLogger:
    """Specialized logger for solver operations"""

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)

    def model_loaded(self, source: str, n_states: int, n_pairs: int):
        """Log a model entering the solver"""
        self.logger.info(
            f"MODEL LOADED - Source: {source}, States: {n_states}, "
            f"State-action pairs: {n_pairs}"
        )

    def iteration(self, procedure: str, index: int, live: int):
        """Log the start of an outer fixpoint iteration"""
        self.logger.debug(f"ITERATION - {procedure} #{index}, live states: {live}")

    def states_removed(self, procedure: str, removed: Iterable[str]):
        """Log states dropped by an outer iteration"""
        self.logger.debug(f"REMOVED - {procedure}: {_names(removed)}")

    def attractor_computed(self, player: str, size: int, layers: int, calls: int):
        """Log an attractor fixpoint"""
        self.logger.debug(
            f"ATTRACTOR - Player: {player}, Size: {size}, Layers: {layers}, "
            f"Force calls: {calls}"
        )

    def oracle_mismatch(self, state: str, action: str, exact: bool, uncapped: bool):
        """Log a disagreement between the exact oracle and the uniform-increment test"""
        self.logger.debug(
            f"ORACLE MISMATCH - State: {state}, Action: {action}, "
            f"Exact force: {exact}, Uniform-increment force: {uncapped}"
        )

    def solve_finished(self, procedure: str, winning: int, iterations: int, calls: int):
        """Log a finished solve"""
        self.logger.info(
            f"SOLVED - {procedure}: Winning: {winning}, Iterations: {iterations}, "
            f"Force calls: {calls}"
        )

    def check_result(self, objective: str, agree: bool, differing: Iterable[str]):
        """Log a cross-check against the reference game solver"""
        if agree:
            self.logger.info(f"CHECK - {objective}: agree")
        else:
            self.logger.warning(f"CHECK - {objective}: DISAGREE on {_names(differing)}")

    def error(self, message: str, exc_info: bool = False):
        """Log error message"""
        self.logger.error(message, exc_info=exc_info)

    def warning(self, message: str):
        """Log warning message"""
        self.logger.warning(message)

    def info(self, message: str):
        """Log info message"""
        self.logger.info(message)

    def debug(self, message: str):
        """Log debug message"""
        self.logger.debug(message)
