"""
Configuration management for the RMDP solver
"""

import copy
import os
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from dotenv import load_dotenv


DEFAULTS: Dict[str, Any] = {
    'solver': {
        'arith': 'exact',
        'tolerance': 1e-9,
        'support_cap': 12,
        'timeout_seconds': 0,
        'assert_budgets': True,
    },
    'batch': {
        'workers': 1,
        'pattern': '*.json',
    },
    'generator': {
        'hole_density': 0.1,
        'support_restricted': True,
    },
    'logging': {
        'level': 'WARNING',
        'file_path': 'logs/rmdpq.log',
        'max_file_size_mb': 10,
        'backup_count': 5,
        'enable_file': False,
    },
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``override`` into a copy of ``base``"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class Config:
    """Configuration manager for the solver and its command-line front end"""

    def __init__(self, config_path: Optional[Path] = None):
        """
        Initialize configuration from YAML file and environment variables

        Args:
            config_path: Path to a YAML file; ``None`` or a missing file
                means built-in defaults only
        """
        # Load environment variables
        load_dotenv()

        loaded: Dict[str, Any] = {}
        if config_path is not None and Path(config_path).exists():
            with open(config_path, 'r') as f:
                loaded = yaml.safe_load(f) or {}

        self._config = _merge(DEFAULTS, loaded)

        # Override with environment variables if present
        self._apply_env_overrides()

    def _apply_env_overrides(self):
        """Apply environment variable overrides"""
        env_mappings = {
            'RMDPQ_ARITH': ['solver', 'arith'],
            'RMDPQ_TOLERANCE': ['solver', 'tolerance'],
            'RMDPQ_SUPPORT_CAP': ['solver', 'support_cap'],
            'RMDPQ_TIMEOUT': ['solver', 'timeout_seconds'],
            'RMDPQ_LOG_LEVEL': ['logging', 'level'],
            'RMDPQ_LOG_FILE': ['logging', 'file_path'],
            'RMDPQ_WORKERS': ['batch', 'workers'],
        }

        for env_var, config_path in env_mappings.items():
            value = os.getenv(env_var)
            if value is not None:
                # Convert to appropriate type
                if env_var in ['RMDPQ_SUPPORT_CAP', 'RMDPQ_WORKERS']:
                    value = int(value)
                elif env_var in ['RMDPQ_TOLERANCE', 'RMDPQ_TIMEOUT']:
                    value = float(value)

                # Set nested configuration
                current = self._config
                for key in config_path[:-1]:
                    if key not in current:
                        current[key] = {}
                    current = current[key]
                current[config_path[-1]] = value

    def override(self, key: str, value: Any):
        """Override a dotted key (used for command-line flags)"""
        if value is None:
            return
        keys = key.split('.')
        current = self._config
        for k in keys[:-1]:
            current = current.setdefault(k, {})
        current[keys[-1]] = value

    # Solver Configuration
    @property
    def arith(self) -> str:
        return self._config['solver']['arith']

    @property
    def tolerance(self) -> float:
        return float(self._config['solver']['tolerance'])

    @property
    def support_cap(self) -> int:
        return int(self._config['solver']['support_cap'])

    @property
    def timeout_seconds(self) -> float:
        return float(self._config['solver']['timeout_seconds'])

    @property
    def assert_budgets(self) -> bool:
        return bool(self._config['solver']['assert_budgets'])

    # Batch Configuration
    @property
    def batch_workers(self) -> int:
        return int(self._config['batch']['workers'])

    @property
    def batch_pattern(self) -> str:
        return self._config['batch']['pattern']

    # Generator Configuration
    @property
    def hole_density(self) -> float:
        return float(self._config['generator']['hole_density'])

    @property
    def support_restricted(self) -> bool:
        return bool(self._config['generator']['support_restricted'])

    # Logging Configuration
    @property
    def logging_level(self) -> str:
        return self._config['logging']['level']

    @property
    def logging_file_path(self) -> str:
        return self._config['logging']['file_path']

    @property
    def logging_max_file_size_mb(self) -> int:
        return self._config['logging']['max_file_size_mb']

    @property
    def logging_backup_count(self) -> int:
        return self._config['logging']['backup_count']

    @property
    def logging_enable_file(self) -> bool:
        return bool(self._config['logging']['enable_file'])

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by key"""
        keys = key.split('.')
        current = self._config
        for k in keys:
            if isinstance(current, dict) and k in current:
                current = current[k]
            else:
                return default
        return current
