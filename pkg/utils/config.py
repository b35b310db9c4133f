"""
Configuration management for CovarKit.
Handles saving and loading oracle and search settings.
"""

import json
import os
from pathlib import Path
from typing import Dict, Any, Optional

from core.logger import log_warning


class Config:
    """Manages toolkit configuration."""

    DEFAULT_SETTINGS = {
        'grid_n': 4096,         # Oracle grid points on the window
        'norm': 'inf',          # Residual norm (1, 2 or inf)
        'tau_pass': 1e-9,       # Residual at or below: numerically holds
        'tau_fail': 1e-6,       # Residual at or above: numerically fails
        'seed': 0,              # Seed for random battery functions and sampling
        'exclusion': 0.5,       # Breakpoint exclusion radius in grid steps
        'fixpoint_tol': 1e-10,  # Fixed-point root tolerance
        'max_cases': 64,        # Search truncation limit
        'bump_cells': 8         # Max partition cells that receive a bump
    }

    def __init__(self, config_path: Path = None):
        """Open the settings file, creating it with defaults when missing.

        Args:
            config_path: Settings file. Defaults to config.json next to the
                cli package.
        """
        if config_path is None:
            config_path = Path(__file__).parent.parent / 'config.json'
        self.config_path = Path(config_path)
        self.settings = self.DEFAULT_SETTINGS.copy()
        self.load()

    def load(self) -> Dict[str, Any]:
        """Read the settings file over the defaults.

        Unknown keys are dropped with a warning; an unreadable file leaves
        the defaults in place.

        Returns:
            Dictionary of settings
        """
        if not self.config_path.exists():
            self.settings = self.DEFAULT_SETTINGS.copy()
            self.save(self.settings)
            return self.settings
        try:
            with open(self.config_path, 'r') as f:
                stored = json.load(f)
            if not isinstance(stored, dict):
                raise ValueError("top level is not an object")
        except (OSError, ValueError) as e:
            log_warning(f"Could not load config from {self.config_path}: {e}")
            self.settings = self.DEFAULT_SETTINGS.copy()
            return self.settings
        unknown = sorted(set(stored) - set(self.DEFAULT_SETTINGS))
        if unknown:
            log_warning(f"Ignoring unknown config keys in {self.config_path}: {', '.join(unknown)}")
        self.settings = {**self.DEFAULT_SETTINGS,
                         **{k: v for k, v in stored.items() if k in self.DEFAULT_SETTINGS}}
        return self.settings

    def save(self, settings: Dict[str, Any]) -> bool:
        """Write settings; a failed write is logged and reported as False."""
        self.settings = settings
        try:
            with open(self.config_path, 'w') as f:
                json.dump(settings, f, indent=2)
        except OSError as e:
            log_warning(f"Could not save config to {self.config_path}: {e}")
            return False
        return True

    def reset_to_defaults(self) -> Dict[str, Any]:
        self.settings = self.DEFAULT_SETTINGS.copy()
        self.save(self.settings)
        return self.settings

    def get(self, key: str, default=None) -> Any:
        return self.settings.get(key, default)

    def resolve(self, problem_oracle: Optional[Dict[str, Any]] = None,
                overrides: Optional[Dict[str, Any]] = None,
                environ=None) -> Dict[str, Any]:
        """Effective settings for one run.

        Precedence, lowest first: defaults, config file, the problem's
        oracle block, command-line overrides, COVARKIT_SEED.

        Args:
            problem_oracle: Settings carried by a problem file
            overrides: Settings given on the command line (None values ignored)
            environ: Environment mapping (defaults to os.environ)

        Returns:
            Merged settings dictionary
        """
        environ = os.environ if environ is None else environ
        settings = {**self.DEFAULT_SETTINGS, **self.settings}
        settings.update({k: v for k, v in (problem_oracle or {}).items() if k in self.DEFAULT_SETTINGS})
        settings.update({k: v for k, v in (overrides or {}).items() if v is not None})
        seed = environ.get('COVARKIT_SEED')
        if seed:
            try:
                settings['seed'] = int(seed)
            except ValueError:
                log_warning(f"Ignoring COVARKIT_SEED={seed!r}: not an integer")
        return settings
