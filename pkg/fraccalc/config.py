import logging
import os
from dataclasses import dataclass
from typing import Mapping, Optional

from fraccalc.errors import ValidationError

DEFAULT_SEED = 20240601
DEFAULT_VERIFY_GRID = 257
DEFAULT_WORKERS = 4


@dataclass(frozen=True)
class VerifyParameters:
    """Knobs shared by every verification suite of a single run."""

    grid: int = DEFAULT_VERIFY_GRID
    seed: int = DEFAULT_SEED
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        if self.grid < 9:
            raise ValidationError(f"grid must be at least 9 points, got {self.grid}")
        if self.workers < 1:
            raise ValidationError(f"workers must be positive, got {self.workers}")


@dataclass(frozen=True)
class Settings:
    log_level: str = "WARNING"
    seed: int = DEFAULT_SEED
    verify_grid: int = DEFAULT_VERIFY_GRID
    workers: int = DEFAULT_WORKERS

    def verify_parameters(self, grid: Optional[int] = None) -> VerifyParameters:
        return VerifyParameters(
            grid=self.verify_grid if grid is None else grid,
            seed=self.seed,
            workers=self.workers,
        )


def _int_from_env(environ: Mapping[str, str], name: str, default: int) -> int:
    raw = environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{name} must be an integer, got {raw!r}")


def load_settings(environ: Optional[Mapping[str, str]] = None) -> Settings:
    """Read FRACCALC_* environment variables, falling back to defaults."""
    if environ is None:
        environ = os.environ

    log_level = environ.get("FRACCALC_LOG_LEVEL", "WARNING").upper()
    if not isinstance(logging.getLevelName(log_level), int):
        raise ValidationError(f"FRACCALC_LOG_LEVEL is not a logging level: {log_level!r}")

    return Settings(
        log_level=log_level,
        seed=_int_from_env(environ, "FRACCALC_SEED", DEFAULT_SEED),
        verify_grid=_int_from_env(environ, "FRACCALC_VERIFY_GRID", DEFAULT_VERIFY_GRID),
        workers=_int_from_env(environ, "FRACCALC_WORKERS", DEFAULT_WORKERS),
    )
