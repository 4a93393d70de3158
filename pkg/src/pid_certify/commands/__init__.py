"""CLI command groups; each module registers its subcommands on the parser"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, TypeVar

import numpy as np

from ..errors import UsageError
from ..models import RunConfig

T = TypeVar("T")


@dataclass(frozen=True)
class CommandContext:
    """Parsed flags and the validated run configuration"""

    config: RunConfig
    out: Path
    jobs: int
    seed: Optional[int]

    def require(self, value: Optional[T], field: str) -> T:
        """Return a config block or raise a usage error naming it"""
        if value is None:
            raise UsageError("required by this command", field=field)
        return value

    def require_seed(self) -> int:
        """Sampled procedures never run unseeded"""
        return self.require(self.seed, "seed")

    def vector(self, value: Optional[list[float]], n: int, field: str, fill: float):
        """Config vector of length n, or fill when absent"""
        if value is None:
            return np.full(n, fill)
        if len(value) != n:
            raise UsageError(f"expected {n} entries, got {len(value)}", field=field)
        return np.asarray(value, dtype=float)
