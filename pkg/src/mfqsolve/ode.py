from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from .errors import DomainError


@dataclass(frozen=True)
class OdeSpec:
    """The cubic toy model dx/dt = linear_coeff*x - cubic_coeff*x**3."""

    cubic_coeff: float = 2.0
    dt: float = 0.05
    steps: int = 30
    x0: float = 0.1
    linear_coeff: float = 1.0

    def __post_init__(self):
        if not self.dt > 0 or not math.isfinite(self.dt):
            raise DomainError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise DomainError(f"steps must be a non-negative integer, got {self.steps}")
        if self.cubic_coeff < 0:
            raise DomainError(f"cubic_coeff must be >= 0, got {self.cubic_coeff}")
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def alpha(self) -> float:
        return self.cubic_coeff

    def rhs(self, x):
        return self.linear_coeff * x - self.cubic_coeff * x**3

    def times(self):
        return [k * self.dt for k in range(self.steps + 1)]

    def fixed_point(self) -> float:
        """Positive stable fixed point sqrt(linear/cubic)."""
        if self.cubic_coeff == 0:
            raise DomainError("no finite fixed point without a cubic term")
        return math.sqrt(self.linear_coeff / self.cubic_coeff)

    def with_(self, **changes) -> "OdeSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)
