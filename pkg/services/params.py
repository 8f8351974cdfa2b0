import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

from utils.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

EQUAL_MASS = 'equal-mass'
UNEQUAL_MASS = 'unequal-mass'


@dataclass(frozen=True)
class TwoBodyParams:
    """Masses and coupling of the two-particle system (natural units).

    In equal-mass mode ``m`` is the TOTAL mass: each constituent carries
    m1 = m2 = m/2 and the relative momentum entering the Hamiltonian is
    p_{a+3} = 2 K_a. In unequal-mass mode ``m1`` and ``m2`` are given and the
    relative momentum is K'_a.
    """
    mode: str = EQUAL_MASS
    m: Optional[float] = None
    m1: Optional[float] = None
    m2: Optional[float] = None
    e2: float = 0.0

    def __post_init__(self):
        if self.mode == EQUAL_MASS:
            if self.m is None or not self.m > 0 or not math.isfinite(self.m):
                raise DomainError(f"Total mass must be positive, got {self.m!r}")
            half = 0.5 * self.m
            if self.m1 is None:
                object.__setattr__(self, 'm1', half)
            if self.m2 is None:
                object.__setattr__(self, 'm2', half)
            if abs(self.m1 - half) > 1e-15 * self.m or abs(self.m2 - half) > 1e-15 * self.m:
                raise DomainError(f"Equal-mass mode needs m1 = m2 = m/2, got {self.m1}, {self.m2}")
        elif self.mode == UNEQUAL_MASS:
            for name in ('m1', 'm2'):
                value = getattr(self, name)
                if value is None or not value > 0 or not math.isfinite(value):
                    raise DomainError(f"{name} must be positive, got {value!r}")
            if self.m is None:
                object.__setattr__(self, 'm', self.m1 + self.m2)
        else:
            raise DomainError(f"Unknown mass mode {self.mode!r}")

    @classmethod
    def equal_mass(cls, m: float, e2: float = 0.0) -> 'TwoBodyParams':
        return cls(mode=EQUAL_MASS, m=float(m), e2=float(e2))

    @classmethod
    def unequal_mass(cls, m1: float, m2: float, e2: float = 0.0) -> 'TwoBodyParams':
        return cls(mode=UNEQUAL_MASS, m1=float(m1), m2=float(m2), e2=float(e2))

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> 'TwoBodyParams':
        """Build from a config mapping; m1/m2 without m selects unequal-mass mode."""
        try:
            if 'm1' in config or 'm2' in config:
                if 'm' in config:
                    raise ConfigError("Give either total mass m or m1/m2, not both")
                return cls.unequal_mass(config['m1'], config['m2'], config.get('e2', 0.0))
            return cls.equal_mass(config.get('m', 1.0), config.get('e2', 0.0))
        except (KeyError, TypeError, DomainError) as e:
            raise ConfigError(f"Invalid params section {config!r}: {e}")

    @property
    def is_equal_mass(self) -> bool:
        return self.mode == EQUAL_MASS

    @property
    def total_mass(self) -> float:
        return self.m1 + self.m2 if self.mode == UNEQUAL_MASS else self.m

    @property
    def relative_scale(self) -> float:
        """(m1 + m2) / sqrt(m1 m2); equals 2 for equal masses."""
        return (self.m1 + self.m2) / math.sqrt(self.m1 * self.m2)

    def require_equal_mass(self, operation: str) -> None:
        if not self.is_equal_mass:
            raise DomainError(f"{operation} is defined for equal-mass parameters only")

    def require_unequal_mass(self, operation: str) -> None:
        if self.is_equal_mass:
            raise DomainError(f"{operation} needs unequal-mass parameters")

    def to_dict(self) -> Dict[str, Any]:
        return {'mode': self.mode, 'm': self.m, 'm1': self.m1, 'm2': self.m2, 'e2': self.e2}
