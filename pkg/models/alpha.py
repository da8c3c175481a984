from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple


@dataclass(frozen=True)
class AlphaSolution:
    k: int
    ell: int
    alpha: float
    residual: float
    exists: bool
    bracket: Optional[Tuple[float, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "ell": self.ell,
            "alpha": self.alpha,
            "exists": self.exists,
            "h_residual": self.residual,
            "bracket": list(self.bracket) if self.bracket is not None else None,
        }


@dataclass(frozen=True)
class BlockWordSpec:
    levels: int

    @property
    def length(self) -> int:
        return (3 ** (self.levels + 1) - 1) // 2

    def block_lengths(self) -> Tuple[int, ...]:
        """Block lengths in word order S_K ... S_0."""
        return tuple(3 ** i for i in range(self.levels, -1, -1))


@dataclass(frozen=True)
class BoundCertificate:
    """First-moment certificate: expectation >= 1 at m_star - 1 and < 1 at m_star."""

    n: int
    k: int
    ell: int
    m_star: int
    log_expectation_below: Optional[float]
    log_expectation_at: Optional[float]
    sentinel: bool
    exact_arithmetic: bool

    @property
    def upper_bound(self) -> int:
        return self.m_star - 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "ell": self.ell,
            "m_star": self.m_star,
            "upper_bound": self.upper_bound,
            "log_expectation_below": self.log_expectation_below,
            "log_expectation_at": self.log_expectation_at,
            "sentinel": self.sentinel,
            "exact_arithmetic": self.exact_arithmetic,
        }
