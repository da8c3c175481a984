from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from helpers.enums import Construction
from helpers.errors import ParameterError
from models.word import Support, Word


@dataclass(frozen=True)
class TupletResult:
    """k pairwise disjoint supports in a host word that all spell `common_word`."""

    k: int
    supports: Tuple[Support, ...]
    common_word: Word
    host_length: int
    construction: Construction = Construction.PIPELINE
    meta: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        supports = tuple(s if isinstance(s, Support) else Support(tuple(s)) for s in self.supports)
        object.__setattr__(self, "supports", supports)
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got {self.k}")
        if len(supports) != self.k:
            raise ParameterError(f"Expected {self.k} supports, got {len(supports)}")
        if any(len(s) != len(self.common_word) for s in supports):
            raise ParameterError("All supports must have the length of the common word")

    @property
    def length(self) -> int:
        return len(self.common_word)

    @property
    def total_length(self) -> int:
        return self.k * self.length

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "length": self.length,
            "common_word": str(self.common_word),
            "supports": [list(s.indices) for s in self.supports],
            "construction": self.construction.value,
        }


@dataclass(frozen=True)
class Verification:
    """Outcome of checking k supports against a host; `pair` names the first failing pair (0-based)."""

    valid: bool
    reason: Optional[str] = None
    pair: Optional[Tuple[int, int]] = None
    common_word: Optional[Word] = None

    def __bool__(self) -> bool:
        return self.valid
