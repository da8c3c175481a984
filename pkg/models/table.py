from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from helpers.errors import ParameterError
from models.tuplet import TupletResult
from models.word import Word

CSV_COLUMNS = ["n", "k", "ell", "lo", "hi", "exact", "witness", "elapsed_ms"]


@dataclass(frozen=True)
class ExactResult:
    """Bounds lo <= f(S,k) <= hi; `witness` realises lo."""

    lo: int
    hi: int
    witness: Optional[TupletResult]
    nodes: int = 0
    complete: bool = True

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def value(self) -> int:
        if not self.exact:
            raise ParameterError(f"Search interrupted, only [{self.lo}, {self.hi}] is known")
        return self.lo


@dataclass
class TableEntry:
    n: int
    k: int
    ell: int
    lo: int
    hi: int
    witness_word: Optional[Word] = None
    witness: Optional[TupletResult] = None
    elapsed_ms: int = 0
    words_searched: int = 0
    complete: bool = True
    provenance: str = "exhaustive"
    notes: List[str] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.complete and self.lo == self.hi

    @property
    def value(self) -> Optional[int]:
        return self.lo if self.exact else None

    def contains(self, value: int) -> bool:
        return self.lo <= value <= self.hi

    def to_row(self, omit_timing: bool = False) -> Dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "ell": self.ell,
            "lo": self.lo,
            "hi": self.hi,
            "exact": self.exact,
            "witness": str(self.witness_word) if self.witness_word is not None else "",
            "elapsed_ms": 0 if omit_timing else self.elapsed_ms,
        }

    def to_dict(self, omit_timing: bool = False) -> Dict[str, Any]:
        data = self.to_row(omit_timing)
        if not omit_timing:
            data["words_searched"] = self.words_searched
        data["provenance"] = self.provenance
        if self.witness is not None:
            data["tuplet"] = self.witness.to_dict()
        if self.notes:
            data["notes"] = list(self.notes)
        return data
