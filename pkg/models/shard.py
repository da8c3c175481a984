from dataclasses import dataclass
from typing import Optional, Tuple


@dataclass(frozen=True)
class ShardTask:
    """Unit of work for the table search: every canonical word starting with `prefix`."""

    index: int
    n: int
    k: int
    ell: int
    prefix: Tuple[int, ...]
    deadline: Optional[float] = None
    oracle: bool = False


@dataclass
class ShardResult:
    index: int
    best: Optional[int] = None
    witness_letters: Optional[Tuple[int, ...]] = None
    words_searched: int = 0
    complete: bool = True
    elapsed: float = 0.0

    def key(self):
        """Reduction key: smaller value first, then lexicographically smaller witness."""
        return (self.best, self.witness_letters)
