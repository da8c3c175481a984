from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Optional, Tuple

import numpy as np

from helpers.errors import BoundsError, ParameterError

# Letters 0-9 then a-z when the alphabet fits in one character per letter.
CHARSET = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if not isinstance(self.size, (int, np.integer)) or self.size < 1:
            raise ParameterError(f"Alphabet size must be a positive integer, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))

    @property
    def uses_characters(self) -> bool:
        return self.size <= len(CHARSET)


@dataclass(frozen=True)
class Word:
    """Immutable word over the integer alphabet 0..size-1."""

    letters: Tuple[int, ...]
    alphabet: Alphabet

    def __post_init__(self):
        letters = tuple(int(c) for c in self.letters)
        object.__setattr__(self, "letters", letters)
        if letters and (min(letters) < 0 or max(letters) >= self.alphabet.size):
            bad = next(i for i, c in enumerate(letters) if c < 0 or c >= self.alphabet.size)
            raise ParameterError(
                f"Letter {letters[bad]} at position {bad + 1} outside alphabet of size {self.alphabet.size}")

    @classmethod
    def of(cls, letters: Iterable[int], ell: Optional[int] = None) -> "Word":
        """Build a word, inferring the alphabet (at least binary) when `ell` is omitted."""
        letters = tuple(int(c) for c in letters)
        if ell is None:
            ell = max(2, max(letters) + 1) if letters else 2
        return cls(letters, Alphabet(ell))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, item):
        return self.letters[item]

    def __str__(self) -> str:
        if self.alphabet.uses_characters:
            return "".join(CHARSET[c] for c in self.letters)
        return " ".join(str(c) for c in self.letters)

    @property
    def ell(self) -> int:
        return self.alphabet.size

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.letters, dtype=np.int64)

    @cached_property
    def counts(self) -> Tuple[int, ...]:
        return tuple(int(c) for c in np.bincount(self.array, minlength=self.ell)) if self.letters \
            else (0,) * self.ell

    @cached_property
    def prefix_counts(self) -> np.ndarray:
        """Array of shape (ell, n+1); entry [q, i] counts letter q among the first i letters."""
        onehot = np.zeros((self.ell, len(self) + 1), dtype=np.int64)
        if self.letters:
            onehot[self.array, np.arange(1, len(self) + 1)] = 1
        return np.cumsum(onehot, axis=1)

    def count_in(self, q: int, start: int, end: int) -> int:
        """Occurrences of q in the 1-based inclusive factor [start, end]."""
        pc = self.prefix_counts
        return int(pc[q, end] - pc[q, start - 1])


@dataclass(frozen=True)
class Support:
    """Strictly increasing 1-based positions into a host word."""

    indices: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", indices)
        for a, b in zip(indices, indices[1:]):
            if b <= a:
                raise ParameterError(f"Support not strictly increasing at {a}, {b}")
        if indices and indices[0] < 1:
            raise BoundsError(f"Support position {indices[0]} < 1")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def validate_for(self, host_length: int) -> None:
        if self.indices and self.indices[-1] > host_length:
            raise BoundsError(f"Support position {self.indices[-1]} beyond host length {host_length}")

    def mapped(self, back_map: "Support") -> "Support":
        """Compose with a position map (filtered position p -> back_map[p])."""
        return Support(tuple(back_map.indices[i - 1] for i in self.indices))


@dataclass(frozen=True)
class DensityVector:
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if any(v < 0 or v > 1 for v in values):
            raise ParameterError(f"Density outside [0, 1]: {values}")
        if values and sum(values) != 1:
            raise ParameterError(f"Densities do not sum to 1: {values}")

    def __getitem__(self, q: int) -> Fraction:
        return self.values[q]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)
