from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from helpers.errors import InvalidPartitionError, ParameterError
from helpers.helper import format_rational
from models.word import DensityVector, Word


@dataclass(frozen=True)
class RegularityParams:
    epsilon: Fraction
    t0: int

    def __post_init__(self):
        eps = Fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if not 0 < eps < 1:
            raise ParameterError(f"epsilon must lie in (0, 1), got {eps}")
        if self.t0 < 1:
            raise ParameterError(f"t0 must be >= 1, got {self.t0}")

    @classmethod
    def for_epsilon(cls, epsilon) -> "RegularityParams":
        eps = Fraction(epsilon)
        return cls(eps, -(-eps.denominator // eps.numerator))


@dataclass(frozen=True)
class RefinementWitness:
    """Window S[i, i+w-1] whose density of `letter` deviates by `deviation` from the whole word."""

    window_start: int
    letter: int
    deviation: Fraction
    window_len: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "window_start": self.window_start,
            "letter": self.letter,
            "deviation": format_rational(self.deviation),
            "window_len": self.window_len,
        }


@dataclass(frozen=True)
class RegularityVerdict:
    regular: bool
    witness: Optional[RefinementWitness] = None

    def __bool__(self) -> bool:
        return self.regular


@dataclass(frozen=True)
class Factor:
    """1-based inclusive extent [start, end] of the host; empty when end == start - 1."""

    start: int
    end: int
    regular: Optional[bool] = None

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class FactorPartition:
    host: Word
    factors: Tuple[Factor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        object.__setattr__(self, "factors", factors)
        expected = 1
        for f in factors:
            if f.start != expected or f.end < f.start - 1:
                raise InvalidPartitionError(f"Factors are not consecutive at position {expected}: {f}")
            expected = f.end + 1
        if expected != len(self.host) + 1:
            raise InvalidPartitionError(
                f"Factors cover {expected - 1} letters, host has {len(self.host)}")

    @classmethod
    def from_lengths(cls, host: Word, lengths: Iterable[int]) -> "FactorPartition":
        factors = []
        start = 1
        for length in lengths:
            factors.append(Factor(start, start + length - 1))
            start += length
        return cls(host, tuple(factors))

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    @property
    def n(self) -> int:
        return len(self.host)

    def lengths(self) -> List[int]:
        return [len(f) for f in self.factors]

    def factor_word(self, index: int) -> Word:
        f = self.factors[index]
        return Word(self.host.letters[f.start - 1:f.end], self.host.alphabet)

    def densities(self, index: int) -> DensityVector:
        f = self.factors[index]
        if len(f) == 0:
            raise InvalidPartitionError(f"Factor {index + 1} is empty")
        return DensityVector(tuple(Fraction(self.host.count_in(q, f.start, f.end), len(f))
                                   for q in range(self.host.ell)))

    def with_verdicts(self, verdicts: Sequence[bool]) -> "FactorPartition":
        return FactorPartition(self.host, tuple(replace(f, regular=bool(v))
                                                for f, v in zip(self.factors, verdicts)))

    def to_dict(self, epsilon: Optional[Fraction] = None,
                trace: Optional["PartitionTrace"] = None) -> Dict[str, Any]:
        data: Dict[str, Any] = {"n": self.n}
        if epsilon is not None:
            data["epsilon"] = format_rational(epsilon)
        data["factors"] = [
            {
                "start": f.start,
                "end": f.end,
                "regular": f.regular,
                "densities": [format_rational(d) for d in self.densities(i)],
            }
            for i, f in enumerate(self.factors)
        ]
        if trace is not None:
            data["trace"] = trace.to_list()
            data["final_index"] = format_rational(trace.final_index)
            data["stuck"] = trace.stuck
        return data


@dataclass(frozen=True)
class TraceRound:
    index_before: Fraction
    # Share of the word split this round (refined_mass / n).
    alpha: Fraction
    factors_split: int
    refined_mass: int = 0
    irregular_mass: int = 0
    # Sum over refined factors of gamma^2 * b/(m-b) * m/n.
    guaranteed_gain: Fraction = Fraction(0)


@dataclass
class PartitionTrace:
    rounds: List[TraceRound] = field(default_factory=list)
    final_index: Fraction = Fraction(0)
    final_alpha: Fraction = Fraction(0)
    stuck: bool = False

    def __len__(self) -> int:
        return len(self.rounds)

    def indices(self) -> List[Fraction]:
        return [r.index_before for r in self.rounds] + [self.final_index]

    def to_list(self) -> List[Dict[str, Any]]:
        return [
            {
                "index": format_rational(r.index_before),
                "alpha": format_rational(r.alpha),
                "factors_split": r.factors_split,
                "refined_mass": r.refined_mass,
                "irregular_mass": r.irregular_mass,
                "guaranteed_gain": format_rational(r.guaranteed_gain),
            }
            for r in self.rounds
        ]
