import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from extractor_registry import registry
from helpers.enums import Construction, EpsilonSchedule
from helpers.errors import (EpsilonTooLargeError, NotRegularError, ParameterError,
                            UnsupportedAlphabetError, WrongRegimeError)
from models.partition import PartitionTrace, RegularityParams
from models.tuplet import TupletResult
from models.word import Alphabet, Support, Word
from regularity import check_regular, equal_split_lengths, regularity_partition

logger = logging.getLogger(__name__)

# Smallest factor count t = floor(1/eps) each block construction can run with.
CLAIM1_MIN_FACTORS = 5


@dataclass(frozen=True)
class ExtractionParams:
    epsilon: Optional[Fraction]
    k: int = 2
    auto_epsilon: bool = False
    c: float = 1.0
    schedule: EpsilonSchedule = EpsilonSchedule.STANDARD
    epsilon_floor: Fraction = Fraction(1, 50)
    epsilon_cap: Fraction = Fraction(1, 4)
    method: Optional[str] = None

    def __post_init__(self):
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got {self.k}")
        if self.epsilon is None:
            if not self.auto_epsilon:
                raise ParameterError("Either epsilon or auto_epsilon is required")
        else:
            eps = Fraction(self.epsilon)
            object.__setattr__(self, "epsilon", eps)
            if not 0 < eps < 1:
                raise ParameterError(f"epsilon must lie in (0, 1), got {eps}")
        if not 0 < self.epsilon_floor <= self.epsilon_cap < 1:
            raise ParameterError(f"Need 0 < floor <= cap < 1, got [{self.epsilon_floor}, {self.epsilon_cap}]")


@dataclass(frozen=True)
class BlockStep:
    factor: int
    letter: int
    size: int


@dataclass(frozen=True)
class BlockPlan:
    """Per member, the ordered blocks (source factor, letter, size) it draws from the word."""

    members: Tuple[Tuple[BlockStep, ...], ...]
    factor_bounds: Tuple[Tuple[int, int], ...] = field(default=(), compare=False)

    def __post_init__(self):
        shapes = {tuple((s.letter, s.size) for s in m) for m in self.members}
        if len(shapes) > 1:
            raise ParameterError("Members of a block plan must share one (letter, size) sequence")
        for m in self.members:
            factors = [s.factor for s in m]
            if any(b <= a for a, b in zip(factors, factors[1:])):
                raise ParameterError(f"Factor indices must increase within a member: {factors}")

    @property
    def k(self) -> int:
        return len(self.members)

    def shape(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((s.letter, s.size) for s in self.members[0]) if self.members else ()

    def realize(self, word: Word) -> Tuple[Support, ...]:
        """Fill every block with the earliest unused occurrences of its letter in its factor."""
        used: Dict[Tuple[int, int], int] = {}
        supports = []
        for member in self.members:
            positions: List[int] = []
            for step in member:
                if step.size == 0:
                    continue
                start, end = self.factor_bounds[step.factor - 1]
                occurrences = np.flatnonzero(word.array[start - 1:end] == step.letter) + start
                taken = used.get((step.factor, step.letter), 0)
                if taken + step.size > occurrences.size:
                    raise ParameterError(f"Block over-draws letter {step.letter} in factor {step.factor}")
                positions.extend(int(p) for p in occurrences[taken:taken + step.size])
                used[(step.factor, step.letter)] = taken + step.size
            supports.append(Support(tuple(positions)))
        return tuple(supports)


def _factor_bounds(m: int, t: int) -> Tuple[Tuple[int, int], ...]:
    bounds = []
    start = 1
    for length in equal_split_lengths(m, t):
        bounds.append((start, start + length - 1))
        start += length
    return tuple(bounds)


def _block_base(word: Word, epsilon: Fraction) -> List[int]:
    """max(0, floor((d_q - eps) * eps * m)) for every letter q."""
    m = len(word)
    base = []
    for count in word.counts:
        size = (Fraction(count, m) - epsilon) * epsilon * m
        base.append(max(0, size.numerator // size.denominator))
    return base


def _available(word: Word, bounds, factor: int, letter: int) -> int:
    if letter >= word.ell:
        return 0
    start, end = bounds[factor - 1]
    return word.count_in(letter, start, end)


def _tuplet_from_plan(word: Word, plan: BlockPlan, k: int, construction: Construction) -> TupletResult:
    supports = plan.realize(word)
    common = Word(tuple(word.letters[i - 1] for i in supports[0].indices), word.alphabet)
    return TupletResult(k=k, supports=supports, common_word=common, host_length=len(word),
                        construction=construction, meta={"blocks": len(plan.shape())})


def factor_count(epsilon: Fraction) -> int:
    eps = Fraction(epsilon)
    return eps.denominator // eps.numerator


def greedy_triples(word: Word) -> TupletResult:
    """
    Twins of length floor(n/3) in any binary word.

    Each complete triple holds two equal letters; the first equal pair goes to
    the two members. The trailing n mod 3 letters are unused.
    """
    if word.ell != 2:
        raise UnsupportedAlphabetError(f"Greedy triples need a binary word, alphabet has {word.ell} letters")
    first, second, common = [], [], []
    letters = word.letters
    for base in range(0, len(word) - len(word) % 3, 3):
        a, b, c = letters[base:base + 3]
        if a == b:
            pair = (base + 1, base + 2)
        elif a == c:
            pair = (base + 1, base + 3)
        else:
            pair = (base + 2, base + 3)
        first.append(pair[0])
        second.append(pair[1])
        common.append(letters[pair[0] - 1])
    return TupletResult(k=2, supports=(Support(tuple(first)), Support(tuple(second))),
                        common_word=Word(tuple(common), word.alphabet), host_length=len(word),
                        construction=Construction.GREEDY)


def claim1_plan(word: Word, epsilon: Fraction) -> BlockPlan:
    """
    Twin layout on t = floor(1/eps) equal factors.

    A = S_2(1) S_3(0) S_4(1) ... on factors 2..t-2 and B = S_3(1) S_4(0) S_5(1) ...
    on factors 3..t-1. A factor serves A and B with different letters.
    """
    eps = Fraction(epsilon)
    m = len(word)
    t = factor_count(eps)
    if t < CLAIM1_MIN_FACTORS:
        raise EpsilonTooLargeError(f"floor(1/eps)={t} < {CLAIM1_MIN_FACTORS}; use a smaller epsilon")
    bounds = _factor_bounds(m, t)
    base = _block_base(word, eps)
    first, second = [], []
    for j in range(t - 3):
        letter = 1 if j % 2 == 0 else 0
        fa, fb = j + 2, j + 3
        size = min(base[letter], _available(word, bounds, fa, letter), _available(word, bounds, fb, letter))
        first.append(BlockStep(fa, letter, size))
        second.append(BlockStep(fb, letter, size))
    return BlockPlan((tuple(first), tuple(second)), bounds)


def thm2_plan(word: Word, epsilon: Fraction, k: int) -> BlockPlan:
    """
    Staggered k-tuplet layout on t = floor(1/eps) equal factors.

    Member j (1-based) takes letter b mod k from factor j+1+b for b = 0..t-k-2, so
    member k ends at factor t-1. Letters >= ell pad the cycle with empty blocks and
    trailing pad steps are dropped; for a binary word and k = 4 member j uses
    factors j+1, j+2, j+5, j+6, ...
    """
    eps = Fraction(epsilon)
    ell = word.ell
    if ell > k:
        raise WrongRegimeError(f"Alphabet of {ell} letters exceeds k={k}; restrict to the k most frequent letters")
    t = factor_count(eps)
    if t < 2 * ell + k:
        raise EpsilonTooLargeError(f"floor(1/eps)={t} < 2*ell+k={2 * ell + k}; use a smaller epsilon")
    bounds = _factor_bounds(len(word), t)
    base = _block_base(word, eps) + [0] * (k - ell)
    blocks = t - k - 1
    while blocks > 0 and (blocks - 1) % k >= ell:
        blocks -= 1
    sizes = []
    for b in range(blocks):
        letter = b % k
        size = base[letter]
        for j in range(1, k + 1):
            size = min(size, _available(word, bounds, j + 1 + b, letter))
        sizes.append(size)
    members = tuple(
        tuple(BlockStep(j + 1 + b, b % k, sizes[b]) for b in range(blocks))
        for j in range(1, k + 1)
    )
    return BlockPlan(members, bounds)


@registry.register(Construction.GREEDY.value)
def _greedy_extractor(word: Word, epsilon: Fraction, k: int) -> TupletResult:
    if k != 2:
        raise ParameterError(f"The greedy extractor only builds twins, got k={k}")
    return greedy_triples(word)


@registry.register(Construction.CLAIM1.value)
def _claim1_extractor(word: Word, epsilon: Fraction, k: int) -> TupletResult:
    if k != 2:
        raise ParameterError(f"The claim1 extractor only builds twins, got k={k}")
    if word.ell != 2:
        raise UnsupportedAlphabetError(f"The claim1 extractor needs a binary word, alphabet has {word.ell} letters")
    return _tuplet_from_plan(word, claim1_plan(word, epsilon), 2, Construction.CLAIM1)


@registry.register(Construction.THM2.value)
def _thm2_extractor(word: Word, epsilon: Fraction, k: int) -> TupletResult:
    return _tuplet_from_plan(word, thm2_plan(word, epsilon, k), k, Construction.THM2)


def _require_regular(word: Word, epsilon: Fraction) -> None:
    verdict = check_regular(word, epsilon)
    if not verdict.regular:
        w = verdict.witness
        raise NotRegularError(f"Word is not {epsilon}-regular (window at {w.window_start}, letter {w.letter}, "
                              f"deviation {w.deviation}); regularize it first")


def extract_twins_regular(word: Word, epsilon) -> TupletResult:
    """Twins of combined length about (1 - 5 eps) m in an eps-regular binary word."""
    eps = Fraction(epsilon)
    if word.ell != 2:
        raise UnsupportedAlphabetError(f"Twin extraction needs a binary word, alphabet has {word.ell} letters")
    if factor_count(eps) < CLAIM1_MIN_FACTORS:
        raise EpsilonTooLargeError(f"floor(1/eps)={factor_count(eps)} < {CLAIM1_MIN_FACTORS}")
    _require_regular(word, eps)
    return registry.execute(Construction.CLAIM1.value, word, eps, 2)


def extract_ktuplets_regular(word: Word, epsilon, k: int) -> TupletResult:
    eps = Fraction(epsilon)
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    if word.ell > k:
        raise WrongRegimeError(f"Alphabet of {word.ell} letters exceeds k={k}; use restrict_frequent first")
    if factor_count(eps) < 2 * word.ell + k:
        raise EpsilonTooLargeError(f"floor(1/eps)={factor_count(eps)} < 2*ell+k={2 * word.ell + k}")
    _require_regular(word, eps)
    return registry.execute(Construction.THM2.value, word, eps, k)


def restrict_frequent(word: Word, k: int) -> Tuple[Word, Support]:
    """
    Keep the positions holding one of the k most frequent letters (ties: smaller code).

    Kept letters are recoded 0..k-1 by decreasing frequency; the support maps
    positions of the filtered word back to the host.
    """
    if word.ell <= k:
        raise WrongRegimeError(f"Alphabet of {word.ell} letters does not exceed k={k}")
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    counts = word.counts
    order = sorted(range(word.ell), key=lambda q: (-counts[q], q))[:k]
    recode = {q: i for i, q in enumerate(order)}
    positions = [i for i, c in enumerate(word.letters, start=1) if c in recode]
    filtered = Word(tuple(recode[word.letters[i - 1]] for i in positions), Alphabet(k))
    return filtered, Support(tuple(positions))


def auto_epsilon(n: int, c: float = 1.0, schedule: EpsilonSchedule = EpsilonSchedule.STANDARD,
                 floor: Fraction = Fraction(1, 50), cap: Fraction = Fraction(1, 4)) -> Fraction:
    """
    eps as a function of n, clamped to [floor, cap].

    standard: c * (log n / log log n)^(-1/4)
    improved: c * ((log log n)^2 / log n)^(1/3)
    """
    floor, cap = Fraction(floor), Fraction(cap)
    loglog = math.log(math.log(n)) if n > 3 else 0.0
    if loglog <= 0:
        return cap
    if EpsilonSchedule(schedule) is EpsilonSchedule.IMPROVED:
        value = c * (loglog ** 2 / math.log(n)) ** (1 / 3)
    else:
        value = c * (math.log(n) / loglog) ** -0.25
    eps = Fraction(value).limit_denominator(1000)
    return min(cap, max(floor, eps))


def default_method(k: int, ell: int) -> str:
    return Construction.CLAIM1.value if k == 2 and ell == 2 else Construction.THM2.value


def largest_epsilon(method: str, k: int, ell: int) -> Fraction:
    """Largest eps whose factor count floor(1/eps) the extractor accepts."""
    if method == Construction.CLAIM1.value:
        return Fraction(1, CLAIM1_MIN_FACTORS)
    if method == Construction.THM2.value:
        return Fraction(1, 2 * min(ell, k) + k)
    return Fraction(1, 2)


def resolve_epsilon(n: int, params: ExtractionParams, method: str, ell: int) -> Fraction:
    if not params.auto_epsilon:
        return params.epsilon
    eps = auto_epsilon(n, params.c, params.schedule, params.epsilon_floor, params.epsilon_cap)
    eps = min(eps, largest_epsilon(method, params.k, ell))
    logger.info("Auto epsilon for n=%d (%s, c=%s): %s", n, EpsilonSchedule(params.schedule).value, params.c, eps)
    return eps


def pipeline_slack(method: str, k: int, ell: int) -> int:
    """Constant c in the per-factor guarantee |S_i| - c*eps*|S_i|."""
    if method == Construction.CLAIM1.value:
        return 5
    if method == Construction.GREEDY.value:
        return 0
    # With ell < k the final partial cycle may carry only sparse letters (1^m, k=4, eps=1/10: 3600 < m - 6 eps m).
    return 3 * ell if ell == k else 2 * k + ell + 1


def pipeline(word: Word, params: ExtractionParams, jobs: int = 1) -> Tuple[TupletResult, PartitionTrace]:
    """
    Regularize, extract on every regular factor and concatenate member-wise.

    Words over more than k letters are first restricted to their k most frequent
    letters. Irregular factors contribute nothing.
    """
    k = params.k
    host, back_map = word, None
    if word.ell > k:
        host, back_map = restrict_frequent(word, k)
        logger.info("Restricted to the %d most frequent letters: %d of %d positions kept", k, len(host), len(word))
    method = params.method or default_method(k, host.ell)
    eps = resolve_epsilon(len(word), params, method, host.ell)
    regularity = RegularityParams.for_epsilon(eps)
    if len(host) < regularity.t0:
        raise EpsilonTooLargeError(
            f"Word of length {len(host)} is shorter than ceil(1/eps)={regularity.t0}; choose a larger epsilon")

    partition, trace = regularity_partition(host, regularity, jobs=jobs)
    regular = [i for i, f in enumerate(partition.factors) if f.regular]

    def run(i: int) -> TupletResult:
        return registry.execute(method, partition.factor_word(i), eps, k)

    if jobs > 1 and len(regular) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            pieces = list(pool.map(run, regular))
    else:
        pieces = [run(i) for i in regular]

    members: List[List[int]] = [[] for _ in range(k)]
    common: List[int] = []
    for i, piece in zip(regular, pieces):
        offset = partition.factors[i].start - 1
        for member, support in zip(members, piece.supports):
            member.extend(p + offset for p in support.indices)
        common.extend(piece.common_word.letters)

    supports = tuple(Support(tuple(m)) for m in members)
    if back_map is not None:
        supports = tuple(s.mapped(back_map) for s in supports)
        common_word = Word(tuple(word.letters[i - 1] for i in supports[0].indices), word.alphabet)
    else:
        common_word = Word(tuple(common), word.alphabet)

    regular_mass = sum(len(partition.factors[i]) for i in regular)
    slack = pipeline_slack(method, k, host.ell)
    guaranteed = max(Fraction(0), regular_mass - slack * eps * regular_mass)
    result = TupletResult(
        k=k, supports=supports, common_word=common_word, host_length=len(word),
        construction=Construction.PIPELINE,
        meta={
            "method": method,
            "epsilon": eps,
            "factors": len(partition),
            "regular_factors": len(regular),
            "regular_mass": regular_mass,
            "restricted_length": len(host),
            "guaranteed_total": guaranteed,
        })
    logger.info("Pipeline: k=%d method=%s eps=%s length=%d regular_factors=%d/%d",
                k, method, eps, result.length, len(regular), len(partition))
    return result, trace
