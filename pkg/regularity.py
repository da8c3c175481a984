import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from helpers.errors import (EpsilonTooSmallError, InvalidPartitionError, ParameterError,
                            UndefinedDensityError, WitnessMismatchError, WordTooShortError)
from models.partition import (Factor, FactorPartition, PartitionTrace, RefinementWitness,
                              RegularityParams, RegularityVerdict, TraceRound)
from models.word import Word

logger = logging.getLogger(__name__)

_INT64_SAFE = 2 ** 62


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def window_width(n: int, epsilon: Fraction) -> int:
    return _floor(Fraction(epsilon) * n)


def admissible_starts(n: int, epsilon: Fraction) -> Tuple[int, int]:
    """Inclusive 1-based range eps*n+1 <= i <= n-2*eps*n+1 of window starts (may be empty)."""
    eps = Fraction(epsilon)
    return _ceil(eps * n) + 1, _floor(n - 2 * eps * n) + 1


def min_refinable_length(epsilon: Fraction) -> int:
    """Factors shorter than this are never split: (A, B, C) with all parts >= eps*m does not fit."""
    return max(3, _ceil(1 / Fraction(epsilon)))


def _scan(word: Word, epsilon: Fraction, width: int) -> Optional[RefinementWitness]:
    m = len(word)
    lo, hi = admissible_starts(m, epsilon)
    hi = min(hi, m - width + 1)
    if lo > hi:
        return None
    eps = Fraction(epsilon)
    pc = word.prefix_counts
    totals = pc[:, m]
    if m * m * max(eps.numerator, eps.denominator) >= _INT64_SAFE:
        pc = pc.astype(object)
        totals = totals.astype(object)
    starts = np.arange(lo, hi + 1)
    window = pc[:, starts + width - 1] - pc[:, starts - 1]
    # |c/m - x/w| >= eps  <=>  |c*w - x*m| * den >= num * m * w
    lhs = np.abs(totals[:, None] * width - window * m) * eps.denominator
    violations = lhs >= eps.numerator * m * width
    columns = np.flatnonzero(violations.any(axis=0))
    if columns.size == 0:
        return None
    col = int(columns[0])
    letters = np.flatnonzero(violations[:, col])
    # In a binary word both letters deviate together; report letter 1 (d(S) = d_1(S)).
    q = 1 if word.ell == 2 else int(letters[0])
    count = int(window[q, col])
    gamma = Fraction(int(totals[q]), m) - Fraction(count, width)
    return RefinementWitness(window_start=int(starts[col]), letter=q, deviation=gamma, window_len=width)


def check_regular(word: Word, epsilon) -> RegularityVerdict:
    """
    Test the eps-regularity of a word.

    Every admissible window of width floor(eps*n) must have each letter's density
    strictly within eps of the whole word's density. The witness of an irregular word
    is the first violation (smallest window start, then smallest letter).
    """
    eps = Fraction(epsilon)
    if not 0 < eps < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {eps}")
    n = len(word)
    if n == 0:
        raise UndefinedDensityError("Regularity of the empty word is undefined")
    width = window_width(n, eps)
    if width < 1:
        raise EpsilonTooSmallError(
            f"Window width floor({eps}*{n}) is 0; the minimum usable epsilon for length {n} is 1/{n}",
            minimum_epsilon=Fraction(1, n))
    witness = _scan(word, eps, width)
    return RegularityVerdict(regular=witness is None, witness=witness)


def factor_verdict(word: Word, epsilon) -> RegularityVerdict:
    """check_regular with the width clamped to 1 so that guard-length factors get a verdict too."""
    eps = Fraction(epsilon)
    width = max(1, window_width(len(word), eps))
    witness = _scan(word, eps, width)
    return RegularityVerdict(regular=witness is None, witness=witness)


def _sum_sq_over_len(word: Word, start: int, end: int) -> Fraction:
    length = end - start + 1
    pc = word.prefix_counts
    counts = pc[:, end] - pc[:, start - 1]
    return Fraction(sum(int(c) * int(c) for c in counts), length)


def partition_index(partition: FactorPartition) -> Fraction:
    """ind = sum_q sum_i d_q(S_i)^2 |S_i|/n = (1/n) sum_i (sum_q |S_i|_q^2) / |S_i|."""
    total = Fraction(0)
    for position, f in enumerate(partition.factors, start=1):
        if len(f) == 0:
            raise InvalidPartitionError(f"Factor {position} is empty")
        total += _sum_sq_over_len(partition.host, f.start, f.end)
    return total / partition.n


def index_by_letter(partition: FactorPartition) -> List[Fraction]:
    n = partition.n
    pc = partition.host.prefix_counts
    result = []
    for q in range(partition.host.ell):
        acc = Fraction(0)
        for f in partition.factors:
            if len(f) == 0:
                raise InvalidPartitionError("Empty factor")
            c = int(pc[q, f.end] - pc[q, f.start - 1])
            acc += Fraction(c * c, len(f))
        result.append(acc / n)
    return result


def refine_irregular(word: Word, epsilon, witness: RefinementWitness) -> Tuple[Word, Word, Word]:
    """Split S into A = S[1, i-1], B = S[i, i+w-1], C = S[i+w, m] at an irregularity witness."""
    eps = Fraction(epsilon)
    m = len(word)
    i, w = witness.window_start, witness.window_len
    lo, hi = admissible_starts(m, eps)
    if w != max(1, window_width(m, eps)):
        raise WitnessMismatchError(f"Witness width {w} does not match floor(eps*m)={window_width(m, eps)}")
    if not lo <= i <= hi or i + w - 1 > m:
        raise WitnessMismatchError(f"Witness start {i} outside the admissible range [{lo}, {hi}]")
    if not 0 <= witness.letter < word.ell:
        raise WitnessMismatchError(f"Witness letter {witness.letter} not in the alphabet")
    gamma = Fraction(word.count_in(witness.letter, 1, m), m) \
        - Fraction(word.count_in(witness.letter, i, i + w - 1), w)
    if gamma != witness.deviation or abs(gamma) < eps:
        raise WitnessMismatchError(
            f"Witness deviation {witness.deviation} does not certify irregularity (actual {gamma})")
    letters, alphabet = word.letters, word.alphabet
    return (Word(letters[:i - 1], alphabet),
            Word(letters[i - 1:i + w - 1], alphabet),
            Word(letters[i + w - 1:], alphabet))


def equal_split_lengths(n: int, t: int) -> List[int]:
    """t lengths floor(n/t) or ceil(n/t), longer ones first."""
    base, extra = divmod(n, t)
    return [base + 1] * extra + [base] * (t - extra)


def is_regular_partition(partition: FactorPartition, epsilon) -> bool:
    return irregular_mass(partition) <= Fraction(epsilon) * partition.n


def irregular_mass(partition: FactorPartition) -> int:
    return sum(len(f) for f in partition.factors if f.regular is False)


def recheck_partition(partition: FactorPartition, epsilon) -> FactorPartition:
    """Recompute every factor verdict from scratch (independent of the flags stored on the partition)."""
    verdicts = [factor_verdict(partition.factor_word(i), epsilon).regular for i in range(len(partition))]
    return partition.with_verdicts(verdicts)


def refines(fine: FactorPartition, coarse: FactorPartition) -> bool:
    """True when every boundary of `coarse` is also a boundary of `fine`."""
    if fine.host != coarse.host:
        return False
    fine_ends = {f.end for f in fine.factors}
    return all(f.end in fine_ends for f in coarse.factors)


def dyadic_counts(trace: PartitionTrace, epsilon) -> List[Tuple[Fraction, Fraction, int]]:
    """Number of recorded alpha_j in each interval (y/2, y] for y = 1, 1/2, 1/4, ... down past eps."""
    eps = Fraction(epsilon)
    result = []
    y = Fraction(1)
    while y > eps:
        lower = y / 2
        count = sum(1 for r in trace.rounds if lower < r.alpha <= y)
        result.append((lower, y, count))
        y = lower
    return result


def _verdicts(partition: FactorPartition, eps: Fraction, jobs: int) -> List[RegularityVerdict]:
    words = [partition.factor_word(i) for i in range(len(partition))]
    if jobs > 1 and len(words) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda w: factor_verdict(w, eps), words))
    return [factor_verdict(w, eps) for w in words]


def split_gain(witness: RefinementWitness, m: int) -> Fraction:
    """Index gain per unit of factor mass when a factor of length m is cut at `witness`: gamma^2 * b/(m-b)."""
    b = witness.window_len
    return witness.deviation ** 2 * Fraction(b, m - b)


def regularity_partition(word: Word, params: RegularityParams,
                         jobs: int = 1) -> Tuple[FactorPartition, PartitionTrace]:
    """
    Build an eps-regular partition by the density increment argument.

    Start from the equal split into t0 factors; while the irregular factors weigh
    more than eps*n, split every irregular factor whose witness gains at least
    eps^3 per unit of mass. A round that splits a share alpha of the word raises the
    index by at least eps^3 * alpha. Irregular factors with no such split are left
    as they are; when none remains the trace is marked stuck.
    """
    eps = params.epsilon
    n = len(word)
    if params.t0 < _ceil(1 / eps):
        raise ParameterError(f"t0={params.t0} is below ceil(1/eps)={_ceil(1 / eps)}")
    if n < params.t0:
        raise WordTooShortError(f"A word of length {n} cannot be split into t0={params.t0} non-empty factors")

    guard = min_refinable_length(eps)
    min_gain = eps ** 3
    max_rounds = _ceil(1 / eps ** 4)
    partition = FactorPartition.from_lengths(word, equal_split_lengths(n, params.t0))
    trace = PartitionTrace()

    while True:
        verdicts = _verdicts(partition, eps, jobs)
        partition = partition.with_verdicts([v.regular for v in verdicts])
        index = partition_index(partition)
        mass = irregular_mass(partition)
        if mass <= eps * n:
            break
        targets = [i for i, (f, v) in enumerate(zip(partition.factors, verdicts))
                   if not v.regular and len(f) >= guard and split_gain(v.witness, len(f)) >= min_gain]
        if not targets or len(trace.rounds) >= max_rounds:
            trace.stuck = True
            logger.warning("Partition stuck after %d rounds: irregular mass %d > eps*n and no split gains eps^3",
                           len(trace.rounds), mass)
            break

        new_factors: List[Factor] = []
        refined_mass = 0
        gain = Fraction(0)
        target_set = set(targets)
        for i, f in enumerate(partition.factors):
            if i not in target_set:
                new_factors.append(Factor(f.start, f.end))
                continue
            witness = verdicts[i].witness
            m = len(f)
            a, b, _ = refine_irregular(partition.factor_word(i), eps, witness)
            cut1 = f.start + len(a)
            cut2 = cut1 + len(b)
            new_factors.extend([Factor(f.start, cut1 - 1), Factor(cut1, cut2 - 1), Factor(cut2, f.end)])
            refined_mass += m
            gain += split_gain(witness, m) * Fraction(m, n)
        trace.rounds.append(TraceRound(index_before=index, alpha=Fraction(refined_mass, n),
                                       factors_split=len(targets), refined_mass=refined_mass,
                                       irregular_mass=mass, guaranteed_gain=gain))
        logger.debug("Round %d: index=%s refined=%d irregular=%d split=%d",
                     len(trace.rounds), index, refined_mass, mass, len(targets))
        partition = FactorPartition(word, tuple(new_factors))

    trace.final_index = index
    trace.final_alpha = Fraction(mass, n)
    logger.info("Regularity partition: n=%d eps=%s factors=%d rounds=%d irregular_mass=%d",
                n, eps, len(partition), len(trace.rounds), mass)
    return partition, trace
