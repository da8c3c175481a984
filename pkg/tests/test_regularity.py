from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from constructions import random_word
from helpers.errors import (EpsilonTooSmallError, ParameterError, UndefinedDensityError,
                            WitnessMismatchError, WordTooShortError)
from models.partition import FactorPartition, RefinementWitness, RegularityParams
from models.word import Alphabet, Word
from regularity import (admissible_starts, check_regular, dyadic_counts, equal_split_lengths, index_by_letter,
                        irregular_mass, is_regular_partition, partition_index, recheck_partition, refine_irregular,
                        refines, regularity_partition)

from tests.conftest import word_of


def blocks(*runs):
    letters = []
    for letter, length in runs:
        letters.extend([letter] * length)
    return Word.of(letters)


def test_admissible_starts():
    assert admissible_starts(100, Fraction(1, 10)) == (11, 81)
    assert admissible_starts(10, Fraction(1, 5)) == (3, 7)


def test_constant_word_is_regular():
    assert check_regular(Word.of([0] * 100), Fraction(1, 10)).regular


def test_alternating_word_is_regular():
    assert check_regular(Word.of([0, 1] * 500), Fraction(1, 10)).regular


def test_two_blocks_are_irregular():
    verdict = check_regular(blocks((0, 50), (1, 50)), Fraction(1, 10))
    assert not verdict.regular
    w = verdict.witness
    assert (w.window_start, w.letter, w.deviation, w.window_len) == (11, 1, Fraction(1, 2), 10)


def test_witness_letter_for_larger_alphabets_is_smallest():
    verdict = check_regular(blocks((0, 20), (1, 20), (2, 20)), Fraction(1, 10))
    assert not verdict.regular
    assert verdict.witness.window_start == 7
    assert verdict.witness.letter == 0


def test_epsilon_too_small():
    with pytest.raises(EpsilonTooSmallError) as err:
        check_regular(word_of("00110"), Fraction(1, 10))
    assert err.value.minimum_epsilon == Fraction(1, 5)


def test_empty_word_has_no_density():
    with pytest.raises(UndefinedDensityError):
        check_regular(Word((), Alphabet(2)), Fraction(1, 10))


def test_epsilon_out_of_range():
    with pytest.raises(ParameterError):
        check_regular(word_of("0101"), Fraction(3, 2))


def test_partition_index_values():
    w = Word.of([0] * 8)
    assert partition_index(FactorPartition.from_lengths(w, [8])) == 1
    split = Word.of([0] * 4 + [1] * 4)
    assert partition_index(FactorPartition.from_lengths(split, [4, 4])) == 1
    assert partition_index(FactorPartition.from_lengths(split, [8])) == Fraction(1, 2)


def test_index_by_letter_sums_to_index():
    w = word_of("0120112002", ell=3)
    p = FactorPartition.from_lengths(w, [3, 3, 4])
    assert sum(index_by_letter(p)) == partition_index(p)


def test_refine_irregular_raises_the_index():
    # A = 0^10, B = 0^10, C = 0^30 1^50
    word = blocks((0, 50), (1, 50))
    witness = check_regular(word, Fraction(1, 10)).witness
    a, b, c = refine_irregular(word, Fraction(1, 10), witness)
    assert (len(a), len(b), len(c)) == (10, 10, 80)
    assert a.letters + b.letters + c.letters == word.letters
    before = partition_index(FactorPartition.from_lengths(word, [100]))
    after = partition_index(FactorPartition.from_lengths(word, [10, 10, 80]))
    assert after - before == Fraction(1, 8)
    assert after - before >= Fraction(1, 10) ** 3 / 2


def test_refine_rejects_a_forged_witness():
    word = blocks((0, 50), (1, 50))
    eps = Fraction(1, 10)
    with pytest.raises(WitnessMismatchError):
        refine_irregular(word, eps, RefinementWitness(11, 1, Fraction(1, 4), 10))
    with pytest.raises(WitnessMismatchError):
        refine_irregular(word, eps, RefinementWitness(5, 1, Fraction(1, 2), 10))
    with pytest.raises(WitnessMismatchError):
        refine_irregular(word, eps, RefinementWitness(11, 1, Fraction(1, 2), 12))


def test_equal_split_lengths():
    assert equal_split_lengths(10, 3) == [4, 3, 3]
    assert equal_split_lengths(9, 3) == [3, 3, 3]


def test_partition_of_a_regular_word_needs_no_rounds():
    word = Word.of([1] * 1000)
    partition, trace = regularity_partition(word, RegularityParams.for_epsilon(Fraction(1, 5)))
    assert len(trace) == 0
    assert partition.lengths() == [200] * 5
    assert all(f.regular for f in partition)
    assert trace.final_index == 1


def test_two_halves_leave_one_irregular_factor():
    eps = Fraction(1, 5)
    word = blocks((0, 5000), (1, 5000))
    partition, trace = regularity_partition(word, RegularityParams(eps, 5))
    assert is_regular_partition(partition, eps)
    assert irregular_mass(partition) <= 2000
    assert is_regular_partition(recheck_partition(partition, eps), eps)
    assert not trace.stuck


def assert_rounds_gain(trace, eps):
    indices = trace.indices()
    for before, after, rnd in zip(indices, indices[1:], trace.rounds):
        assert 0 < rnd.refined_mass <= rnd.irregular_mass
        assert after - before >= rnd.guaranteed_gain >= eps ** 3 * rnd.alpha
        if rnd.alpha >= eps:
            assert after - before >= eps ** 4


def test_partition_refines_until_regular():
    eps = Fraction(1, 10)
    word = blocks((0, 4500), (1, 1000), (0, 1000), (1, 3500))
    start = FactorPartition.from_lengths(word, equal_split_lengths(len(word), 10))
    partition, trace = regularity_partition(word, RegularityParams(eps, 10))
    assert len(trace) > 0
    assert not trace.stuck
    assert refines(partition, start)
    assert is_regular_partition(partition, eps)
    rechecked = recheck_partition(partition, eps)
    assert irregular_mass(rechecked) <= eps * len(word)
    assert_rounds_gain(trace, eps)
    assert all(rnd.alpha >= eps for rnd in trace.rounds)
    assert len(trace) <= 1 / eps ** 4
    assert all(count <= 2 / eps ** 3 for _, _, count in dyadic_counts(trace, eps))
    assert trace.final_index == partition_index(partition)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("ell", [2, 3, 4])
def test_random_words_partition(seed, ell):
    eps = Fraction(1, 5)
    word = random_word(10_000, ell, seed=seed)
    partition, trace = regularity_partition(word, RegularityParams.for_epsilon(eps))
    rechecked = recheck_partition(partition, eps)
    assert irregular_mass(rechecked) <= eps * len(word)
    indices = trace.indices()
    assert all(a <= b for a, b in zip(indices, indices[1:]))


@pytest.mark.parametrize("seed", range(2))
@pytest.mark.parametrize("ell", [2, 3])
def test_random_words_get_stuck_at_a_tenth(seed, ell):
    eps = Fraction(1, 10)
    word = random_word(10_000, ell, seed=seed)
    partition, trace = regularity_partition(word, RegularityParams.for_epsilon(eps))
    assert len(trace) > 0
    assert_rounds_gain(trace, eps)
    assert trace.stuck
    assert not is_regular_partition(partition, eps)
    assert irregular_mass(recheck_partition(partition, eps)) == irregular_mass(partition) > eps * len(word)
    assert trace.final_alpha > eps


def test_partition_preconditions():
    with pytest.raises(WordTooShortError):
        regularity_partition(word_of("0101"), RegularityParams.for_epsilon(Fraction(1, 5)))
    with pytest.raises(ParameterError):
        regularity_partition(Word.of([0] * 100), RegularityParams(Fraction(1, 5), 3))


def test_parallel_verdicts_match_serial():
    word = blocks((0, 4500), (1, 1000), (0, 1000), (1, 3500))
    params = RegularityParams.for_epsilon(Fraction(1, 10))
    serial, _ = regularity_partition(word, params, jobs=1)
    parallel, _ = regularity_partition(word, params, jobs=3)
    assert serial == parallel


@st.composite
def partitions_with_refinement(draw):
    ell = draw(st.integers(2, 3))
    letters = draw(st.lists(st.integers(0, ell - 1), min_size=2, max_size=40))
    n = len(letters)
    word = Word(tuple(letters), Alphabet(ell))
    coarse_cuts = draw(st.sets(st.integers(1, n - 1)))
    extra_cuts = draw(st.sets(st.integers(1, n - 1)))

    def build(cuts):
        ends = sorted(cuts) + [n]
        lengths = [b - a for a, b in zip([0] + ends, ends)]
        return FactorPartition.from_lengths(word, lengths)

    return build(coarse_cuts), build(coarse_cuts | extra_cuts)


@settings(max_examples=200, deadline=None)
@given(partitions_with_refinement())
def test_refining_never_lowers_the_index(pair):
    coarse, fine = pair
    assert refines(fine, coarse)
    assert partition_index(fine) >= partition_index(coarse)
    assert 0 < partition_index(coarse) <= 1
