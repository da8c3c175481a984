from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from constructions import random_word
from exact import verify_tuplet
from extraction import (BlockPlan, BlockStep, ExtractionParams, auto_epsilon, claim1_plan, extract_ktuplets_regular,
                        extract_twins_regular, factor_count, greedy_triples, pipeline, pipeline_slack,
                        restrict_frequent, thm2_plan)
from extractor_registry import registry
from helpers.enums import Construction, EpsilonSchedule
from helpers.errors import (EpsilonTooLargeError, NotRegularError, ParameterError, UnsupportedAlphabetError,
                            WrongRegimeError)
from models.word import Word
from regularity import check_regular

from tests.conftest import word_of


def assert_valid(word, result):
    verdict = verify_tuplet(word, result.supports)
    assert verdict, verdict.reason
    assert verdict.common_word == result.common_word


def test_greedy_example():
    word = word_of("001101111010")
    result = greedy_triples(word)
    assert str(result.common_word) == "0110"
    assert [s.indices for s in result.supports] == [(1, 4, 7, 10), (2, 6, 8, 12)]
    assert_valid(word, result)


def test_greedy_short_words():
    assert greedy_triples(word_of("000")).length == 1
    assert greedy_triples(word_of("01")).length == 0
    assert greedy_triples(word_of("")).length == 0


def test_greedy_needs_binary():
    with pytest.raises(UnsupportedAlphabetError):
        greedy_triples(word_of("012"))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=300))
def test_greedy_always_reaches_a_third(letters):
    word = Word.of(letters, 2)
    result = greedy_triples(word)
    assert result.length == len(word) // 3
    assert_valid(word, result)


@pytest.mark.parametrize("n", [30, 300, 3000])
def test_greedy_on_random_words(n):
    for seed in range(1000):
        word = random_word(n, 2, seed=seed)
        result = greedy_triples(word)
        assert result.length == n // 3
        assert_valid(word, result)


def test_claim1_on_alternating_word():
    eps = Fraction(1, 10)
    word = Word.of([0, 1] * 500)
    plan = claim1_plan(word, eps)
    first, second = plan.members
    assert [s.factor for s in first] == [2, 3, 4, 5, 6, 7, 8]
    assert [s.factor for s in second] == [3, 4, 5, 6, 7, 8, 9]
    assert {s.size for s in first} == {40}
    result = extract_twins_regular(word, eps)
    assert result.construction is Construction.CLAIM1
    assert result.total_length >= 500
    assert result.length == 280
    assert_valid(word, result)


def test_claim1_on_constant_word():
    word = Word.of([0] * 1000)
    result = extract_twins_regular(word, Fraction(1, 10))
    assert set(result.common_word.letters) == {0}
    assert result.total_length >= 500
    assert_valid(word, result)


def test_claim1_odd_factor_count():
    word = Word.of([0, 1] * 450)
    result = extract_twins_regular(word, Fraction(1, 9))
    first, second = claim1_plan(word, Fraction(1, 9)).members
    assert first[0].factor == 2 and first[-1].factor == 7
    assert second[0].factor == 3 and second[-1].factor == 8
    assert_valid(word, result)


@pytest.mark.parametrize("seed", range(5))
def test_claim1_on_random_regular_words(seed):
    eps = Fraction(1, 10)
    word = random_word(10_000, 2, seed=seed)
    assert check_regular(word, eps)
    result = extract_twins_regular(word, eps)
    assert_valid(word, result)
    blocks = len(claim1_plan(word, eps).shape())
    assert result.total_length >= (1 - 5 * eps) * len(word) - 2 * blocks


def test_claim1_refuses_irregular_words():
    word = Word.of([0] * 50 + [1] * 50)
    with pytest.raises(NotRegularError):
        extract_twins_regular(word, Fraction(1, 10))


def test_claim1_refuses_large_epsilon():
    with pytest.raises(EpsilonTooLargeError):
        extract_twins_regular(Word.of([0, 1] * 50), Fraction(1, 4))


def test_claim1_needs_binary():
    with pytest.raises(UnsupportedAlphabetError):
        extract_twins_regular(Word.of([0, 1, 2] * 50), Fraction(1, 10))


def test_block_plan_rejects_different_shapes():
    with pytest.raises(ParameterError):
        BlockPlan(((BlockStep(1, 0, 2),), (BlockStep(2, 0, 3),)))
    with pytest.raises(ParameterError):
        BlockPlan(((BlockStep(3, 0, 2), BlockStep(2, 1, 2)),))


def test_thm2_staggered_layout():
    eps = Fraction(1, 20)
    word = Word.of([0, 1] * 500)
    plan = thm2_plan(word, eps, 4)
    used = [s.factor for s in plan.members[0] if s.size]
    assert used == [2, 3, 6, 7, 10, 11, 14, 15]
    assert plan.members[-1][-1].factor == 18
    for j, member in enumerate(plan.members, start=1):
        assert member[0].factor == j + 1
    assert {s.size for s in plan.members[0] if s.size} == {22}
    result = extract_ktuplets_regular(word, eps, 4)
    assert result.length == 176
    assert result.total_length >= 1000 - 11 * 50
    assert_valid(word, result)


def test_thm2_constant_word_full_alphabet():
    eps = Fraction(1, 10)
    word = Word.of([2] * 600, 3)
    result = extract_ktuplets_regular(word, eps, 3)
    assert set(result.common_word.letters) == {2}
    assert result.length >= (600 - 3 * 3 * eps * 600) / 3
    assert_valid(word, result)


def test_thm2_binary_twins():
    eps = Fraction(1, 10)
    word = Word.of([0, 1] * 500)
    result = extract_ktuplets_regular(word, eps, 2)
    assert result.length == 280
    assert result.total_length >= 1000 - 6 * eps * 1000
    assert_valid(word, result)


@pytest.mark.parametrize("k,ell,eps", [
    (2, 2, Fraction(1, 10)),
    (3, 2, Fraction(1, 10)),
    (4, 2, Fraction(1, 10)),
    (3, 3, Fraction(1, 10)),
    (4, 3, Fraction(1, 10)),
    (4, 4, Fraction(1, 12)),
])
@pytest.mark.parametrize("seed", range(3))
def test_ktuplets_on_random_regular_words(k, ell, eps, seed):
    word = random_word(10_000, ell, seed=seed)
    assert check_regular(word, eps)
    plan = thm2_plan(word, eps, k)
    assert all(member[-1].factor <= factor_count(eps) - 1 for member in plan.members)
    result = extract_ktuplets_regular(word, eps, k)
    assert_valid(word, result)
    assert result.total_length >= len(word) - 3 * ell * eps * len(word) - k * len(plan.shape())


def test_binary_four_tuplets_use_every_interior_factor():
    eps = Fraction(1, 10)
    word = random_word(10_000, 2, seed=0)
    plan = thm2_plan(word, eps, 4)
    assert [s.factor for s in plan.members[0] if s.size] == [2, 3, 6]
    assert [s.factor for s in plan.members[3] if s.size] == [5, 6, 9]
    assert extract_ktuplets_regular(word, eps, 4).total_length >= len(word) - 3 * 2 * eps * len(word)


def test_padded_cycle_can_miss_the_dense_letter():
    eps = Fraction(1, 10)
    word = Word.of([1] * 10_000, 2)
    result = extract_ktuplets_regular(word, eps, 4)
    assert_valid(word, result)
    assert result.total_length == 3600
    assert result.total_length < len(word) - 3 * 2 * eps * len(word)
    assert result.total_length >= len(word) - pipeline_slack("thm2", 4, 2) * eps * len(word)


def test_thm2_preconditions():
    with pytest.raises(WrongRegimeError):
        extract_ktuplets_regular(Word.of([0, 1, 2] * 100), Fraction(1, 20), 2)
    with pytest.raises(EpsilonTooLargeError):
        extract_ktuplets_regular(Word.of([0, 1] * 100), Fraction(1, 6), 3)
    with pytest.raises(NotRegularError):
        extract_ktuplets_regular(Word.of([0] * 500 + [1] * 500), Fraction(1, 10), 3)


def test_restrict_frequent_example():
    word = word_of("0123401234")
    filtered, back_map = restrict_frequent(word, 2)
    assert filtered.letters == (0, 1, 0, 1)
    assert back_map.indices == (1, 2, 6, 7)
    assert len(filtered) >= 2 * len(word) / word.ell


def test_restrict_frequent_orders_by_frequency():
    filtered, back_map = restrict_frequent(word_of("0000000123"), 2)
    assert filtered.letters == (0,) * 7 + (1,)
    assert back_map.indices == (1, 2, 3, 4, 5, 6, 7, 8)
    with pytest.raises(WrongRegimeError):
        restrict_frequent(word_of("0101"), 2)


def test_registry_knows_the_extractors():
    assert {"greedy", "claim1", "thm2"} <= set(registry.names())
    with pytest.raises(ParameterError):
        registry.execute("nope", word_of("0101"), Fraction(1, 10), 2)


def test_auto_epsilon_is_clamped():
    assert auto_epsilon(10) == Fraction(1, 4)
    assert auto_epsilon(3) == Fraction(1, 4)
    assert auto_epsilon(10 ** 6, c=0.001) == Fraction(1, 50)
    eps = auto_epsilon(10 ** 6, c=0.1, schedule=EpsilonSchedule.IMPROVED)
    assert Fraction(1, 50) <= eps <= Fraction(1, 4)


def test_pipeline_on_random_binary_word():
    eps = Fraction(1, 10)
    word = random_word(100_000, 2, seed=1)
    result, trace = pipeline(word, ExtractionParams(epsilon=eps))
    assert_valid(word, result)
    assert result.total_length >= (1 - 6 * eps) * len(word)
    assert result.meta["method"] == "claim1"
    assert result.total_length >= result.meta["guaranteed_total"] - 2 * 7 * result.meta["regular_factors"]


def test_pipeline_on_constant_word():
    word = Word.of([0] * 1000)
    result, trace = pipeline(word, ExtractionParams(epsilon=Fraction(1, 10)))
    assert_valid(word, result)
    assert result.total_length >= 400
    assert len(trace) == 0


def test_pipeline_restricts_large_alphabets():
    word = random_word(20_000, 3, seed=3)
    result, _ = pipeline(word, ExtractionParams(epsilon=Fraction(1, 10)))
    assert_valid(word, result)
    assert result.meta["restricted_length"] < len(word)
    assert result.common_word.ell == 3


def test_pipeline_triplets_over_a_binary_word():
    word = random_word(20_000, 2, seed=4)
    result, _ = pipeline(word, ExtractionParams(epsilon=Fraction(1, 10), k=3))
    assert result.k == 3
    assert result.meta["method"] == "thm2"
    assert_valid(word, result)


def test_pipeline_auto_epsilon_respects_the_extractor():
    word = random_word(5_000, 2, seed=5)
    result, _ = pipeline(word, ExtractionParams(epsilon=None, auto_epsilon=True))
    assert result.meta["epsilon"] <= Fraction(1, 5)
    assert_valid(word, result)


def test_pipeline_greedy_method():
    word = random_word(3_000, 2, seed=6)
    result, _ = pipeline(word, ExtractionParams(epsilon=Fraction(1, 10), method="greedy"))
    assert_valid(word, result)
    meta = result.meta
    assert result.length >= (meta["regular_mass"] - 2 * meta["regular_factors"]) // 3


def test_pipeline_word_too_short():
    with pytest.raises(EpsilonTooLargeError):
        pipeline(word_of("00110"), ExtractionParams(epsilon=Fraction(1, 10)))


def test_extraction_params_validation():
    with pytest.raises(ParameterError):
        ExtractionParams(epsilon=None)
    with pytest.raises(ParameterError):
        ExtractionParams(epsilon=Fraction(1, 10), k=1)
    with pytest.raises(ParameterError):
        ExtractionParams(epsilon=Fraction(3, 2))
