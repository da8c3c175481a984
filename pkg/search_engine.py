# search_engine.py
import logging
import os
import time
from multiprocessing import Pool, Value
from typing import Iterable, List, Optional, Sequence

from exact import (BudgetExhausted, TupletSearch, audit_table, canonical_prefixes, f_exact, f_naive,
                   iter_canonical_words, quick_bounds, trivial_lower_bound)
from helpers.errors import ParameterError
from models.shard import ShardResult, ShardTask
from models.table import TableEntry
from models.word import Alphabet, Word

logger = logging.getLogger(__name__)

# Shards per worker; more shards even out the cost of the prefix classes.
SHARDS_PER_JOB = 4

# Monotone best-so-far shared by the workers, set by the pool initializer.
_shared_best = None


def _init_worker(best):
    global _shared_best
    _shared_best = best


def _read_best(default: int) -> int:
    if _shared_best is None:
        return default
    # A stale value only weakens pruning.
    return min(default, _shared_best.value)


def _offer_best(value: int) -> None:
    if _shared_best is None:
        return
    with _shared_best.get_lock():
        if value < _shared_best.value:
            _shared_best.value = value


def process_shard(task: ShardTask) -> ShardResult:
    """Minimum of f over the canonical words starting with task.prefix."""
    started = time.monotonic()
    result = ShardResult(index=task.index)
    alphabet = Alphabet(task.ell)
    ceiling = task.n // task.k

    for letters in iter_canonical_words(task.n, task.ell, task.prefix):
        if task.deadline is not None and time.monotonic() > task.deadline:
            result.complete = False
            break
        word = Word(letters, alphabet)
        threshold = _read_best(ceiling if result.best is None else min(ceiling, result.best))
        try:
            if task.oracle:
                value = f_naive(word, task.k)
            else:
                _, hi, _ = quick_bounds(word, task.k)
                search = TupletSearch(word, task.k, task.deadline)
                if hi > threshold and search.reach(threshold + 1) is not None:
                    result.words_searched += 1
                    continue
                exact = f_exact(word, task.k, deadline=task.deadline, search=search, upper=threshold)
                if not exact.complete:
                    result.complete = False
                    break
                value = exact.lo
        except BudgetExhausted:
            result.complete = False
            break
        result.words_searched += 1
        # Words come in lexicographic order: the first word at a value is the smallest.
        if result.best is None or value < result.best:
            result.best = value
            result.witness_letters = letters
        _offer_best(value)

    result.elapsed = time.monotonic() - started
    logger.debug("Shard %d prefix=%s: best=%s words=%d complete=%s", task.index, task.prefix,
                 result.best, result.words_searched, result.complete)
    return result


def run_shards(tasks: Sequence[ShardTask], jobs: int, initial_best: int) -> List[ShardResult]:
    """Run the shards on a process pool; results come back ordered by shard index."""
    best = Value("i", initial_best)
    if jobs <= 1 or len(tasks) <= 1:
        _init_worker(best)
        try:
            results = [process_shard(t) for t in tasks]
        finally:
            _init_worker(None)
    else:
        with Pool(processes=jobs, initializer=_init_worker, initargs=(best,)) as pool:
            results = list(pool.imap_unordered(process_shard, tasks))
    return sorted(results, key=lambda r: r.index)


def resolve_jobs(jobs: Optional[int]) -> int:
    if not jobs:
        return os.cpu_count() or 1
    if jobs < 0:
        raise ParameterError(f"jobs must be >= 0, got {jobs}")
    return jobs


def _prefix_length(n: int, ell: int, jobs: int) -> int:
    length = 1
    while length < n and len(canonical_prefixes(length, ell)) < SHARDS_PER_JOB * jobs:
        length += 1
    return min(length, n)


def f_min_over_words(n: int, k: int, ell: int, budget: Optional[float] = None, jobs: int = 1,
                     oracle: bool = False) -> TableEntry:
    """
    f(n,k,ell) as the minimum of f(S,k) over canonical words of length n.

    Words are sharded by prefix and searched in parallel; the minimum is reduced
    by (value, lexicographic witness), so the entry does not depend on `jobs`.
    An exhausted budget yields the interval [provable lower bound, best found].
    """
    if n < 1 or k < 2 or ell < 2:
        raise ParameterError(f"Need n >= 1, k >= 2, ell >= 2; got n={n}, k={k}, ell={ell}")
    jobs = resolve_jobs(jobs)
    started = time.monotonic()
    deadline = started + budget if budget is not None else None
    prefixes = canonical_prefixes(_prefix_length(n, ell, jobs), ell)
    tasks = [ShardTask(i, n, k, ell, p, deadline, oracle) for i, p in enumerate(prefixes)]
    results = run_shards(tasks, jobs, n // k)

    searched = [r for r in results if r.best is not None]
    complete = all(r.complete for r in results)
    words = sum(r.words_searched for r in results)
    entry = TableEntry(n=n, k=k, ell=ell, lo=trivial_lower_bound(n, k, ell), hi=n // k,
                       words_searched=words, complete=complete,
                       provenance="naive enumeration" if oracle else "exhaustive search")
    if searched:
        winner = min(searched, key=ShardResult.key)
        witness_word = Word(winner.witness_letters, Alphabet(ell))
        entry.hi = winner.best
        entry.witness_word = witness_word
        entry.witness = f_exact(witness_word, k).witness
    if complete:
        entry.lo = entry.hi
    else:
        entry.lo = min(entry.lo, entry.hi)
        entry.provenance = f"interrupted {entry.provenance} (budget {budget}s): upper bound from searched words"
        logger.warning("f(%d,%d,%d) interrupted after %d words: [%d, %d]", n, k, ell, words, entry.lo, entry.hi)
    entry.elapsed_ms = int((time.monotonic() - started) * 1000)
    logger.info("f(%d,%d,%d) in [%d, %d] (%d words, %d ms)", n, k, ell, entry.lo, entry.hi, words, entry.elapsed_ms)
    return entry


def tighten(entry: TableEntry, previous: Iterable[TableEntry]) -> TableEntry:
    """Raise the lower end of an interval with monotonicity in n and superadditivity."""
    if entry.exact:
        return entry
    for other in previous:
        if other.n < entry.n:
            entry.lo = max(entry.lo, (entry.n // other.n) * other.lo, other.lo)
    entry.lo = min(entry.lo, entry.hi)
    return entry


def generate_table(n_values: Iterable[int], k: int, ell: int, jobs: int = 1,
                   budget: Optional[float] = None, oracle: bool = False) -> List[TableEntry]:
    """One entry per n, audited for superadditivity and monotonicity when complete."""
    entries: List[TableEntry] = []
    for n in sorted(set(n_values)):
        entry = f_min_over_words(n, k, ell, budget=budget, jobs=jobs, oracle=oracle)
        entries.append(tighten(entry, entries))
    for violation in audit_table(entries):
        for e in entries:
            if f"f({e.n},{e.k},{e.ell})" in violation:
                e.notes.append(violation)
    return entries
