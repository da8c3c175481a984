import logging
import time
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from extraction import greedy_triples
from helpers.enums import Construction, ExactMode
from helpers.errors import ParameterError, SizeError
from models.table import ExactResult, TableEntry
from models.tuplet import TupletResult, Verification
from models.word import Support, Word
from word_core import extract

logger = logging.getLogger(__name__)

# The solver recurses once per position.
MAX_EXACT_LENGTH = 400

_NEVER = float("inf")


class BudgetExhausted(Exception):
    """Raised inside a search when its wall-clock deadline has passed."""


def verify_tuplet(word: Word, supports: Sequence) -> Verification:
    """
    Check that the supports are pairwise disjoint, equally long and spell the same word.

    On failure `pair` names the first offending pair of members (0-based) and
    `reason` says what is wrong with it.
    """
    supports = [s if isinstance(s, Support) else Support(tuple(s)) for s in supports]
    for s in supports:
        s.validate_for(len(word))
    if len(supports) < 2:
        return Verification(False, "at least two supports are required")
    for j in range(1, len(supports)):
        if len(supports[j]) != len(supports[0]):
            return Verification(False, f"lengths differ: {len(supports[0])} != {len(supports[j])}", (0, j))
    owner: Dict[int, int] = {}
    for j, s in enumerate(supports):
        for p in s.indices:
            if p in owner:
                return Verification(False, f"position {p} is used twice", (owner[p], j))
            owner[p] = j
    common = extract(word, supports[0])
    for j in range(1, len(supports)):
        other = extract(word, supports[j])
        if other != common:
            return Verification(False, f"extracted words differ: {common!s} != {other!s}", (0, j))
    return Verification(True, common_word=common)


def _tuplet(word: Word, supports: Sequence[Support], construction=Construction.EXACT) -> TupletResult:
    supports = tuple(supports)
    common = extract(word, supports[0]) if supports else Word((), word.alphabet)
    return TupletResult(k=len(supports), supports=supports, common_word=common, host_length=len(word),
                        construction=construction)


def quick_bounds(word: Word, k: int) -> Tuple[int, int, Tuple[Support, ...]]:
    """Bounds lo <= f(S,k) <= hi that need no search, with supports realising lo."""
    n = len(word)
    counts = word.counts
    hi = min(n // k, sum(c // k for c in counts))
    q = max(range(word.ell), key=lambda letter: (counts[letter], -letter))
    run = counts[q] // k
    occurrences = [i for i, c in enumerate(word.letters, start=1) if c == q]
    witness = tuple(Support(tuple(occurrences[j::k][:run])) for j in range(k))
    lo = run
    if word.ell == 2 and k == 2 and n // 3 > lo:
        greedy = greedy_triples(word)
        lo, witness = greedy.length, greedy.supports
    return lo, hi, witness


class TupletSearch:
    """
    Branch and bound over left-to-right assignments of positions to members.

    A state is the next position, the lead of each member over the shortest one
    and the pending letters the laggards still have to spell. States proven unable
    to gain `need` more letters are memoised, so one instance can answer several
    targets on the same word.
    """

    def __init__(self, word: Word, k: int, deadline: Optional[float] = None):
        if len(word) > MAX_EXACT_LENGTH:
            raise SizeError(f"Exact search is limited to words of length {MAX_EXACT_LENGTH}, got {len(word)}")
        self.letters = word.letters
        self.n = len(word)
        self.k = k
        self.deadline = deadline
        self.nodes = 0
        self._failed: Dict[tuple, int] = {}
        self._assign = [-1] * self.n

    def reach(self, target: int) -> Optional[Tuple[Support, ...]]:
        """k disjoint identical subwords of length `target`, or None when none exist."""
        if target <= 0:
            return tuple(Support(()) for _ in range(self.k))
        if not self._dfs(0, [0] * self.k, (), target):
            return None
        members: List[List[int]] = [[] for _ in range(self.k)]
        for p, member in enumerate(self._assign, start=1):
            if member >= 0:
                members[member].append(p)
        return tuple(Support(tuple(m[:target])) for m in members)

    def _dfs(self, p: int, lead: List[int], pending: tuple, need: int) -> bool:
        if need <= 0:
            for i in range(p, self.n):
                self._assign[i] = -1
            return True
        if sum(need - x for x in lead if x < need) > self.n - p:
            return False
        key = (p, tuple(sorted(lead)), pending)
        if self._failed.get(key, _NEVER) <= need:
            return False
        self.nodes += 1
        if self.deadline is not None and self.nodes & 0x3FF == 0 and time.monotonic() > self.deadline:
            raise BudgetExhausted()

        letter = self.letters[p]
        tried = set()
        for i in range(self.k):
            d = lead[i]
            if d in tried:
                continue
            tried.add(d)
            if d < len(pending):
                if pending[d] != letter:
                    continue
                extended = pending
            else:
                extended = pending + (letter,)
            lead[i] += 1
            low = min(lead)
            child = [x - low for x in lead]
            lead[i] -= 1
            self._assign[p] = i
            if self._dfs(p + 1, child, extended[low:], need - low):
                return True
        self._assign[p] = -1
        if self._dfs(p + 1, lead, pending, need):
            return True
        self._failed[key] = min(self._failed.get(key, _NEVER), need)
        return False


def f_exact(word: Word, k: int, budget: Optional[float] = None, deadline: Optional[float] = None,
            mode: ExactMode = ExactMode.EXACT, search: Optional[TupletSearch] = None,
            upper: Optional[int] = None) -> ExactResult:
    """
    f(S,k) by complete search, climbing from the quick lower bound.

    `upper` is a bound already known to the caller (for instance a failed
    `search.reach(upper + 1)`). When the budget runs out the result is the
    interval [best found, best upper bound] with the witness of the lower end.
    """
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    lo, hi, witness = quick_bounds(word, k)
    if upper is not None:
        hi = min(hi, upper)
    if ExactMode(mode) is ExactMode.LOWER_AND_UPPER or lo >= hi:
        return ExactResult(lo, max(lo, hi), _tuplet(word, witness), 0, complete=lo >= hi)
    if deadline is None and budget is not None:
        deadline = time.monotonic() + budget
    search = search or TupletSearch(word, k, deadline)
    search.deadline = deadline
    try:
        while lo < hi:
            found = search.reach(lo + 1)
            if found is None:
                hi = lo
                break
            lo, witness = lo + 1, found
    except BudgetExhausted:
        logger.warning("Budget exhausted on %s (k=%d): f in [%d, %d]", word, k, lo, hi)
        return ExactResult(lo, hi, _tuplet(word, witness), search.nodes, complete=False)
    return ExactResult(lo, lo, _tuplet(word, witness), search.nodes, complete=True)


def f_naive(word: Word, k: int) -> int:
    """f(S,k) by enumerating support k-tuples directly; only for short words."""
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    letters = word.letters
    for m in range(len(letters) // k, 0, -1):
        if _naive_exists(letters, k, m, frozenset(range(len(letters))), None, -1):
            return m
    return 0


def _naive_exists(letters, k, m, free, pattern, after) -> bool:
    if k == 0:
        return True
    for combo in combinations(sorted(free), m):
        # members ordered by first position
        if combo[0] <= after:
            continue
        spelled = tuple(letters[i] for i in combo)
        if pattern is not None and spelled != pattern:
            continue
        if _naive_exists(letters, k - 1, m, free.difference(combo), spelled, combo[0]):
            return True
    return False


def relabel_by_first_occurrence(letters: Sequence[int]) -> Tuple[int, ...]:
    mapping: Dict[int, int] = {}
    out = []
    for c in letters:
        if c not in mapping:
            mapping[c] = len(mapping)
        out.append(mapping[c])
    return tuple(out)


def canonical_form(letters: Sequence[int]) -> Tuple[int, ...]:
    """Smallest representative under letter renaming and reversal."""
    return min(relabel_by_first_occurrence(letters), relabel_by_first_occurrence(tuple(letters)[::-1]))


def is_canonical(letters: Sequence[int]) -> bool:
    return tuple(letters) == canonical_form(letters)


def iter_canonical_words(n: int, ell: int, prefix: Sequence[int] = ()) -> Iterator[Tuple[int, ...]]:
    """Canonical words of length n over ell letters that start with `prefix`, in lexicographic order."""
    prefix = tuple(prefix)
    if relabel_by_first_occurrence(prefix) != prefix or len(prefix) > n or (prefix and max(prefix) >= ell):
        return
    stack = [(prefix, max(prefix) if prefix else -1)]
    while stack:
        letters, top = stack.pop()
        if len(letters) == n:
            if is_canonical(letters):
                yield letters
            continue
        for c in range(min(top + 1, ell - 1), -1, -1):
            stack.append((letters + (c,), max(top, c)))


def canonical_prefixes(length: int, ell: int) -> List[Tuple[int, ...]]:
    """Every restricted-growth prefix of the given length (all of them, canonical or not)."""
    result = [()]
    for _ in range(length):
        result = [p + (c,) for p in result for c in range(min((max(p) if p else -1) + 1, ell - 1) + 1)]
    return result


def trivial_lower_bound(n: int, k: int, ell: int) -> int:
    """Some letter occurs at least ceil(n/ell) times; binary twins also get floor(n/3) from triples."""
    bound = (-(-n // ell)) // k
    if k == 2 and ell == 2:
        bound = max(bound, n // 3)
    return bound


def audit_table(entries: Sequence[TableEntry]) -> List[str]:
    """Superadditivity f(n) >= floor(n/m) f(m), monotonicity in n and f <= floor(n/k), interval-safe."""
    violations = []
    by_n = {e.n: e for e in entries}
    for e in entries:
        if e.lo > e.n // e.k:
            violations.append(f"f({e.n},{e.k},{e.ell}) >= {e.lo} exceeds floor(n/k)={e.n // e.k}")
        previous = by_n.get(e.n - 1)
        if previous is not None and e.hi < previous.lo:
            violations.append(f"f({e.n},{e.k},{e.ell}) <= {e.hi} < f({e.n - 1}) >= {previous.lo}")
        for m, smaller in by_n.items():
            if m < e.n and e.hi < (e.n // m) * smaller.lo:
                violations.append(f"f({e.n},{e.k},{e.ell}) <= {e.hi} < floor({e.n}/{m}) * {smaller.lo}")
    for v in violations:
        logger.warning("Table audit: %s", v)
    return violations


def compare_tables(smaller: Sequence[TableEntry], larger: Sequence[TableEntry], axis: str) -> List[str]:
    """f must not grow when ell or k grows: every larger-parameter cell stays at or below its partner."""
    if axis not in ("k", "ell"):
        raise ParameterError(f"axis must be 'k' or 'ell', got {axis!r}")
    partners = {e.n: e for e in smaller}
    violations = []
    for e in larger:
        other = partners.get(e.n)
        if other is not None and e.lo > other.hi:
            violations.append(f"n={e.n}: f with larger {axis} >= {e.lo} but smaller {axis} gives <= {other.hi}")
    return violations
