import logging
import math
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, special

from helpers.errors import InfeasibleError, ParameterError, SizeError
from models.alpha import AlphaSolution, BlockWordSpec, BoundCertificate
from models.word import Alphabet, Word

logger = logging.getLogger(__name__)

MAX_BLOCK_LENGTH = 10 ** 7
# Up to this n existence_bound compares the expectation with 1 in integers.
EXACT_BOUND_LIMIT = 2000
DEFAULT_GRID_POINTS = 100_000


def block_word(levels: int) -> Word:
    """S_K ... S_0 with |S_i| = 3^i, 1-blocks at even i and 0-blocks at odd i."""
    if levels < 0:
        raise ParameterError(f"levels must be >= 0, got {levels}")
    spec = BlockWordSpec(levels)
    if spec.length > MAX_BLOCK_LENGTH:
        raise SizeError(f"Block word with {levels} levels has length {spec.length} > {MAX_BLOCK_LENGTH}")
    letters = []
    for i in range(levels, -1, -1):
        letters.extend([1 if i % 2 == 0 else 0] * 3 ** i)
    return Word(tuple(letters), Alphabet(2))


def block_word_bound(levels: int) -> Tuple[int, float]:
    """
    (n, n - ln n) for the block word with `levels` levels: twice f(S,2) stays below the second value.

    Natural log: with log2 the bound already fails at levels=2, where f(S,2) = 5 and n = 13.
    """
    n = BlockWordSpec(levels).length
    return n, n - math.log(n)


def random_word(n: int, ell: int, seed: Optional[int] = None) -> Word:
    """Uniform i.i.d. letters from numpy's PCG64 generator (numpy.random.default_rng)."""
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    if ell < 1:
        raise ParameterError(f"ell must be >= 1, got {ell}")
    rng = np.random.default_rng(seed)
    return Word(tuple(rng.integers(0, ell, size=n).tolist()), Alphabet(ell))


def _exact_ratio(n: int, m: int, k: int, ell: int, with_symmetry: bool) -> Fraction:
    numerator = 1
    for i in range(k):
        numerator *= math.comb(n - i * m, m)
    denominator = ell ** ((k - 1) * m)
    if with_symmetry:
        denominator *= math.factorial(k)
    return Fraction(numerator, denominator)


def expected_count(n: int, m: int, k: int, ell: int, exact: bool = False,
                   with_symmetry: bool = False) -> float:
    """
    Natural log of ell^((1-k)m) * prod_{i<k} C(n - i m, m).

    This bounds the expected number of k-tuplets of length m in a uniform random
    word. `with_symmetry` divides by k! (unordered k-sets); `exact` evaluates the
    product in integers before taking the log.
    """
    if k < 1 or ell < 1 or m < 0 or n < 0:
        raise ParameterError(f"Invalid arguments n={n}, m={m}, k={k}, ell={ell}")
    if k * m > n:
        raise InfeasibleError(f"k*m = {k * m} exceeds n = {n}")
    if exact:
        ratio = _exact_ratio(n, m, k, ell, with_symmetry)
        return math.log(ratio.numerator) - math.log(ratio.denominator)
    remaining = n - np.arange(k) * m
    log_binom = special.gammaln(remaining + 1) - special.gammaln(m + 1) - special.gammaln(remaining - m + 1)
    value = float(np.sum(log_binom)) + (1 - k) * m * math.log(ell)
    if with_symmetry:
        value -= float(special.gammaln(k + 1))
    return value


def existence_bound(n: int, k: int, ell: int, exact: Optional[bool] = None,
                    with_symmetry: bool = False) -> BoundCertificate:
    """
    Smallest m* whose expected count is below 1, so that f(n,k,ell) <= m* - 1.

    If no m <= floor(n/k) qualifies the certificate carries the sentinel
    m* = floor(n/k) + 1, i.e. no bound beyond the trivial one.
    """
    if k < 2 or ell < 1:
        raise ParameterError(f"Need k >= 2 and ell >= 1, got k={k}, ell={ell}")
    if n < k:
        raise ParameterError(f"Need n >= k, got n={n}, k={k}")
    if exact is None:
        exact = n <= EXACT_BOUND_LIMIT

    def below_one(m: int) -> bool:
        if exact:
            return _exact_ratio(n, m, k, ell, with_symmetry) < 1
        return expected_count(n, m, k, ell, with_symmetry=with_symmetry) < 0

    for m in range(1, n // k + 1):
        if below_one(m):
            cert = BoundCertificate(
                n=n, k=k, ell=ell, m_star=m,
                log_expectation_below=expected_count(n, m - 1, k, ell, exact, with_symmetry),
                log_expectation_at=expected_count(n, m, k, ell, exact, with_symmetry),
                sentinel=False, exact_arithmetic=exact)
            logger.info("Existence bound: f(%d,%d,%d) <= %d", n, k, ell, cert.upper_bound)
            return cert
    top = n // k
    logger.info("Existence bound: no m <= %d has expectation below 1 for (n,k,ell)=(%d,%d,%d)", top, n, k, ell)
    return BoundCertificate(n=n, k=k, ell=ell, m_star=top + 1,
                            log_expectation_below=expected_count(n, top, k, ell, exact, with_symmetry),
                            log_expectation_at=None, sentinel=True, exact_arithmetic=exact)


def alpha_h(alpha, k: int, ell: int):
    """h(a) = -(k-1) a ln ell - k a ln a + (k a - 1) ln(1 - k a), elementwise on (0, 1/k)."""
    alpha = np.asarray(alpha, dtype=float)
    return -(k - 1) * alpha * np.log(ell) - k * alpha * np.log(alpha) + (k * alpha - 1) * np.log1p(-k * alpha)


def alpha_root(k: int, ell: int, tol: float = 1e-9, grid_points: int = DEFAULT_GRID_POINTS) -> AlphaSolution:
    """
    Smallest root of h on (0, 1/k), found by a grid scan for the first sign change and bisection.

    h tends to 0 from above at 0+, so `exists` is False when h stays positive on
    the whole grid; alpha is then 0.
    """
    if k < 2 or ell < 2:
        raise ParameterError(f"Need k >= 2 and ell >= 2, got k={k}, ell={ell}")
    if not tol > 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    if grid_points < 2:
        raise ParameterError(f"grid_points must be >= 2, got {grid_points}")

    grid = np.arange(1, grid_points + 1) / ((grid_points + 1) * k)
    values = alpha_h(grid, k, ell)
    crossings = np.flatnonzero(values <= 0)
    if crossings.size == 0:
        logger.info("h > 0 on (0, 1/%d) for ell=%d: no root", k, ell)
        return AlphaSolution(k=k, ell=ell, alpha=0.0, residual=0.0, exists=False)

    i = int(crossings[0])
    if i == 0 or values[i] == 0:
        root = float(grid[i])
        bracket = (float(grid[i - 1]) if i else 0.0, root)
    else:
        lo, hi = float(grid[i - 1]), float(grid[i])
        root = optimize.bisect(lambda a: float(alpha_h(a, k, ell)), lo, hi, xtol=max(tol * 1e-3, 1e-15))
        bracket = (lo, hi)
    residual = float(alpha_h(root, k, ell))
    logger.info("alpha(k=%d, ell=%d) = %.12f, h = %.3e", k, ell, root, residual)
    return AlphaSolution(k=k, ell=ell, alpha=root, residual=residual, exists=True, bracket=bracket)
