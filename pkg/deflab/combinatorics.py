"""
Exact combinatorial counts and the closed-form rates built from them.

All counting stays in Python integers and Fractions; floats appear only when a
probability or series value is handed back.
"""

import math
from fractions import Fraction
from typing import Optional, Union

from sympy import binomial as _binomial
from sympy import factorial, factorial2, ff
from sympy.functions.combinatorial.numbers import stirling

try:
    from .settings import QueryError
except ImportError:
    from settings import QueryError

Rate = Fraction

# Number of 3-element exceedance-3 types: S(9, 6).
TRIPLE_TYPES = 2646


def binomial(n: int, m: int) -> int:
    if n < 0 or m < 0:
        raise QueryError(f"binomial needs nonnegative arguments, got ({n}, {m})")
    return int(_binomial(n, m))


def stirling2(n: int, m: int) -> int:
    """S(n, m), partitions of n labelled items into m blocks; S(0, 0) = 1."""
    if n < 0 or m < 0:
        raise QueryError(f"Stirling numbers need nonnegative arguments, got ({n}, {m})")
    if m > n:
        return 0
    return int(stirling(n, m))


def falling(n: int, m: int) -> int:
    """[n]_m = n (n-1) ... (n-m+1)."""
    if m < 0:
        raise QueryError(f"falling factorial needs m >= 0, got {m}")
    if n < m:
        raise QueryError(f"falling factorial needs n >= m, got ({n}, {m})")
    return int(ff(n, m))


def multifactorial(n: int, step: int) -> int:
    """n (n-step) (n-2 step) ... down to the last positive factor; 1 for n = 0."""
    if step not in (1, 2, 3):
        raise QueryError(f"step must be 1, 2 or 3, got {step}")
    if n < 0:
        raise QueryError(f"multifactorial needs n >= 0, got {n}")
    if step == 1:
        return int(factorial(n))
    if step == 2:
        return int(factorial2(n))
    return math.prod(range(n, 0, -step))


def perfect_matching_count(k: int) -> int:
    """(2k-1)!!, the number of perfect matchings on 2k vertices."""
    if k < 0:
        raise QueryError(f"k must be nonnegative, got {k}")
    return multifactorial(2 * k - 1, 2) if k > 0 else 1


def disjoint_pair_class_count(k: int) -> int:
    """Equivalence classes of disjoint k-configurations: 7^k (2k-1)!! (when n >= 2k)."""
    return 7 ** k * perfect_matching_count(k)


def nondisjoint_class_bound(k: int) -> int:
    """Upper bound 7^k 2^(2k^2-k) on classes of all k-configurations."""
    if k < 1:
        raise QueryError(f"k must be positive, got {k}")
    return 7 ** k * 2 ** (2 * k * k - k)


def disjoint_triple_class_count(k: int) -> int:
    """Classes of disjoint k-configurations of exceedance-3 triples.

    D(0) = 1, D(k) = 2646 (3k-1)(3k-2)/2 D(k-1), whose closed form is
    2646^k (3k)! / ((3k)!!! 2^k). Writing (3(k-1))! in that closed form breaks
    agreement with the recurrence; only the (3k) index gives D(k)/(3k)! = 441^k/k!.
    """
    if k < 0:
        raise QueryError(f"k must be nonnegative, got {k}")
    count = 1
    for step in range(1, k + 1):
        count = count * TRIPLE_TYPES * (3 * step - 1) * (3 * step - 2) // 2
    return count


def disjoint_triple_closed_form(k: int) -> int:
    numerator = TRIPLE_TYPES ** k * int(factorial(3 * k))
    denominator = multifactorial(3 * k, 3) * 2 ** k
    return numerator // denominator


def type_count(s: int, max_exceedance: int, arity: int = 2) -> int:
    """Number of cell partitions with at most s + eps blocks (18002 for s = 3, eps = 2)."""
    cells = s ** arity
    return sum(stirling2(cells, i) for i in range(1, min(cells, s + max_exceedance) + 1))


def rate_dary(d: int) -> Rate:
    """S(2^d, 2) / 2 = (2^(2^d - 1) - 1) / 2."""
    if d < 2:
        raise QueryError(f"arity must be at least 2, got {d}")
    return Fraction(stirling2(2 ** d, 2), 2)


def rate_dary_is_conjectural(d: int) -> bool:
    # For d >= 3 the exact first moment C(n,2) P(pair) tends to 0.
    return d >= 3


def rate_exceedance(s: int) -> Rate:
    """S(s^2, s^2 - s) / s!, the rate for s-subsets with exceedance s^2 - 2s."""
    if s < 2:
        raise QueryError(f"subset size must be at least 2, got {s}")
    return Fraction(stirling2(s * s, s * s - s), int(factorial(s)))


def rate_exceedance_is_conjectural(s: int) -> bool:
    return s >= 4


def limit_probability(rate: Union[Rate, float, int]) -> float:
    """1 - exp(-lambda)."""
    if rate < 0:
        raise QueryError(f"rate must be nonnegative, got {rate}")
    return -math.expm1(-float(rate))


def partial_ie_sum(rate: Union[Rate, int], K: int) -> float:
    """sum_{k=1..K} (-1)^(k+1) lambda^k / k!, accumulated exactly."""
    if K < 1:
        raise QueryError(f"K must be at least 1, got {K}")
    return float(partial_ie_sum_exact(rate, K))


def partial_ie_sum_exact(rate: Union[Rate, int], K: int) -> Fraction:
    rate = Fraction(rate)
    total = Fraction(0)
    term = Fraction(1)
    for k in range(1, K + 1):
        term = term * rate / k
        total += term if k % 2 == 1 else -term
    return total


def expected_count(n: int, d: int = 2, s: int = 2, eps: int = 0) -> Rate:
    """Exact mean number of s-subsets with exceedance <= eps in a uniform random table.

    Each subset has s^d independent uniform cells; exactly i distinct values
    occur with probability S(s^d, i) [n]_i / n^(s^d).
    """
    if d < 2 or s < 2:
        raise QueryError(f"unsupported combination d={d}, s={s}")
    if n < s:
        raise QueryError(f"subset size {s} exceeds the order {n}")
    cells = s ** d
    top = min(cells, s + eps, n)
    favourable = sum(stirling2(cells, i) * falling(n, i) for i in range(1, top + 1))
    return Fraction(binomial(n, s) * favourable, n ** cells)


def expected_type_count(n: int, type_index: int) -> Rate:
    """Mean number of pairs of one type: C(n,2)/n^3 for T0, C(n,2)(n-1)/n^3 otherwise."""
    if not 0 <= type_index <= 7:
        raise QueryError(f"type index must be in 0..7, got {type_index}")
    if n < 2:
        raise QueryError(f"pairs need n >= 2, got {n}")
    per_pair = Fraction(1, n ** 3) if type_index == 0 else Fraction(n - 1, n ** 3)
    return binomial(n, 2) * per_pair


def limit_rate(d: int = 2, s: int = 2, eps: int = 0) -> Optional[Rate]:
    """n -> infinity limit of expected_count(n, d, s, eps); None when it diverges.

    The top term n^s/s! S(s^d, s+eps) n^(s+eps) / n^(s^d) survives only when
    eps = s^d - 2s; smaller eps vanishes, larger diverges.
    """
    if d < 2 or s < 2:
        raise QueryError(f"unsupported combination d={d}, s={s}")
    cells = s ** d
    top = min(cells, s + eps)
    if top < 1:
        return Fraction(0)
    balance = s + top - cells
    if balance < 0:
        return Fraction(0)
    if balance > 0:
        return None
    return Fraction(stirling2(cells, top), int(factorial(s)))


def exceedance_vanishing_bound(n: int, s: int = 3, eps: int = 2) -> Rate:
    """Union bound (sum_{i<=s+eps} S(s^2, i)) [n]_{s+eps} C(n, s) / n^(s^2)."""
    if n < s + eps:
        raise QueryError(f"bound needs n >= s + eps, got n={n}, s + eps={s + eps}")
    return Fraction(type_count(s, eps) * falling(n, s + eps) * binomial(n, s), n ** (s * s))
