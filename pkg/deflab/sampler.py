"""
Counter-based randomness and the compiled scan kernels.

The value of cell c in sample i under seed S is a pure function of (S, i, c):

    key   = mix64(mix64(S) ^ i)
    x     = mix64(key ^ c)
    while x < 2^64 mod n:  x = mix64(x)
    value = x mod n

where mix64 is the SplitMix64 finalizer. Rejecting the low 2^64 mod n words
removes modulo bias. Because no state is carried between cells, scan order,
early exit and the number of worker threads never change a table.
"""

import logging
from typing import Tuple

import numpy as np
from numba import njit, prange

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)

# (ij != ii) (ji != ii) (jj != ii) as a 3-bit code -> type index
_CODE_TO_TYPE = np.array([0, 4, 3, 5, 2, 6, 7, 1], dtype=np.int64)


def mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def sample_key(seed: int, sample_index: int) -> int:
    return mix64(mix64(seed) ^ sample_index)


def rejection_threshold(n: int) -> int:
    return ((1 << 64) - n) % n


def keyed_value(key: int, n: int, cell: int) -> int:
    """Reference implementation of one cell draw."""
    threshold = rejection_threshold(n)
    x = mix64(key ^ cell)
    while x < threshold:
        x = mix64(x)
    return x % n


def powers_for(n: int, d: int) -> np.ndarray:
    """Place values n^(d-1-k) of the row-major cell index."""
    powers = np.empty(d, dtype=np.int64)
    value = 1
    for k in range(d - 1, -1, -1):
        powers[k] = value
        value *= n
    return powers


@njit(cache=True)
def _mix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _C1
    z = (z ^ (z >> _S27)) * _C2
    return z ^ (z >> _S31)


@njit(cache=True)
def _cell_value(key, cell, nn, threshold):
    x = _mix64(key ^ np.uint64(cell))
    while x < threshold:
        x = _mix64(x)
    return np.int64(x % nn)


@njit(cache=True)
def _cell_at(table, key, cell, nn, threshold):
    if table.shape[0] > 0:
        return table[cell]
    return _cell_value(key, cell, nn, threshold)


@njit(cache=True)
def _extend(table, key, d, level, chosen, images, sizes, digits, max_image, nn, threshold, powers):
    # images[level] = images[level - 1] plus every cell that uses chosen[level]
    size = 0
    if level > 0:
        size = sizes[level - 1]
        for t in range(size):
            images[level, t] = images[level - 1, t]
    m = level + 1
    total = 1
    for _ in range(d):
        total *= m
    for code in range(total):
        rem = code
        uses_last = False
        for k in range(d - 1, -1, -1):
            digits[k] = rem % m
            rem //= m
            if digits[k] == level:
                uses_last = True
        if not uses_last:
            continue
        flat = 0
        for k in range(d):
            flat += chosen[digits[k]] * powers[k]
        value = _cell_at(table, key, flat, nn, threshold)
        seen = False
        for t in range(size):
            if images[level, t] == value:
                seen = True
                break
        if seen:
            continue
        if size == max_image:
            return False
        images[level, size] = value
        size += 1
    sizes[level] = size
    return True


@njit(cache=True)
def _scan(table, key, n, d, s, max_image, nn, threshold, powers, first_only):
    """Count s-subsets with |f(X,..,X)| <= max_image, lexicographically.

    A prefix Y is abandoned once |f(Y,..,Y)| > max_image, since f(Y,..,Y) is
    contained in the image of every extension.
    """
    chosen = np.empty(s, dtype=np.int64)
    images = np.empty((s, max(max_image, 1)), dtype=np.int64)
    sizes = np.zeros(s, dtype=np.int64)
    digits = np.empty(d, dtype=np.int64)
    count = 0
    level = 0
    chosen[0] = -1
    while level >= 0:
        chosen[level] += 1
        if chosen[level] > n - s + level:
            level -= 1
            continue
        if not _extend(table, key, d, level, chosen, images, sizes, digits, max_image, nn, threshold, powers):
            continue
        if level == s - 1:
            count += 1
            if first_only:
                return count
            continue
        level += 1
        chosen[level] = chosen[level - 1]
    return count


@njit(cache=True)
def _pattern_code(a, b, c, d):
    """Type index 0..7 of the block (ii, ij, ji, jj), or -1 for three or more values."""
    other = a
    if b != a:
        other = b
    elif c != a:
        other = c
    elif d != a:
        other = d
    if (b != a and b != other) or (c != a and c != other) or (d != a and d != other):
        return -1
    code = 0
    if b != a:
        code += 4
    if c != a:
        code += 2
    if d != a:
        code += 1
    return _CODE_TO_TYPE[code]


@njit(cache=True)
def _pair_type_counts(table, key, n, nn, threshold, counts):
    diagonal = np.empty(n, dtype=np.int64)
    for i in range(n):
        diagonal[i] = _cell_at(table, key, i * n + i, nn, threshold)
    for i in range(n):
        ii = diagonal[i]
        for j in range(i + 1, n):
            jj = diagonal[j]
            ij = _cell_at(table, key, i * n + j, nn, threshold)
            if ii != jj and ij != ii and ij != jj:
                continue
            ji = _cell_at(table, key, j * n + i, nn, threshold)
            t = _pattern_code(ii, ij, ji, jj)
            if t >= 0:
                counts[t] += 1


@njit(cache=True)
def _fill_table(key, cells, nn, threshold):
    table = np.empty(cells, dtype=np.int64)
    for c in range(cells):
        table[c] = _cell_value(key, c, nn, threshold)
    return table


@njit(parallel=True, cache=True)
def _indicator_batch(seed, start, count, n, d, s, max_image, nn, threshold, powers):
    base = _mix64(seed)
    empty = np.empty(0, dtype=np.int64)
    hits = 0
    for i in prange(count):
        key = _mix64(base ^ np.uint64(start + i))
        hits += _scan(empty, key, n, d, s, max_image, nn, threshold, powers, True)
    return hits


@njit(parallel=True, cache=True)
def _count_batch(seed, start, count, n, d, s, max_image, nn, threshold, powers):
    base = _mix64(seed)
    empty = np.empty(0, dtype=np.int64)
    out = np.zeros(count, dtype=np.int64)
    for i in prange(count):
        key = _mix64(base ^ np.uint64(start + i))
        out[i] = _scan(empty, key, n, d, s, max_image, nn, threshold, powers, False)
    return out


@njit(parallel=True, cache=True)
def _type_count_batch(seed, start, count, n, nn, threshold):
    base = _mix64(seed)
    empty = np.empty(0, dtype=np.int64)
    out = np.zeros((count, 8), dtype=np.int64)
    for i in prange(count):
        key = _mix64(base ^ np.uint64(start + i))
        _pair_type_counts(empty, key, n, nn, threshold, out[i])
    return out


@njit(parallel=True, cache=True)
def _exhaustive_batch(n, d, s, max_image, powers, start, count):
    cells = 1
    for _ in range(d):
        cells *= n
    nn = np.uint64(n)
    zero = np.uint64(0)
    hits = 0
    subsets = 0
    for i in prange(count):
        table = np.empty(cells, dtype=np.int64)
        rem = start + i
        for c in range(cells - 1, -1, -1):
            table[c] = rem % n
            rem //= n
        found = _scan(table, zero, n, d, s, max_image, nn, zero, powers, False)
        subsets += found
        if found > 0:
            hits += 1
    return hits, subsets


def batch_hits(n: int, d: int, subset_size: int, max_image: int, seed: int, start: int, count: int) -> int:
    """Samples start..start+count-1 holding at least one qualifying subset."""
    if count <= 0 or max_image < 1:
        return 0
    return int(_indicator_batch(np.uint64(seed), start, count, n, d, subset_size, max_image,
                                np.uint64(n), np.uint64(rejection_threshold(n)), powers_for(n, d)))


def batch_counts(n: int, d: int, subset_size: int, max_image: int, seed: int, start: int, count: int) -> np.ndarray:
    """Number of qualifying subsets in each sample."""
    if count <= 0 or max_image < 1:
        return np.zeros(max(count, 0), dtype=np.int64)
    return _count_batch(np.uint64(seed), start, count, n, d, subset_size, max_image,
                        np.uint64(n), np.uint64(rejection_threshold(n)), powers_for(n, d))


def batch_type_counts(n: int, seed: int, start: int, count: int) -> np.ndarray:
    """Per-sample counts of pairs of each type T0..T7 in binary tables, shape (count, 8)."""
    if count <= 0:
        return np.zeros((0, 8), dtype=np.int64)
    return _type_count_batch(np.uint64(seed), start, count, n, np.uint64(n), np.uint64(rejection_threshold(n)))


def exhaustive_counts(n: int, d: int, subset_size: int, max_image: int, start: int, count: int) -> Tuple[int, int]:
    """(tables with a qualifying subset, total qualifying subsets) over table indices start..start+count-1.

    Table index t encodes cells in base n with the last cell least significant.
    """
    if count <= 0 or max_image < 1:
        return 0, 0
    hits, subsets = _exhaustive_batch(n, d, subset_size, max_image, powers_for(n, d), start, count)
    return int(hits), int(subsets)


def sample_table(n: int, d: int, key: int) -> np.ndarray:
    """Every cell of the table keyed by key, row-major."""
    return _fill_table(np.uint64(key), n ** d, np.uint64(n), np.uint64(rejection_threshold(n)))


def pattern_type(values) -> int:
    a, b, c, d = (int(v) for v in values)
    return int(_pattern_code(a, b, c, d))
