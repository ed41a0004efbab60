"""
Monte Carlo and exhaustive estimates for random operation tables.

Sample i under seed S is the uniform random table whose cells are drawn by
deflab.sampler from (S, i, cell). Batches run in compiled kernels, chunked by
MC_CHUNK samples; results are exact integer sums, so they do not depend on the
thread count.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence

import numpy as np

try:
    from . import sampler
    from .combinatorics import (expected_count, expected_type_count, limit_probability, limit_rate,
                                rate_exceedance_is_conjectural)
    from .core import all_tables, deficient_subsets, has_qualifying_subset
    from .models import (CountEstimate, CountHistogram, DeficiencyType, EstimateRecord, ExactResult,
                         IndependenceReport, OperationTable, SamplerKey, SubsetQuery, SweepRow)
    from .settings import (EXHAUSTIVE_TABLE_LIMIT, INDEX_LIMIT, MC_CHUNK, PYTHON_EXHAUSTIVE_LIMIT,
                           GuardExceededError, QueryError)
except ImportError:
    import sampler
    from combinatorics import (expected_count, expected_type_count, limit_probability, limit_rate,
                               rate_exceedance_is_conjectural)
    from core import all_tables, deficient_subsets, has_qualifying_subset
    from models import (CountEstimate, CountHistogram, DeficiencyType, EstimateRecord, ExactResult,
                        IndependenceReport, OperationTable, SamplerKey, SubsetQuery, SweepRow)
    from settings import (EXHAUSTIVE_TABLE_LIMIT, INDEX_LIMIT, MC_CHUNK, PYTHON_EXHAUSTIVE_LIMIT,
                          GuardExceededError, QueryError)

logger = logging.getLogger(__name__)

EXHAUSTIVE_CHUNK = 1 << 22


def _check_order(n: int, d: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise QueryError(f"order must be a positive integer, got {n!r}")
    if not isinstance(d, int) or d < 2:
        raise QueryError(f"arity must be an integer >= 2, got {d!r}")
    if n ** d >= INDEX_LIMIT:
        raise QueryError(f"table of order {n} and arity {d} is too large to index")


def _check_samples(samples: int) -> None:
    if not isinstance(samples, int) or samples < 1:
        raise QueryError(f"samples must be a positive integer, got {samples!r}")


def _check_seed(seed: int) -> None:
    if not isinstance(seed, int) or not 0 <= seed <= sampler.MASK64:
        raise QueryError(f"seed must be an unsigned 64-bit integer, got {seed!r}")


def _chunks(samples: int) -> Iterable[range]:
    for start in range(0, samples, MC_CHUNK):
        yield range(start, min(start + MC_CHUNK, samples))


def _type_counts(n: int, samples: int, seed: int) -> np.ndarray:
    """(samples, 8) matrix of per-type pair counts."""
    parts = []
    for chunk in _chunks(samples):
        parts.append(sampler.batch_type_counts(n, seed, chunk.start, len(chunk)))
        logger.debug(f"n={n}: typed {chunk.stop}/{samples} samples")
    return np.concatenate(parts, axis=0)


def cell_value(key: SamplerKey, n: int, coords: Sequence[int]) -> int:
    """Value in [0, n) of one cell of the sample table addressed by key."""
    flat = 0
    for c in coords:
        if not isinstance(c, int) or not 0 <= c < n:
            raise QueryError(f"coordinate {c!r} outside [0, {n})")
        flat = flat * n + c
    return sampler.keyed_value(sampler.sample_key(key.seed, key.sample_index), n, flat)


def sample_table(n: int, key: SamplerKey, d: int = 2) -> OperationTable:
    """Materialize the whole sample table."""
    _check_order(n, d)
    word = sampler.sample_key(key.seed, key.sample_index)
    entries = sampler.sample_table(n, d, word).tolist()
    return OperationTable(order=n, arity=d, entries=tuple(entries))


def sample_indicator(n: int, query: SubsetQuery, key: SamplerKey, d: int = 2) -> bool:
    """Whether sample `key` holds a qualifying subset; cells are drawn only when needed."""
    _check_order(n, d)
    query.check(n, d)
    word = sampler.sample_key(key.seed, key.sample_index)
    max_image = query.max_image(n, d)
    drawn: Dict[int, int] = {}

    def cell(coords) -> int:
        flat = 0
        for c in coords:
            flat = flat * n + c
        if flat not in drawn:
            drawn[flat] = sampler.keyed_value(word, n, flat)
        return drawn[flat]

    if query.subset_size == 2 and d == 2:
        diagonal = [cell((i, i)) for i in range(n)]
        for i, j in itertools.combinations(range(n), 2):
            ii, jj = diagonal[i], diagonal[j]
            ij = cell((i, j))
            if ii != jj and ij not in (ii, jj) and max_image < 3:
                continue
            block = (ii, ij, cell((j, i)), jj)
            if len(set(block)) > max_image:
                continue
            if query.type_filter is None:
                return True
            if sampler.pattern_type(block) == query.type_filter.index:
                return True
        return False

    for subset in itertools.combinations(range(n), query.subset_size):
        values = set()
        for coords in itertools.product(subset, repeat=d):
            values.add(cell(coords))
            if len(values) > max_image:
                break
        else:
            return True
    return False


def eager_indicator(n: int, query: SubsetQuery, key: SamplerKey, d: int = 2) -> bool:
    """Same event as sample_indicator, evaluated on the fully materialized table."""
    return has_qualifying_subset(sample_table(n, key, d), query)


def mc_probability(n: int, query: SubsetQuery, samples: int, seed: int, d: int = 2) -> EstimateRecord:
    _check_order(n, d)
    _check_samples(samples)
    _check_seed(seed)
    query.check(n, d)
    hits = 0
    if query.type_filter is not None:
        if query.type_reachable(n):
            counts = _type_counts(n, samples, seed)
            hits = int(np.count_nonzero(counts[:, query.type_filter.index]))
    else:
        max_image = query.max_image(n, d)
        for chunk in _chunks(samples):
            hits += sampler.batch_hits(n, d, query.subset_size, max_image, seed, chunk.start, len(chunk))
            logger.debug(f"n={n}: {hits} hits after {chunk.stop}/{samples} samples")
    record = EstimateRecord(n=n, d=d, query=query, samples=samples, seed=seed, hits=hits)
    logger.info(f"n={n} d={d} s={query.subset_size} eps={query.max_exceedance}: "
                f"p_hat={record.p_hat:.6f} +/- {record.stderr:.6f}")
    return record


def mc_mean_count(n: int, query: SubsetQuery, samples: int, seed: int, d: int = 2) -> CountEstimate:
    """Sample mean of the number of qualifying subsets."""
    _check_order(n, d)
    _check_samples(samples)
    _check_seed(seed)
    query.check(n, d)
    if query.type_filter is not None and not query.type_reachable(n):
        per_sample = np.zeros(samples, dtype=np.int64)
    elif query.type_filter is not None:
        per_sample = _type_counts(n, samples, seed)[:, query.type_filter.index]
    else:
        max_image = query.max_image(n, d)
        per_sample = np.concatenate([
            sampler.batch_counts(n, d, query.subset_size, max_image, seed, chunk.start, len(chunk))
            for chunk in _chunks(samples)
        ])
    total = int(per_sample.sum())
    total_squares = int((per_sample * per_sample).sum())
    return CountEstimate(n=n, d=d, query=query, samples=samples, seed=seed,
                         total=total, total_squares=total_squares)


def exact_probability(n: int, query: SubsetQuery, d: int = 2, force: bool = False) -> ExactResult:
    """Census over all n^(n^d) tables."""
    _check_order(n, d)
    query.check(n, d)
    total = n ** (n ** d)
    if total >= INDEX_LIMIT:
        raise GuardExceededError(f"{n}^({n}^{d}) tables cannot be enumerated")
    if total >= EXHAUSTIVE_TABLE_LIMIT and not force:
        raise GuardExceededError(f"{total} tables exceed the exhaustive limit {EXHAUSTIVE_TABLE_LIMIT}; pass force to run anyway")

    qualifying = 0
    subset_total = 0
    if total <= PYTHON_EXHAUSTIVE_LIMIT:
        for table in all_tables(n, d):
            found = len(deficient_subsets(table, query))
            subset_total += found
            if found:
                qualifying += 1
    else:
        if query.type_filter is not None:
            raise QueryError("type filters are only supported for censuses of at most "
                             f"{PYTHON_EXHAUSTIVE_LIMIT} tables")
        max_image = query.max_image(n, d)
        for start in range(0, total, EXHAUSTIVE_CHUNK):
            count = min(EXHAUSTIVE_CHUNK, total - start)
            hits, subsets = sampler.exhaustive_counts(n, d, query.subset_size, max_image, start, count)
            qualifying += hits
            subset_total += subsets
            logger.info(f"census n={n}: {start + count}/{total} tables")
    result = ExactResult(n=n, d=d, query=query, total_tables=total,
                         qualifying_tables=qualifying, subset_total=subset_total)
    logger.info(f"n={n} d={d}: p={result.probability}, mean count={result.mean_count}")
    return result


def _counted_types(include_t0: bool) -> List[DeficiencyType]:
    return list(DeficiencyType) if include_t0 else DeficiencyType.nonconstant()


def poisson_tv_distance(counts: Dict[int, int], samples: int, rate: float) -> float:
    """Total-variation distance between an empirical count law and Poisson(rate)."""
    top = max(counts) if counts else 0
    pmf = math.exp(-rate)
    covered = 0.0
    gap = 0.0
    for m in range(top + 1):
        if m > 0:
            pmf *= rate / m
        covered += pmf
        gap += abs(counts.get(m, 0) / samples - pmf)
    return 0.5 * (gap + max(0.0, 1.0 - covered))


def count_distribution(n: int, samples: int, seed: int, include_t0: bool = False) -> CountHistogram:
    """Histogram of the number of typed deficient pairs per sample."""
    _check_order(n, 2)
    _check_samples(samples)
    _check_seed(seed)
    if n < 2:
        raise QueryError("pairs need n >= 2")
    types = _counted_types(include_t0)
    counts = _type_counts(n, samples, seed)
    per_sample = counts[:, [t.index for t in types]].sum(axis=1)
    histogram = np.bincount(per_sample)
    frequencies = {m: int(c) for m, c in enumerate(histogram) if c}
    rate = sum((expected_type_count(n, t.index) for t in types), Fraction(0))
    distance = poisson_tv_distance(frequencies, samples, float(rate))
    logger.info(f"n={n}: mean count {per_sample.mean():.4f}, lambda_n {float(rate):.4f}, TV {distance:.4f}")
    return CountHistogram(n=n, samples=samples, seed=seed, counts=frequencies, rate=rate,
                          include_t0=include_t0, tv_distance=distance)


def independence_check(n: int, samples: int, seed: int) -> IndependenceReport:
    """Pearson correlations between the presence indicators of T1..T7."""
    _check_order(n, 2)
    _check_samples(samples)
    _check_seed(seed)
    if n < 2:
        raise QueryError("pairs need n >= 2")
    counts = _type_counts(n, samples, seed)
    indicators = (counts[:, 1:8] > 0).astype(np.float64)
    presence = indicators.mean(axis=0)
    with np.errstate(invalid='ignore', divide='ignore'):
        matrix = np.corrcoef(indicators, rowvar=False)
    np.fill_diagonal(matrix, 1.0)
    report = IndependenceReport(
        n=n, samples=samples, seed=seed,
        presence=tuple(float(p) for p in presence),
        matrix=tuple(tuple(float(x) for x in row) for row in matrix),
    )
    logger.info(f"n={n}: max off-diagonal correlation {report.max_off_diagonal:.4f}")
    return report


def theory_columns(n: int, query: SubsetQuery, d: int = 2):
    """(lambda_n, 1 - exp(-lambda_n), limiting probability, conjectural)."""
    if query.type_filter is not None:
        if not query.type_reachable(n):
            return Fraction(0), 0.0, 0.0, False
        rate = expected_type_count(n, query.type_filter.index)
        limit = Fraction(0) if query.type_filter is DeficiencyType.T0 else Fraction(1, 2)
        return rate, limit_probability(rate), limit_probability(limit), False
    rate = expected_count(n, d, query.subset_size, query.max_exceedance)
    limit = limit_rate(d, query.subset_size, query.max_exceedance)
    if limit is None:
        return rate, limit_probability(rate), 1.0, False
    conjectural = limit > 0 and (d >= 3 or rate_exceedance_is_conjectural(query.subset_size))
    return rate, limit_probability(rate), limit_probability(limit), conjectural


def sweep(n_list: Sequence[int], query: SubsetQuery, samples: int, seed: int, d: int = 2) -> List[SweepRow]:
    rows = []
    for n in n_list:
        estimate = mc_probability(n, query, samples, seed, d)
        rate, approx, limit, conjectural = theory_columns(n, query, d)
        rows.append(SweepRow(estimate=estimate, lambda_n=rate, poisson_approx=approx,
                             limit=limit, conjectural=conjectural))
    return rows


def type_presence(n: int, samples: int, seed: int) -> Dict[str, float]:
    """Fraction of samples holding at least one pair of each type."""
    _check_order(n, 2)
    _check_samples(samples)
    _check_seed(seed)
    counts = _type_counts(n, samples, seed)
    return {t.tag: float(np.mean(counts[:, t.index] > 0)) for t in DeficiencyType}
