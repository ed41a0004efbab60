import itertools

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from conftest import brute_force_type_counts, queries, u64
from deflab import sampler
from deflab.core import all_tables, deficient_subsets, has_qualifying_subset
from deflab.models import DeficiencyType, OperationTable, SubsetQuery, canonical_labels


def table_for(n, d, key):
    return OperationTable(order=n, arity=d, entries=tuple(sampler.sample_table(n, d, key).tolist()))


class TestMixing:
    def test_splitmix_reference_value(self):
        assert sampler.mix64(0) == 0xE220A8397B1DCDAF

    def test_outputs_are_64_bit(self):
        for z in (0, 1, sampler.MASK64, 0x123456789ABCDEF0):
            assert 0 <= sampler.mix64(z) <= sampler.MASK64

    def test_rejection_threshold(self):
        assert sampler.rejection_threshold(1) == 0
        assert sampler.rejection_threshold(2) == 0
        assert sampler.rejection_threshold(3) == (1 << 64) % 3
        assert sampler.rejection_threshold(10) == (1 << 64) % 10

    def test_order_one_is_always_zero(self):
        key = sampler.sample_key(7, 3)
        assert all(sampler.keyed_value(key, 1, cell) == 0 for cell in range(100))

    @settings(deadline=None)
    @given(n=st.integers(min_value=1, max_value=12), d=st.integers(min_value=2, max_value=3), seed=u64, index=u64)
    @example(n=300, d=2, seed=9, index=9)
    def test_compiled_table_matches_reference(self, n, d, seed, index):
        key = sampler.sample_key(seed, index)
        table = sampler.sample_table(n, d, key)
        cells = range(0, n ** d, max(1, n ** d // 500))
        assert [int(table[c]) for c in cells] == [sampler.keyed_value(key, n, c) for c in cells]

    def test_uniformity(self):
        # 10^6 cells of one order-10 table of arity 6
        table = sampler.sample_table(10, 6, sampler.sample_key(2024, 0))
        frequencies = np.bincount(table, minlength=10)
        sigma = (10 ** 6 * 0.1 * 0.9) ** 0.5
        assert frequencies.sum() == 10 ** 6
        assert np.all(np.abs(frequencies - 10 ** 5) <= 5 * sigma)


class TestPatternCode:
    def test_agrees_with_deficiency_types(self):
        for block in itertools.product(range(4), repeat=4):
            labels = DeficiencyType.from_labels(canonical_labels(block))
            expected = -1 if labels is None else labels.index
            assert sampler.pattern_type(block) == expected


class TestKernels:
    @settings(deadline=None, max_examples=50)
    @given(data=st.data(), n=st.integers(min_value=2, max_value=6), seed=u64)
    def test_hits_match_reference_scan(self, data, n, seed):
        query = data.draw(queries(n).filter(lambda q: q.type_filter is None))
        expected = sum(has_qualifying_subset(table_for(n, 2, sampler.sample_key(seed, i)), query)
                       for i in range(40))
        assert sampler.batch_hits(n, 2, query.subset_size, query.max_image(n), seed, 0, 40) == expected

    @settings(deadline=None, max_examples=40)
    @given(data=st.data(), n=st.integers(min_value=2, max_value=5), d=st.integers(min_value=2, max_value=3),
           seed=u64, start=st.integers(min_value=0, max_value=2 ** 40))
    def test_counts_match_reference_listing(self, data, n, d, seed, start):
        query = data.draw(queries(n, arity=d))
        counts = sampler.batch_counts(n, d, query.subset_size, query.max_image(n, d), seed, start, 20)
        expected = [len(deficient_subsets(table_for(n, d, sampler.sample_key(seed, start + i)), query))
                    for i in range(20)]
        assert counts.tolist() == expected

    @settings(deadline=None, max_examples=30)
    @given(n=st.integers(min_value=2, max_value=9), seed=u64)
    def test_type_counts_match_classification(self, n, seed):
        counts = sampler.batch_type_counts(n, seed, 0, 40)
        assert counts.shape == (40, 8)
        for i in range(40):
            table = table_for(n, 2, sampler.sample_key(seed, i))
            assert counts[i].tolist() == brute_force_type_counts(table)

    def test_batches_split_anywhere(self):
        whole = sampler.batch_counts(6, 2, 2, 2, 1, 0, 64)
        parts = np.concatenate([sampler.batch_counts(6, 2, 2, 2, 1, 0, 20),
                                sampler.batch_counts(6, 2, 2, 2, 1, 20, 44)])
        assert whole.tolist() == parts.tolist()

    def test_unreachable_image_size(self):
        assert sampler.batch_hits(5, 2, 2, 0, 0, 0, 10) == 0

    def test_exhaustive_order_two(self):
        assert sampler.exhaustive_counts(2, 2, 2, 2, 0, 16) == (16, 16)

    def test_exhaustive_order_three(self):
        hits, subsets = sampler.exhaustive_counts(3, 2, 2, 2, 0, 3 ** 9)
        assert subsets == 3 ** 9 * 5 // 3
        expected = sum(has_qualifying_subset(table, SubsetQuery()) for table in all_tables(3))
        assert hits == expected

    def test_exhaustive_index_order(self):
        # index t lists cells in base n, last cell least significant
        tables = list(itertools.islice(all_tables(2), 0, 16))
        for t, table in enumerate(tables):
            found = 1 if has_qualifying_subset(table, SubsetQuery(max_exceedance=-1)) else 0
            assert sampler.exhaustive_counts(2, 2, 2, 1, t, 1)[0] == found

    @pytest.mark.parametrize("threads", [1, 2])
    def test_thread_count_does_not_change_results(self, threads):
        import numba

        before = numba.get_num_threads()
        reference = sampler.batch_counts(12, 2, 2, 2, 99, 0, 300)
        try:
            numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
            assert sampler.batch_counts(12, 2, 2, 2, 99, 0, 300).tolist() == reference.tolist()
        finally:
            numba.set_num_threads(before)
