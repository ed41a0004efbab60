import itertools

import pytest
from hypothesis import strategies as st

from deflab.models import DeficiencyType, OperationTable, SamplerKey, SubsetQuery


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long statistical runs (deselect with -m 'not slow')")


def _block_cells(a, b):
    return ((a, a), (a, b), (b, a), (b, b))


def brute_force_realizable(diagram) -> bool:
    """Search value assignments (restricted growth, so each partition once) for a model of the diagram."""
    cells = sorted({cell for a, b, _ in diagram.edges for cell in _block_cells(a, b)})
    blocks = [(_block_cells(a, b), label.pattern) for a, b, label in diagram.edges]
    assignment = {}

    def consistent() -> bool:
        for block, pattern in blocks:
            for (c1, s1), (c2, s2) in itertools.combinations(zip(block, pattern), 2):
                if c1 in assignment and c2 in assignment:
                    if (assignment[c1] == assignment[c2]) != (s1 == s2):
                        return False
        return True

    def search(position: int, used: int) -> bool:
        if position == len(cells):
            return True
        for value in range(used + 1):
            assignment[cells[position]] = value
            if consistent() and search(position + 1, max(used, value + 1)):
                return True
            del assignment[cells[position]]
        return False

    return search(0, 0)


def brute_force_type_counts(table: OperationTable):
    """Count pairs of each type T0..T7 by direct inspection of the 2x2 blocks."""
    from deflab.core import classify_pair

    counts = [0] * 8
    for i, j in itertools.combinations(range(table.order), 2):
        label = classify_pair(table, i, j)
        if label is not None:
            counts[label.index] += 1
    return counts


@pytest.fixture
def xor_table():
    return OperationTable.from_rows([[0, 1], [1, 0]])


@pytest.fixture
def constant_table():
    return OperationTable.constant(3)


@pytest.fixture
def table_file(tmp_path):
    def write(text: str, name: str = "table.txt"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


u64 = st.integers(min_value=0, max_value=2 ** 64 - 1)
sampler_keys = st.builds(SamplerKey, seed=u64, sample_index=u64)


@st.composite
def tables(draw, min_order=1, max_order=4, arity=2):
    n = draw(st.integers(min_value=min_order, max_value=max_order))
    entries = draw(st.lists(st.integers(min_value=0, max_value=n - 1), min_size=n ** arity, max_size=n ** arity))
    return OperationTable(order=n, arity=arity, entries=tuple(entries))


@st.composite
def queries(draw, order, arity=2):
    """Queries valid for tables of the given order and arity."""
    s = draw(st.integers(min_value=2, max_value=min(3, order)))
    eps = draw(st.integers(min_value=-1, max_value=3))
    type_filter = None
    if s == 2 and arity == 2:
        type_filter = draw(st.none() | st.sampled_from(list(DeficiencyType)))
    return SubsetQuery(subset_size=s, max_exceedance=eps, type_filter=type_filter)


@st.composite
def subsets(draw, order, min_size=1):
    size = draw(st.integers(min_value=min_size, max_value=order))
    return tuple(sorted(draw(st.sets(st.integers(min_value=0, max_value=order - 1), min_size=size, max_size=size))))
