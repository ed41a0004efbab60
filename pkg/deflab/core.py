"""
Operation tables and the subset tests run against them.

Elements are 0-based. A table of order n and arity d is stored row-major, so
f(i_1, ..., i_d) lives at index sum(i_k * n^(d-k)).
"""

import itertools
import logging
from typing import Iterable, List, Optional, Set, Tuple

try:
    from .models import CellSignature, DeficiencyType, OperationTable, SubsetQuery
    from .settings import QueryError, TableError, TableFormatError
except ImportError:
    from models import CellSignature, DeficiencyType, OperationTable, SubsetQuery
    from settings import QueryError, TableError, TableFormatError

logger = logging.getLogger(__name__)


def parse_table(text: str) -> OperationTable:
    """Parse the text table format: a header 'n' or 'n d', then n^(d-1) rows of n values."""
    header = None
    rows: List[Tuple[int, List[int]]] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split()
        try:
            numbers = [int(field) for field in fields]
        except ValueError:
            raise TableFormatError(f"non-integer token in {line!r}", line_number)
        if header is None:
            if len(numbers) not in (1, 2):
                raise TableFormatError("header must be 'n' or 'n d'", line_number)
            order = numbers[0]
            arity = numbers[1] if len(numbers) == 2 else 2
            if order < 1:
                raise TableFormatError(f"order must be positive, got {order}", line_number)
            if arity < 2:
                raise TableFormatError(f"arity must be at least 2, got {arity}", line_number)
            header = (order, arity, line_number)
            continue
        rows.append((line_number, numbers))

    if header is None:
        raise TableFormatError("missing header", 1)
    order, arity, header_line = header
    expected_rows = order ** (arity - 1)
    for row_number, (line_number, numbers) in enumerate(rows):
        if row_number >= expected_rows:
            raise TableFormatError(f"expected {expected_rows} rows, found more", line_number)
        if len(numbers) != order:
            raise TableFormatError(f"expected {order} entries, got {len(numbers)}", line_number)
        for value in numbers:
            if not 0 <= value < order:
                raise TableFormatError(f"entry {value} outside [0, {order})", line_number)
    if len(rows) < expected_rows:
        last_line = rows[-1][0] if rows else header_line
        raise TableFormatError(f"expected {expected_rows} rows, found {len(rows)}", last_line)

    entries = tuple(value for _, numbers in rows for value in numbers)
    return OperationTable(order=order, arity=arity, entries=entries)


def serialize_table(table: OperationTable) -> str:
    """Canonical text form: the header is 'n' for binary tables and 'n d' otherwise."""
    header = f"{table.order}" if table.arity == 2 else f"{table.order} {table.arity}"
    lines = [header] + [' '.join(str(v) for v in row) for row in table.rows()]
    return '\n'.join(lines) + '\n'


def _check_subset(table: OperationTable, subset: Iterable[int]) -> Tuple[int, ...]:
    elements = tuple(sorted(set(subset)))
    if not elements:
        raise QueryError("subset must be nonempty")
    for x in elements:
        if not isinstance(x, int) or not 0 <= x < table.order:
            raise QueryError(f"element {x!r} outside [0, {table.order})")
    return elements


def _sub_table(table: OperationTable, elements: Tuple[int, ...]) -> List[int]:
    return [table.entries[table.index(cell)] for cell in itertools.product(elements, repeat=table.arity)]


def image(table: OperationTable, subset: Iterable[int]) -> Set[int]:
    """f(X, ..., X) as a set."""
    elements = _check_subset(table, subset)
    return set(_sub_table(table, elements))


def exceedance(table: OperationTable, subset: Iterable[int]) -> int:
    """|f(X, ..., X)| - |X|; X is deficient when this is <= 0."""
    elements = _check_subset(table, subset)
    return len(set(_sub_table(table, elements))) - len(elements)


def classify_pair(table: OperationTable, i: int, j: int) -> Optional[DeficiencyType]:
    """Type of the 2x2 block (ii, ij, ji, jj), or None when it takes three or more values."""
    if table.arity != 2:
        raise QueryError(f"pair types are defined for binary operations, got arity {table.arity}")
    if not (0 <= i < table.order and 0 <= j < table.order):
        raise QueryError(f"pair ({i}, {j}) outside [0, {table.order})")
    if i >= j:
        raise QueryError(f"pair must satisfy i < j, got ({i}, {j})")
    n = table.order
    cells = (table.entries[i * n + i], table.entries[i * n + j],
             table.entries[j * n + i], table.entries[j * n + j])
    return DeficiencyType.from_labels(CellSignature.from_values((i, j), 2, cells).labels)


def cell_signature(table: OperationTable, subset: Iterable[int]) -> CellSignature:
    elements = _check_subset(table, subset)
    if len(elements) < 2:
        raise QueryError("a cell signature needs at least 2 elements")
    return CellSignature.from_values(elements, table.arity, _sub_table(table, elements))


def deficient_subsets(table: OperationTable, query: SubsetQuery) -> List[Tuple[Tuple[int, ...], CellSignature]]:
    """Every s-subset meeting the query, in lexicographic order, with its signature."""
    query.check(table.order, table.arity)
    max_image = query.max_image(table.order, table.arity)
    found = []
    for subset in itertools.combinations(range(table.order), query.subset_size):
        values = _sub_table(table, subset)
        if len(set(values)) > max_image:
            continue
        signature = CellSignature.from_values(subset, table.arity, values)
        if query.type_filter is not None and signature.deficiency_type is not query.type_filter:
            continue
        found.append((subset, signature))
    logger.debug(f"{len(found)} qualifying {query.subset_size}-subsets in a table of order {table.order}")
    return found


def has_qualifying_subset(table: OperationTable, query: SubsetQuery) -> bool:
    query.check(table.order, table.arity)
    max_image = query.max_image(table.order, table.arity)
    for subset in itertools.combinations(range(table.order), query.subset_size):
        values = _sub_table(table, subset)
        if len(set(values)) > max_image:
            continue
        if query.type_filter is None:
            return True
        if DeficiencyType.from_labels(CellSignature.from_values(subset, 2, values).labels) is query.type_filter:
            return True
    return False


def all_tables(order: int, arity: int = 2) -> Iterable[OperationTable]:
    """Every table of the given order and arity, last cell varying fastest."""
    if order < 1 or arity < 2:
        raise TableError(f"no tables for order {order}, arity {arity}")
    for entries in itertools.product(range(order), repeat=order ** arity):
        yield OperationTable(order=order, arity=arity, entries=entries)
