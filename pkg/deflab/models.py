import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

try:
    from .settings import QueryError, TableError
except ImportError:
    from settings import QueryError, TableError

# NOTE: every value here is immutable once built; estimators and diagram code share them freely.

# Cell order of a 2-element subset {i, j} with i < j.
PAIR_CELLS = ('ii', 'ij', 'ji', 'jj')


def canonical_labels(values) -> Tuple[int, ...]:
    """Relabel a value sequence by order of first appearance (0, 1, 2, ...)."""
    seen: Dict[Any, int] = {}
    labels = []
    for value in values:
        if value not in seen:
            seen[value] = len(seen)
        labels.append(seen[value])
    return tuple(labels)


@dataclass(frozen=True)
class OperationTable:
    """A d-ary operation on [0, n), stored as a dense row-major Cayley table."""
    order: int
    arity: int
    entries: Tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 1:
            raise TableError(f"order must be a positive integer, got {self.order!r}")
        if not isinstance(self.arity, int) or self.arity < 2:
            raise TableError(f"arity must be an integer >= 2, got {self.arity!r}")
        entries = tuple(self.entries)
        expected = self.order ** self.arity
        if len(entries) != expected:
            raise TableError(f"expected {expected} entries for n={self.order}, d={self.arity}, got {len(entries)}")
        for position, value in enumerate(entries):
            if not isinstance(value, int) or not 0 <= value < self.order:
                raise TableError(f"entry {position} is {value!r}, outside [0, {self.order})")
        object.__setattr__(self, 'entries', entries)

    def index(self, coords) -> int:
        """Flatten coordinates: sum of c_k * n^(d-1-k)."""
        if len(coords) != self.arity:
            raise QueryError(f"expected {self.arity} coordinates, got {len(coords)}")
        flat = 0
        for c in coords:
            if not 0 <= c < self.order:
                raise QueryError(f"element {c} outside [0, {self.order})")
            flat = flat * self.order + c
        return flat

    def value(self, *coords) -> int:
        return self.entries[self.index(coords)]

    def rows(self) -> List[Tuple[int, ...]]:
        n = self.order
        return [self.entries[r * n:(r + 1) * n] for r in range(len(self.entries) // n)]

    @classmethod
    def from_rows(cls, rows, arity: int = 2) -> 'OperationTable':
        rows = [tuple(row) for row in rows]
        if not rows:
            raise TableError("a table needs at least one row")
        order = len(rows[0])
        return cls(order=order, arity=arity, entries=tuple(v for row in rows for v in row))

    @classmethod
    def constant(cls, order: int, value: int = 0, arity: int = 2) -> 'OperationTable':
        return cls(order=order, arity=arity, entries=(value,) * (order ** arity))

    @classmethod
    def left_projection(cls, order: int, arity: int = 2) -> 'OperationTable':
        block = order ** (arity - 1)
        return cls(order=order, arity=arity, entries=tuple(i // block for i in range(order ** arity)))

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.order, "d": self.arity, "entries": list(self.entries)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'OperationTable':
        return cls(order=data["n"], arity=data.get("d", 2), entries=tuple(data["entries"]))


class DiagonalClass(Enum):
    EQUAL = 'EQUAL'
    UNEQUAL = 'UNEQUAL'


class DeficiencyType(Enum):
    """The eight ways a 2x2 block (ii, ij, ji, jj) can take at most two values.

    The value is the slot template over {x, y}; T1-T7 need x != y.
    """
    T0 = 'xxxx'
    T1 = 'xyyy'
    T2 = 'yxyy'
    T3 = 'yyxy'
    T4 = 'yyyx'
    T5 = 'xxyy'
    T6 = 'xyxy'
    T7 = 'xyyx'

    @property
    def tag(self) -> str:
        return self.name

    @property
    def pattern(self) -> str:
        return self.value

    @property
    def labels(self) -> Tuple[int, ...]:
        return canonical_labels(self.value)

    @property
    def index(self) -> int:
        return int(self.name[1])

    @property
    def diagonal_class(self) -> Optional[DiagonalClass]:
        if self is DeficiencyType.T0:
            return None
        if self.value[0] == self.value[3]:
            return DiagonalClass.EQUAL
        return DiagonalClass.UNEQUAL

    def slot_cells(self, slot: str) -> Tuple[str, ...]:
        """Names of the cells (from PAIR_CELLS) sitting in slot 'x' or 'y'."""
        return tuple(cell for cell, s in zip(PAIR_CELLS, self.value) if s == slot)

    @classmethod
    def from_labels(cls, labels) -> Optional['DeficiencyType']:
        return _TYPES_BY_LABELS.get(tuple(labels))

    @classmethod
    def parse(cls, tag: str) -> 'DeficiencyType':
        try:
            return cls[tag.strip().upper()]
        except KeyError:
            raise QueryError(f"unknown deficiency type {tag!r}; expected one of T0..T7")

    @classmethod
    def nonconstant(cls) -> List['DeficiencyType']:
        return [t for t in cls if t is not cls.T0]


_TYPES_BY_LABELS = {t.labels: t for t in DeficiencyType}


@dataclass(frozen=True)
class CellSignature:
    """Partition of the s^d cells of a subset's sub-table by equal value.

    Cells run row-major over the sorted subset; labels number the blocks by
    first appearance.
    """
    subset: Tuple[int, ...]
    arity: int
    labels: Tuple[int, ...]

    @classmethod
    def from_values(cls, subset, arity: int, values) -> 'CellSignature':
        return cls(subset=tuple(subset), arity=arity, labels=canonical_labels(values))

    @property
    def block_count(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    @property
    def blocks(self) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
        import itertools

        cells = list(itertools.product(self.subset, repeat=self.arity))
        grouped: List[List[Tuple[int, ...]]] = [[] for _ in range(self.block_count)]
        for cell, label in zip(cells, self.labels):
            grouped[label].append(cell)
        return tuple(tuple(block) for block in grouped)

    @property
    def deficiency_type(self) -> Optional[DeficiencyType]:
        if len(self.subset) != 2 or self.arity != 2:
            return None
        return DeficiencyType.from_labels(self.labels)

    def describe(self) -> str:
        kind = self.deficiency_type
        if kind is not None:
            return kind.tag
        return ''.join(str(label) for label in self.labels)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subset": list(self.subset),
            "labels": list(self.labels),
            "blocks": self.block_count,
            "type": self.describe(),
        }


@dataclass(frozen=True)
class SubsetQuery:
    """Which s-subsets count: exceedance at most max_exceedance, optionally one pair type."""
    subset_size: int = 2
    max_exceedance: int = 0
    type_filter: Optional[DeficiencyType] = None

    def __post_init__(self):
        if not isinstance(self.subset_size, int) or self.subset_size < 2:
            raise QueryError(f"subset size must be an integer >= 2, got {self.subset_size!r}")
        if not isinstance(self.max_exceedance, int):
            raise QueryError(f"max exceedance must be an integer, got {self.max_exceedance!r}")
        if self.type_filter is not None and self.subset_size != 2:
            raise QueryError("a type filter only applies to 2-element subsets")

    def check(self, order: int, arity: int = 2) -> None:
        if self.subset_size > order:
            raise QueryError(f"subset size {self.subset_size} exceeds the order {order}")
        if self.type_filter is not None and arity != 2:
            raise QueryError("a type filter only applies to binary operations")

    def max_image(self, order: int, arity: int = 2) -> int:
        """Largest qualifying image size, capped by what an image can reach."""
        s = self.subset_size
        return min(s + self.max_exceedance, s ** arity, order)

    def type_reachable(self, order: int) -> bool:
        """False when the exceedance bound rules out every pair of the filtered type."""
        if self.type_filter is None:
            return True
        return len(set(self.type_filter.labels)) <= self.max_image(order)

    def to_dict(self) -> Dict[str, Any]:
        data = {"s": self.subset_size, "eps": self.max_exceedance}
        if self.type_filter is not None:
            data["type"] = self.type_filter.tag
        return data


@dataclass(frozen=True)
class SamplerKey:
    seed: int
    sample_index: int

    def __post_init__(self):
        for name in ('seed', 'sample_index'):
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value < 2 ** 64:
                raise QueryError(f"{name} must be an unsigned 64-bit integer, got {value!r}")


@dataclass(frozen=True)
class EstimateRecord:
    n: int
    d: int
    query: SubsetQuery
    samples: int
    seed: int
    hits: int

    @property
    def p_hat(self) -> float:
        return self.hits / self.samples

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.samples)

    @property
    def ci95(self) -> Tuple[float, float]:
        half = 1.96 * self.stderr
        return (self.p_hat - half, self.p_hat + half)

    def to_dict(self) -> Dict[str, Any]:
        data = {"n": self.n, "d": self.d}
        data.update(self.query.to_dict())
        data.update({
            "samples": self.samples,
            "seed": self.seed,
            "hits": self.hits,
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "ci95": list(self.ci95),
        })
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EstimateRecord':
        type_filter = DeficiencyType.parse(data["type"]) if data.get("type") else None
        query = SubsetQuery(subset_size=data["s"], max_exceedance=data["eps"], type_filter=type_filter)
        return cls(n=data["n"], d=data["d"], query=query, samples=data["samples"],
                   seed=data["seed"], hits=data["hits"])


@dataclass(frozen=True)
class CountEstimate:
    """Sample mean of the number of qualifying subsets."""
    n: int
    d: int
    query: SubsetQuery
    samples: int
    seed: int
    total: int
    total_squares: int

    @property
    def mean(self) -> float:
        return self.total / self.samples

    @property
    def stderr(self) -> float:
        if self.samples < 2:
            return 0.0
        mean = self.mean
        variance = (self.total_squares - self.samples * mean * mean) / (self.samples - 1)
        return math.sqrt(max(variance, 0.0) / self.samples)

    def to_dict(self) -> Dict[str, Any]:
        data = {"n": self.n, "d": self.d}
        data.update(self.query.to_dict())
        data.update({"samples": self.samples, "seed": self.seed, "mean": self.mean, "stderr": self.stderr})
        return data


@dataclass(frozen=True)
class ExactResult:
    n: int
    d: int
    query: SubsetQuery
    total_tables: int
    qualifying_tables: int
    subset_total: int

    @property
    def probability(self) -> Fraction:
        return Fraction(self.qualifying_tables, self.total_tables)

    @property
    def mean_count(self) -> Fraction:
        return Fraction(self.subset_total, self.total_tables)

    def to_dict(self) -> Dict[str, Any]:
        data = {"n": self.n, "d": self.d}
        data.update(self.query.to_dict())
        data.update({
            "tables": self.total_tables,
            "qualifying": self.qualifying_tables,
            "p": str(self.probability),
            "p_real": float(self.probability),
            "mean_count": str(self.mean_count),
            "mean_count_real": float(self.mean_count),
        })
        return data


@dataclass(frozen=True)
class CountHistogram:
    n: int
    samples: int
    seed: int
    counts: Dict[int, int]
    rate: Fraction
    include_t0: bool = False
    tv_distance: float = 0.0

    @property
    def mean(self) -> float:
        return sum(m * c for m, c in self.counts.items()) / self.samples

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "include_t0": self.include_t0,
            "counts": {str(m): self.counts[m] for m in sorted(self.counts)},
            "mean": self.mean,
            "lambda_n": str(self.rate),
            "lambda_n_real": float(self.rate),
            "tv_distance": self.tv_distance,
        }


@dataclass(frozen=True)
class IndependenceReport:
    n: int
    samples: int
    seed: int
    presence: Tuple[float, ...]
    matrix: Tuple[Tuple[float, ...], ...]

    @property
    def max_off_diagonal(self) -> float:
        values = [abs(self.matrix[a][b]) for a in range(7) for b in range(7)
                  if a != b and not math.isnan(self.matrix[a][b])]
        return max(values) if values else 0.0

    def to_dict(self) -> Dict[str, Any]:
        def clean(x: float):
            return None if math.isnan(x) else x

        return {
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "types": [t.tag for t in DeficiencyType.nonconstant()],
            "presence": list(self.presence),
            "correlation": [[clean(x) for x in row] for row in self.matrix],
            "max_off_diagonal": self.max_off_diagonal,
        }


@dataclass(frozen=True)
class SweepRow:
    estimate: EstimateRecord
    lambda_n: Fraction
    poisson_approx: float
    limit: float
    conjectural: bool = field(default=False)

    CSV_HEADER = ('n', 'p_hat', 'stderr', 'lambda_n', 'poisson_approx', 'limit')

    def csv_row(self) -> Tuple[Any, ...]:
        return (self.estimate.n, self.estimate.p_hat, self.estimate.stderr,
                float(self.lambda_n), self.poisson_approx, self.limit)

    def to_dict(self) -> Dict[str, Any]:
        data = self.estimate.to_dict()
        data.update({
            "lambda_n": float(self.lambda_n),
            "lambda_n_exact": str(self.lambda_n),
            "poisson_approx": self.poisson_approx,
            "limit": self.limit,
            "conjectural": self.conjectural,
        })
        return data
