"""
Configurations of deficient pairs and their diagrams.

A configuration is a set of typed deficient pairs found in one table. Its
diagram keeps only the order of the elements involved: vertices are
compressed to 1..v, edges carry the pair types. Equality and disequality
constraints between the cells of the partial table decide whether a diagram
comes from some real table, and give the counts used by the first-moment
argument (parameters alpha, constrained cells beta, elements gamma).
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterable, Iterator, List, Optional, Set, Tuple

try:
    from .core import classify_pair
    from .models import DeficiencyType, DiagonalClass, OperationTable
    from .settings import (DIAGRAM_EDGE_LIMIT, LEMMA3_EDGE_LIMIT, DiagramError,
                           GuardExceededError, QueryError, UnrealizableDiagramError)
    from .union_find import UnionFind
except ImportError:
    from core import classify_pair
    from models import DeficiencyType, DiagonalClass, OperationTable
    from settings import (DIAGRAM_EDGE_LIMIT, LEMMA3_EDGE_LIMIT, DiagramError,
                          GuardExceededError, QueryError, UnrealizableDiagramError)
    from union_find import UnionFind

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, DeficiencyType]
Cell = Tuple[int, int]

EDGE_LABELS = tuple(DeficiencyType.nonconstant())


def _pair_cells(a: int, b: int) -> Dict[str, Cell]:
    return {'ii': (a, a), 'ij': (a, b), 'ji': (b, a), 'jj': (b, b)}


def _normalize_edges(edges: Iterable[Edge]) -> Tuple[Edge, ...]:
    normalized = []
    for edge in edges:
        if len(edge) != 3:
            raise DiagramError(f"edge {edge!r} must be (i, j, type)")
        a, b, label = edge
        if isinstance(label, str):
            label = DeficiencyType.parse(label)
        if not isinstance(label, DeficiencyType):
            raise DiagramError(f"edge label {label!r} is not a deficiency type")
        if a == b:
            raise DiagramError(f"edge ({a}, {b}) is a loop")
        normalized.append((min(a, b), max(a, b), label))
    normalized.sort(key=lambda e: (e[0], e[1]))
    pairs = [(a, b) for a, b, _ in normalized]
    if len(set(pairs)) != len(pairs):
        raise DiagramError("edges must join pairwise distinct vertex pairs")
    return tuple(normalized)


@dataclass(frozen=True)
class Configuration:
    """A set of typed deficient pairs {i, j} (0-based, i < j) of one table."""
    edges: Tuple[Edge, ...]
    source_order: Optional[int] = None
    allow_t0: bool = False

    def __post_init__(self):
        edges = _normalize_edges(self.edges)
        for a, b, label in edges:
            if a < 0:
                raise DiagramError(f"element {a} is negative")
            if self.source_order is not None and b >= self.source_order:
                raise DiagramError(f"element {b} outside [0, {self.source_order})")
            if label is DeficiencyType.T0 and not self.allow_t0:
                raise DiagramError("T0 pairs are excluded from configurations unless allowed explicitly")
        object.__setattr__(self, 'edges', edges)

    @property
    def k(self) -> int:
        return len(self.edges)

    @property
    def elements(self) -> Tuple[int, ...]:
        return tuple(sorted({x for a, b, _ in self.edges for x in (a, b)}))

    @property
    def is_disjoint(self) -> bool:
        return len(self.elements) == 2 * self.k

    def without_t0(self) -> 'Configuration':
        kept = tuple(e for e in self.edges if e[2] is not DeficiencyType.T0)
        return Configuration(edges=kept, source_order=self.source_order)

    def disjoint_sum(self, other: 'Configuration') -> 'Configuration':
        """C + C' for configurations sharing no element."""
        if set(self.elements) & set(other.elements):
            raise DiagramError("disjoint sum needs configurations without common elements")
        order = None
        if self.source_order is not None or other.source_order is not None:
            order = max(o for o in (self.source_order, other.source_order) if o is not None)
        return Configuration(edges=self.edges + other.edges, source_order=order,
                             allow_t0=self.allow_t0 or other.allow_t0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.source_order,
            "edges": [[a, b, label.tag] for a, b, label in self.edges],
        }


@dataclass(frozen=True)
class Diagram:
    """Labelled graph on ordered vertices 1..v; every vertex lies on an edge."""
    v: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        edges = _normalize_edges(self.edges)
        if not edges:
            raise DiagramError("a diagram needs at least one edge")
        used = set()
        for a, b, label in edges:
            if label is DeficiencyType.T0:
                raise DiagramError("diagram edges carry types T1..T7 only")
            if not 1 <= a < b <= self.v:
                raise DiagramError(f"edge ({a}, {b}) outside vertices 1..{self.v}")
            used.update((a, b))
        if len(used) != self.v:
            missing = sorted(set(range(1, self.v + 1)) - used)
            raise DiagramError(f"isolated vertices {missing}")
        object.__setattr__(self, 'edges', edges)

    @classmethod
    def from_edges(cls, edges: Iterable[Edge]) -> 'Diagram':
        """Compress the endpoints order-preservingly to 1..v."""
        edges = _normalize_edges(edges)
        vertices = sorted({x for a, b, _ in edges for x in (a, b)})
        rank = {x: position for position, x in enumerate(vertices, start=1)}
        return cls(v=len(vertices), edges=tuple((rank[a], rank[b], label) for a, b, label in edges))

    @property
    def k(self) -> int:
        return len(self.edges)

    @cached_property
    def c(self) -> int:
        components = UnionFind(range(1, self.v + 1))
        for a, b, _ in self.edges:
            components.union(a, b)
        return components.class_count()

    @cached_property
    def degrees(self) -> Dict[int, int]:
        degrees = {u: 0 for u in range(1, self.v + 1)}
        for a, b, _ in self.edges:
            degrees[a] += 1
            degrees[b] += 1
        return degrees

    @property
    def is_perfect_matching(self) -> bool:
        return all(degree == 1 for degree in self.degrees.values())

    @property
    def is_path(self) -> bool:
        return self.c == 1 and self.k == self.v - 1 and max(self.degrees.values()) <= 2

    @property
    def base_graph(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((a, b) for a, b, _ in self.edges)

    def to_dict(self) -> Dict[str, Any]:
        return {"v": self.v, "edges": [[a, b, label.tag] for a, b, label in self.edges]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Diagram':
        try:
            v = int(data["v"])
            edges = [(int(a), int(b), label) for a, b, label in data["edges"]]
        except (KeyError, TypeError, ValueError) as e:
            raise DiagramError(f"malformed diagram JSON: {e}")
        return cls(v=v, edges=tuple(edges))


@dataclass
class ConstraintSystem:
    """Cells of the partial table, their equality classes, and required disequalities."""
    cells: Tuple[Cell, ...]
    eq: UnionFind
    neq: Tuple[Tuple[Cell, Cell], ...]

    def classes(self) -> List[List[Cell]]:
        return self.eq.classes()

    def collapsed(self) -> List[Tuple[Cell, Cell]]:
        """Disequalities whose two sides ended up in one class."""
        return [(x, y) for x, y in self.neq if self.eq.connected(x, y)]

    @property
    def is_consistent(self) -> bool:
        return not self.collapsed()


@dataclass(frozen=True)
class DiagramStats:
    alpha: int
    beta: int
    gamma: int
    k: int
    c: int

    def to_dict(self) -> Dict[str, int]:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "k": self.k, "c": self.c}


def diagram_of(config: Configuration) -> Diagram:
    if not config.edges:
        raise DiagramError("the empty configuration has no diagram")
    return Diagram.from_edges(config.edges)


def canonicalize(diagram: Diagram) -> Diagram:
    return Diagram.from_edges(diagram.edges)


def equivalent(first: Diagram, second: Diagram) -> bool:
    """Order- and label-preserving isomorphism, which for ordered vertices is equality after compression."""
    return canonicalize(first) == canonicalize(second)


def compile_constraints(diagram: Diagram) -> ConstraintSystem:
    cells: Set[Cell] = set()
    for a, b, _ in diagram.edges:
        cells.update(_pair_cells(a, b).values())
    ordered = tuple(sorted(cells))
    eq = UnionFind(ordered)
    neq = []
    for a, b, label in diagram.edges:
        named = _pair_cells(a, b)
        x_cells = [named[name] for name in label.slot_cells('x')]
        y_cells = [named[name] for name in label.slot_cells('y')]
        for cell in x_cells[1:]:
            eq.union(x_cells[0], cell)
        for cell in y_cells[1:]:
            eq.union(y_cells[0], cell)
        neq.append((x_cells[0], y_cells[0]))
    return ConstraintSystem(cells=ordered, eq=eq, neq=tuple(neq))


def realizable(diagram: Diagram) -> bool:
    # Off-diagonal cells belong to one edge only; edges interact through
    # shared diagonal cells, so closure plus the disequality check is complete.
    return compile_constraints(diagram).is_consistent


def stats(diagram: Diagram) -> DiagramStats:
    system = compile_constraints(diagram)
    return DiagramStats(
        alpha=system.eq.class_count(),
        beta=len(system.cells),
        gamma=diagram.v,
        k=diagram.k,
        c=diagram.c,
    )


def _check_edge_guard(k: int, limit: int) -> None:
    if not isinstance(k, int) or k < 1 or k > limit:
        raise GuardExceededError(f"edge count must be in 1..{limit}, got {k!r}")


def iter_base_graphs(k: int) -> Iterator[Tuple[int, Tuple[Tuple[int, int], ...]]]:
    """Unlabelled k-edge graphs on 1..v without isolated vertices, v ascending."""
    v = 2
    while v * (v - 1) // 2 < k:
        v += 1
    for vertices in range(v, 2 * k + 1):
        pairs = list(itertools.combinations(range(1, vertices + 1), 2))
        for chosen in itertools.combinations(pairs, k):
            if len({x for pair in chosen for x in pair}) == vertices:
                yield vertices, chosen


def iter_diagrams(k: int, realizable_only: bool = False) -> Iterator[Diagram]:
    _check_edge_guard(k, DIAGRAM_EDGE_LIMIT)
    for v, graph in iter_base_graphs(k):
        for labels in itertools.product(EDGE_LABELS, repeat=k):
            diagram = Diagram(v=v, edges=tuple((a, b, label) for (a, b), label in zip(graph, labels)))
            if realizable_only and not realizable(diagram):
                continue
            yield diagram


def enumerate_diagrams(k: int, realizable_only: bool = False) -> List[Diagram]:
    return list(iter_diagrams(k, realizable_only))


def count_diagrams(k: int, realizable_only: bool = False) -> int:
    _check_edge_guard(k, DIAGRAM_EDGE_LIMIT)
    if not realizable_only:
        return sum(1 for _ in iter_base_graphs(k)) * len(EDGE_LABELS) ** k
    return sum(1 for _ in iter_diagrams(k, realizable_only=True))


def lemma3_violations(diagram: Diagram, values: DiagramStats = None) -> List[str]:
    values = values or stats(diagram)
    k, c, v = values.k, values.c, diagram.v
    matching = diagram.is_perfect_matching
    problems = []
    if values.alpha > k + c:
        problems.append(f"alpha {values.alpha} > k + c = {k + c}")
    if matching and values.alpha != 2 * k:
        problems.append(f"perfect matching with alpha {values.alpha} != 2k = {2 * k}")
    if values.beta != 2 * k + v:
        problems.append(f"beta {values.beta} != 2k + v = {2 * k + v}")
    if values.gamma != v:
        problems.append(f"gamma {values.gamma} != v = {v}")
    if c > k:
        problems.append(f"c {c} > k {k}")
    if (c == k) != matching:
        problems.append(f"c == k is {c == k} but perfect matching is {matching}")
    if diagram.is_path and values.alpha != v:
        problems.append(f"path with alpha {values.alpha} != v = {v}")
    return problems


@dataclass
class Lemma3Report:
    k_max: int
    checked: int = 0
    paths: int = 0
    by_k: Dict[int, int] = field(default_factory=dict)
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k_max": self.k_max,
            "checked": self.checked,
            "paths": self.paths,
            "by_k": {str(k): count for k, count in sorted(self.by_k.items())},
            "violations": self.violations,
        }


def verify_lemma3(k_max: int) -> Lemma3Report:
    """Check the alpha/beta/gamma/c relations on every realizable diagram with at most k_max edges.

    `checked` is the size of the k_max layer; `by_k` holds every layer.
    """
    _check_edge_guard(k_max, LEMMA3_EDGE_LIMIT)
    report = Lemma3Report(k_max=k_max)
    for k in range(1, k_max + 1):
        checked = 0
        for diagram in iter_diagrams(k, realizable_only=True):
            checked += 1
            if diagram.is_path:
                report.paths += 1
            for problem in lemma3_violations(diagram):
                report.violations.append({"diagram": diagram.to_dict(), "problem": problem})
        report.by_k[k] = checked
        logger.info(f"k={k}: checked {checked} realizable diagrams")
    report.checked = report.by_k[k_max]
    return report


def witness_groupoid(diagram: Diagram) -> OperationTable:
    """Smallest table (order max(v, alpha)) carrying the diagram on elements 0..v-1.

    Each equality class gets its own value, numbered by first cell in row-major
    order; cells outside the configuration are 0.
    """
    system = compile_constraints(diagram)
    if not system.is_consistent:
        raise UnrealizableDiagramError(f"diagram {diagram.to_dict()} has no model")
    classes = system.classes()
    order = max(diagram.v, len(classes))
    entries = [0] * (order * order)
    for value, members in enumerate(classes):
        for a, b in members:
            entries[(a - 1) * order + (b - 1)] = value
    return OperationTable(order=order, arity=2, entries=tuple(entries))


def config_of_table(table: OperationTable, include_t0: bool = False) -> Configuration:
    """All typed deficient pairs of a binary table; T0 pairs only when asked for."""
    if table.arity != 2:
        raise QueryError(f"configurations are defined for binary operations, got arity {table.arity}")
    edges = []
    for i, j in itertools.combinations(range(table.order), 2):
        label = classify_pair(table, i, j)
        if label is None or (label is DeficiencyType.T0 and not include_t0):
            continue
        edges.append((i, j, label))
    return Configuration(edges=tuple(edges), source_order=table.order, allow_t0=include_t0)


def constrained_image(table: OperationTable, config: Configuration) -> Set[int]:
    """Distinct values on the cells a configuration constrains."""
    values = set()
    for a, b, _ in config.edges:
        for x, y in _pair_cells(a, b).values():
            values.add(table.value(x, y))
    return values


def diagonal_profile(diagram: Diagram) -> Tuple[int, int]:
    """(edges forcing equal diagonals, edges forcing unequal diagonals)."""
    equal = sum(1 for _, _, label in diagram.edges if label.diagonal_class is DiagonalClass.EQUAL)
    return equal, diagram.k - equal


def carries_diagram(table: OperationTable, diagram: Diagram) -> bool:
    """Whether the pairs {a-1, b-1} of the diagram's edges are deficient in table with the same types."""
    config = config_of_table(table)
    wanted = {(a - 1, b - 1) for a, b, _ in diagram.edges}
    edges = tuple(e for e in config.edges if (e[0], e[1]) in wanted)
    if len(edges) != diagram.k:
        return False
    return diagram_of(Configuration(edges=edges)) == diagram
