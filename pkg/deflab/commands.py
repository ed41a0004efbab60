"""
Command classes behind the deflab CLI.

Each command turns parsed arguments into a list of records. BaseCommand.run()
writes them to stdout as JSON lines or CSV; summaries for people go to stderr.
"""

import csv
import json
import logging
import math
import sys
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, TextIO

try:
    from . import combinatorics as comb
    from .core import deficient_subsets, parse_table, serialize_table
    from .diagrams import (Diagram, carries_diagram, config_of_table, count_diagrams, diagram_of,
                           iter_base_graphs, iter_diagrams, realizable, stats, verify_lemma3,
                           witness_groupoid)
    from .estimation import (count_distribution, exact_probability, independence_check, mc_mean_count,
                             mc_probability, sweep)
    from .models import DeficiencyType, SubsetQuery, SweepRow
    from .settings import DiagramError, QueryError, TableFormatError
except ImportError:
    import combinatorics as comb
    from core import deficient_subsets, parse_table, serialize_table
    from diagrams import (Diagram, carries_diagram, config_of_table, count_diagrams, diagram_of,
                          iter_base_graphs, iter_diagrams, realizable, stats, verify_lemma3,
                          witness_groupoid)
    from estimation import (count_distribution, exact_probability, independence_check, mc_mean_count,
                            mc_probability, sweep)
    from models import DeficiencyType, SubsetQuery, SweepRow
    from settings import DiagramError, QueryError, TableFormatError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def exact_string(value) -> str:
    """'p/q' for rationals, the integer itself when q = 1."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _query_from(args) -> SubsetQuery:
    type_filter = DeficiencyType.parse(args.type) if getattr(args, 'type', None) else None
    return SubsetQuery(subset_size=args.s, max_exceedance=args.eps, type_filter=type_filter)


def _require(args, name: str):
    value = getattr(args, name, None)
    if value is None:
        raise QueryError(f"--{name.replace('_', '-')} is required here")
    return value


class BaseCommand(ABC):
    """Base class for all commands."""

    # Commands that run compiled kernels get the worker count applied first.
    uses_kernels = False

    def __init__(self, args, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        self.args = args
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.exit_code = EXIT_OK
        self.csv_header: Optional[Sequence[str]] = None
        self.csv_rows: Optional[List[Sequence[Any]]] = None

    @abstractmethod
    def execute(self) -> List[Dict[str, Any]]:
        """Compute the records to print. Must be implemented by each command."""
        raise NotImplementedError("Each command must implement this method")

    def say(self, message: str) -> None:
        print(message, file=self.stderr)

    def emit(self, records: List[Dict[str, Any]]) -> None:
        if getattr(self.args, 'format', 'json') == 'csv':
            self._emit_csv(records)
            return
        for record in records:
            self.stdout.write(json.dumps(record) + '\n')

    def _emit_csv(self, records: List[Dict[str, Any]]) -> None:
        writer = csv.writer(self.stdout, lineterminator='\n')
        if self.csv_header is not None:
            writer.writerow(self.csv_header)
            writer.writerows(self.csv_rows or [])
            return
        if not records:
            return
        header = list(records[0])
        for record in records[1:]:
            header.extend(key for key in record if key not in header)
        writer.writerow(header)
        for record in records:
            writer.writerow([self._csv_cell(record.get(key)) for key in header])

    @staticmethod
    def _csv_cell(value):
        if isinstance(value, (list, dict)):
            return json.dumps(value)
        return '' if value is None else value

    def run(self) -> int:
        """Run the command, print its records and return the exit code."""
        records = self.execute()
        self.emit(records)
        self.stdout.flush()
        return self.exit_code


class ClassifyCommand(BaseCommand):
    """Deficient subsets of a table file, with the diagram of its pair configuration."""

    def execute(self):
        with open(self.args.table, 'rb') as f:
            raw = f.read()
        try:
            text = raw.decode('utf-8')
        except UnicodeDecodeError as e:
            raise TableFormatError(f"not UTF-8 text (byte {raw[e.start]:#04x})", raw.count(b'\n', 0, e.start) + 1)
        table = parse_table(text)
        query = _query_from(self.args)
        pair_view = query.subset_size == 2 and table.arity == 2
        records = []
        for subset, signature in deficient_subsets(table, query):
            if pair_view and signature.deficiency_type is DeficiencyType.T0 and not self.args.include_t0:
                continue
            records.append(signature.to_dict())
        summary: Dict[str, Any] = {"n": table.order, "d": table.arity, "subsets": len(records)}
        if pair_view:
            config = config_of_table(table, include_t0=self.args.include_t0)
            typed = config.without_t0()
            summary["configuration"] = config.to_dict()["edges"]
            summary["diagram"] = diagram_of(typed).to_dict() if typed.edges else None
        records.append(summary)
        self.say(f"📋 {len(records) - 1} qualifying subsets in a table of order {table.order}")
        return records


class TheoryCommand(BaseCommand):
    """Closed-form rates, limits and counts."""

    def execute(self):
        handlers = {
            'pair2': self._pair2,
            'per-type': self._per_type,
            'dary': self._dary,
            'exceedance': self._exceedance,
            'partial-sum': self._partial_sum,
            'expected-count': self._expected_count,
            'class-counts': self._class_counts,
            'vanishing-bound': self._vanishing_bound,
        }
        return handlers[self.args.kind]()

    @staticmethod
    def _limit_record(quantity: str, rate: Fraction, conjectural: bool = False) -> Dict[str, Any]:
        return {
            "quantity": quantity,
            "rate": exact_string(rate),
            "exact": f"1 - exp(-{exact_string(rate)})",
            "real": comb.limit_probability(rate),
            "complement": math.exp(-float(rate)),
            "conjectural": conjectural,
        }

    def _pair2(self):
        return [self._limit_record("pair2", Fraction(7, 2))]

    def _per_type(self):
        return [self._limit_record("per-type", Fraction(1, 2))]

    def _dary(self):
        d = self.args.d
        return [self._limit_record("dary", comb.rate_dary(d), comb.rate_dary_is_conjectural(d))]

    def _exceedance(self):
        s = self.args.s
        return [self._limit_record("exceedance", comb.rate_exceedance(s), comb.rate_exceedance_is_conjectural(s))]

    def _partial_sum(self):
        try:
            rate = Fraction(self.args.rate)
        except (ValueError, ZeroDivisionError):
            raise QueryError(f"rate must be a rational like 7/2, got {self.args.rate!r}")
        if rate < 0:
            raise QueryError(f"rate must be nonnegative, got {self.args.rate!r}")
        records = []
        for k in range(1, self.args.K + 1):
            value = comb.partial_ie_sum_exact(rate, k)
            records.append({
                "quantity": "partial-sum",
                "K": k,
                "exact": exact_string(value),
                "real": float(value),
                "bound": "upper" if k % 2 == 1 else "lower",
                "conjectural": False,
            })
        self.say(f"📊 limit 1 - exp(-{exact_string(rate)}) = {comb.limit_probability(rate):.10f}")
        return records

    def _expected_count(self):
        n = _require(self.args, 'n')
        value = comb.expected_count(n, self.args.d, self.args.s, self.args.eps)
        limit = comb.limit_rate(self.args.d, self.args.s, self.args.eps)
        return [{
            "quantity": "expected-count",
            "n": n, "d": self.args.d, "s": self.args.s, "eps": self.args.eps,
            "exact": exact_string(value),
            "real": float(value),
            "limit": None if limit is None else exact_string(limit),
            "conjectural": False,
        }]

    def _class_counts(self):
        k = self.args.k
        values = [
            ("disjoint-pair-classes", comb.disjoint_pair_class_count(k)),
            ("nondisjoint-class-bound", comb.nondisjoint_class_bound(k)),
            ("disjoint-triple-classes", comb.disjoint_triple_class_count(k)),
        ]
        return [{"quantity": name, "k": k, "exact": str(value), "real": float(value), "conjectural": False}
                for name, value in values]

    def _vanishing_bound(self):
        n = _require(self.args, 'n')
        value = comb.exceedance_vanishing_bound(n, self.args.s, self.args.eps)
        return [{
            "quantity": "vanishing-bound",
            "n": n, "s": self.args.s, "eps": self.args.eps,
            "exact": exact_string(value),
            "real": float(value),
            "conjectural": False,
        }]


class ExactCommand(BaseCommand):
    uses_kernels = True

    def execute(self):
        result = exact_probability(_require(self.args, 'n'), _query_from(self.args),
                                   d=self.args.d, force=self.args.force)
        self.say(f"✅ n={result.n}: p = {result.probability}, mean count = {result.mean_count}")
        return [result.to_dict()]


class McCommand(BaseCommand):
    uses_kernels = True

    def execute(self):
        n = _require(self.args, 'n')
        samples = _require(self.args, 'samples')
        query = _query_from(self.args)
        if self.args.mean:
            return [mc_mean_count(n, query, samples, self.args.seed, d=self.args.d).to_dict()]
        return [mc_probability(n, query, samples, self.args.seed, d=self.args.d).to_dict()]


class SweepCommand(BaseCommand):
    uses_kernels = True

    def execute(self):
        rows = sweep(self.args.n_list, _query_from(self.args), _require(self.args, 'samples'),
                     self.args.seed, d=self.args.d)
        self.csv_header = SweepRow.CSV_HEADER
        self.csv_rows = [row.csv_row() for row in rows]
        for row in rows:
            self.say(f"📊 n={row.estimate.n}: p_hat={row.estimate.p_hat:.4f}, "
                     f"1-exp(-lambda_n)={row.poisson_approx:.4f}, limit={row.limit:.4f}")
        return [row.to_dict() for row in rows]


class DiagramsCommand(BaseCommand):
    def execute(self):
        k = self.args.k
        realizable_only = self.args.realizable_only
        if self.args.list:
            records = []
            for diagram in iter_diagrams(k, realizable_only=realizable_only):
                record = diagram.to_dict()
                record["realizable"] = realizable_only or realizable(diagram)
                record["perfect_matching"] = diagram.is_perfect_matching
                if record["realizable"]:
                    record.update(stats(diagram).to_dict())
                records.append(record)
            self.say(f"📋 {len(records)} diagrams with k={k}")
            return records
        count = count_diagrams(k, realizable_only=realizable_only)
        graphs = list(iter_base_graphs(k))
        matchings = sum(1 for v, _ in graphs if v == 2 * k)
        self.say(f"📊 {count} diagrams with k={k} over {len(graphs)} base graphs")
        return [{
            "k": k,
            "realizable_only": realizable_only,
            "count": count,
            "base_graphs": len(graphs),
            "perfect_matchings": matchings * len(DeficiencyType.nonconstant()) ** k,
        }]


class VerifyLemma3Command(BaseCommand):
    def execute(self):
        report = verify_lemma3(self.args.k_max)
        if report.ok:
            self.say(f"✅ checked {report.checked}, violations 0")
        else:
            self.say(f"❌ checked {report.checked}, violations {len(report.violations)}")
            self.exit_code = EXIT_VIOLATION
        return [report.to_dict()]


class WitnessCommand(BaseCommand):
    def execute(self):
        text = self.args.diagram
        if text.startswith('@'):
            with open(text[1:], 'r', encoding='utf-8') as f:
                text = f.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise DiagramError(f"diagram is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise DiagramError("diagram JSON must be an object with 'v' and 'edges'")
        diagram = Diagram.from_dict(data)
        table = witness_groupoid(diagram)
        verified = carries_diagram(table, diagram)
        if not verified:
            self.exit_code = EXIT_VIOLATION
            self.say(f"❌ witness of order {table.order} does not carry the diagram")
        else:
            self.say(f"✅ witness of order {table.order}")
        return [{
            "diagram": diagram.to_dict(),
            "n": table.order,
            "table": serialize_table(table),
            "verified": verified,
        }]


class HistogramCommand(BaseCommand):
    uses_kernels = True

    def execute(self):
        histogram = count_distribution(_require(self.args, 'n'), _require(self.args, 'samples'),
                                       self.args.seed, include_t0=self.args.include_t0)
        self.say(f"📊 mean {histogram.mean:.4f} vs lambda_n {float(histogram.rate):.4f}, "
                 f"TV distance {histogram.tv_distance:.4f}")
        return [histogram.to_dict()]


class IndependenceCommand(BaseCommand):
    uses_kernels = True

    def execute(self):
        report = independence_check(_require(self.args, 'n'), _require(self.args, 'samples'), self.args.seed)
        self.say(f"📊 max off-diagonal correlation {report.max_off_diagonal:.4f}")
        return [report.to_dict()]
