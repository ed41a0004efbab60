from .models import (CellSignature, CountEstimate, CountHistogram, DeficiencyType, DiagonalClass,
                     EstimateRecord, ExactResult, IndependenceReport, OperationTable, SamplerKey,
                     SubsetQuery, SweepRow)
from .settings import (PROJECT_ROOT, DeflabException, DiagramError, GuardExceededError, QueryError, TableError,
                       TableFormatError, UnrealizableDiagramError)
from .core import (cell_signature, classify_pair, deficient_subsets, exceedance, image, parse_table,
                   serialize_table)
from .diagrams import (Configuration, ConstraintSystem, Diagram, DiagramStats, canonicalize,
                       compile_constraints, config_of_table, diagram_of, enumerate_diagrams, equivalent,
                       realizable, stats, verify_lemma3, witness_groupoid)
from .estimation import (cell_value, count_distribution, exact_probability, independence_check,
                         mc_mean_count, mc_probability, sample_indicator, sweep)

__all__ = [
    'CellSignature',
    'Configuration',
    'ConstraintSystem',
    'CountEstimate',
    'CountHistogram',
    'DeficiencyType',
    'DeflabException',
    'Diagram',
    'DiagramError',
    'DiagramStats',
    'DiagonalClass',
    'EstimateRecord',
    'ExactResult',
    'GuardExceededError',
    'IndependenceReport',
    'OperationTable',
    'QueryError',
    'SamplerKey',
    'SubsetQuery',
    'SweepRow',
    'TableError',
    'TableFormatError',
    'UnrealizableDiagramError',
    'canonicalize',
    'cell_signature',
    'cell_value',
    'classify_pair',
    'compile_constraints',
    'config_of_table',
    'count_distribution',
    'deficient_subsets',
    'diagram_of',
    'enumerate_diagrams',
    'equivalent',
    'exact_probability',
    'exceedance',
    'image',
    'independence_check',
    'mc_mean_count',
    'mc_probability',
    'parse_table',
    'realizable',
    'sample_indicator',
    'serialize_table',
    'stats',
    'sweep',
    'verify_lemma3',
    'witness_groupoid',
]
