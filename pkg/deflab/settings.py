import logging
import os
import sys

from dotenv import load_dotenv

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
load_dotenv(os.path.join(PROJECT_ROOT, '.env.local'))

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Exhaustive enumeration: tables at or above this count need --force.
EXHAUSTIVE_TABLE_LIMIT = 2 ** 32
# Below this count the exhaustive census runs in pure Python.
PYTHON_EXHAUSTIVE_LIMIT = 2 ** 20
# Compiled kernels address tables with int64 indices.
INDEX_LIMIT = 2 ** 63

DIAGRAM_EDGE_LIMIT = 4
LEMMA3_EDGE_LIMIT = 3

MC_CHUNK = int(os.environ.get('DEFLAB_MC_CHUNK', '16384'))


class DeflabException(Exception):
    """Base exception for everything raised by deflab."""
    pass


class TableFormatError(DeflabException):
    """Raised when a table file cannot be parsed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TableError(DeflabException):
    """Raised for operation tables with a bad shape or out-of-range values."""
    pass


class QueryError(DeflabException):
    """Raised for invalid subset queries, indices or parameter combinations."""
    pass


class DiagramError(DeflabException):
    """Raised for invalid configurations or diagrams."""
    pass


class UnrealizableDiagramError(DiagramError):
    """Raised when a diagram is asked for a model it does not have."""
    pass


class GuardExceededError(DeflabException):
    """Raised when an enumeration would exceed its configured guard."""
    pass


def configure_logging(level: str = None) -> None:
    """Send log records to stderr; stdout is reserved for machine output."""
    level = level or os.environ.get('DEFLAB_LOG_LEVEL', 'INFO')
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )


def default_threads() -> int:
    """Thread count for compiled kernels: DEFLAB_THREADS, else all cores."""
    import numba

    env_value = os.environ.get('DEFLAB_THREADS')
    if env_value:
        try:
            threads = int(env_value)
        except ValueError:
            raise DeflabException(f"DEFLAB_THREADS must be an integer, got {env_value!r}")
        if threads < 1:
            raise DeflabException("DEFLAB_THREADS must be at least 1")
        return min(threads, numba.config.NUMBA_NUM_THREADS)
    return numba.config.NUMBA_NUM_THREADS


def apply_threads(threads: int = None) -> int:
    """Set the numba worker count and return the value actually used."""
    import numba

    if threads is None:
        threads = default_threads()
    threads = max(1, min(threads, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    return threads
