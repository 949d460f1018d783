# Core package
__version__ = "0.1.0"

from .config import PrecisionPolicy, RunConfig, Thresholds, setup_logging
from .exceptions import ErgoprobeError, IndeterminateResult
from .numbers import HighPrecisionReal
from .windowed import WindowedSet, parse_set
from .database import ReportArchive
from .formatters import render_csv, render_json

__all__ = ['__version__', 'PrecisionPolicy', 'RunConfig', 'Thresholds', 'setup_logging',
           'ErgoprobeError', 'IndeterminateResult', 'HighPrecisionReal', 'WindowedSet',
           'parse_set', 'ReportArchive', 'render_csv', 'render_json']
