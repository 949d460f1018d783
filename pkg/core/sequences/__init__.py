# Sequence specs package
from .base import FloorResult, SequenceSpec
from .exact import AffineSqrt, RationalPolynomial, RationalPower
from .analytic import LogPower, NLogN, NSqOverLog, RealPolynomial, RealPower
from .grammar import parse_sequence_spec
from .evaluation import floor_eval, floor_values, frac_eval, integer_root

__all__ = ['FloorResult', 'SequenceSpec', 'AffineSqrt', 'RationalPolynomial', 'RationalPower',
           'LogPower', 'NLogN', 'NSqOverLog', 'RealPolynomial', 'RealPower',
           'parse_sequence_spec', 'floor_eval', 'floor_values', 'frac_eval', 'integer_root']
