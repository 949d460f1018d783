"""
Core ergoprobe - Sequence Grammar
Parses the textual forms 'pow:3/2', 'affsqrt:2,2', 'nlogn', 'nsqlog', 'logpow:2', 'poly:1,0,0'
"""
from ..exceptions import GrammarError
from ..numbers import HighPrecisionReal
from .analytic import LogPower, NLogN, NSqOverLog, RealPolynomial, RealPower
from .base import SequenceSpec
from .exact import AffineSqrt, RationalPolynomial, RationalPower


def _split_args(body: str, kind: str):
    parts = [p.strip() for p in body.split(",")]
    if not body.strip() or any(not p for p in parts):
        raise GrammarError(f"{kind}: missing parameters")
    return parts


def _parse_natural(text: str, kind: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise GrammarError(f"{kind}: expected an integer, got {text!r}") from e
    return value


def parse_sequence_spec(text: str) -> SequenceSpec:
    """Build a SequenceSpec from its canonical text form"""
    if isinstance(text, SequenceSpec):
        return text
    source = text.strip()
    kind, _, body = source.partition(":")
    kind = kind.lower()

    if kind == "pow":
        c = HighPrecisionReal(body)
        if c.is_rational:
            f = c.as_fraction()
            return RationalPower(f.numerator, f.denominator)
        return RealPower(c)

    if kind == "affsqrt":
        parts = _split_args(body, kind)
        if len(parts) != 2:
            raise GrammarError(f"affsqrt: expected 'affsqrt:a,b', got {source!r}")
        return AffineSqrt(_parse_natural(parts[0], kind), _parse_natural(parts[1], kind))

    if kind == "nlogn" and not body:
        return NLogN()

    if kind in ("nsqlog", "nsqoverlog") and not body:
        return NSqOverLog()

    if kind == "logpow":
        return LogPower(HighPrecisionReal(body))

    if kind == "poly":
        coeffs = [HighPrecisionReal(p) for p in _split_args(body, kind)]
        if all(c.is_rational for c in coeffs):
            return RationalPolynomial([c.as_fraction() for c in coeffs])
        return RealPolynomial(coeffs)

    raise GrammarError(f"unknown sequence spec {source!r} "
                       "(expected pow:, affsqrt:, nlogn, nsqlog, logpow:, poly:)")



