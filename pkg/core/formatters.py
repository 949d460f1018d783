"""
Core ergoprobe - Report Formatters
Renders report dataclasses as canonical JSON, CSV tables or short text summaries
"""
import csv
import io
import json
import math
from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import Any, Dict, List

import numpy as np

from .semigroups import SemigroupElement
from .windowed import WindowedSet

# dataclass field names that are Python keywords in the report vocabulary
_RENAMED = {"lambda_": "lambda"}


def to_jsonable(obj: Any) -> Any:
    """Plain JSON data; Fractions become 'p/q' strings so no precision is lost"""
    if is_dataclass(obj) and not isinstance(obj, type):
        if isinstance(obj, SemigroupElement):
            return str(obj)
        return {_RENAMED.get(f.name, f.name): to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, WindowedSet):
        return obj.to_json_dict()
    if isinstance(obj, SemigroupElement):
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted((to_jsonable(x) for x in obj), key=lambda x: (str(type(x)), x))
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return str(obj)


def render_json(tool: str, version: str, config: Dict, report: Any) -> str:
    """Envelope {tool, version, config, report}; sorted keys so equal runs give equal bytes"""
    envelope = {"tool": tool, "version": version, "config": to_jsonable(config),
                "report": to_jsonable(report)}
    return json.dumps(envelope, sort_keys=True, indent=2) + "\n"


def tabular_rows(report: Any) -> List[Dict[str, Any]]:
    """Rows of the tabular report kinds; nested reports have no CSV form"""
    kind = type(report).__name__
    if kind == "WeylSumReport":
        return [{"M": m, "magnitude": v} for m, v in report.trajectory]
    if kind == "ResidueHistogram":
        return [{"residue": j, "count": c} for j, c in enumerate(report.counts)]
    if kind == "DensityEstimate":
        return [{"n": n, "ratio": str(r)} for n, r in enumerate(report.ratios, 1)]
    if kind == "TemperednessReport":
        return [{"n": n, "ratio": r} for n, r in enumerate(report.ratios, report.n_range[0])]
    if kind == "CriterionReport":
        return [{"n": n, "value": v} for n, v in enumerate(report.values, 1)]
    if kind == "GapRunStats":
        return [{"gap": g, "count": c, "first_position": report.first_gap_of_length[g]}
                for g, c in sorted(report.gap_histogram.items())]
    raise ValueError(f"{kind} is not tabular; use --output json")


def render_csv(report: Any) -> str:
    rows = tabular_rows(report)
    buffer = io.StringIO()
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(to_jsonable(rows))
    return buffer.getvalue()


def render_text(report: Any) -> str:
    """One 'key: value' line per scalar field, for the diagnostic stream"""
    data = to_jsonable(report)
    if not isinstance(data, dict):
        return str(data)
    lines = []
    for key in sorted(data):
        value = data[key]
        if isinstance(value, (list, dict)):
            value = f"<{len(value)} entries>"
        lines.append(f"{key}: {value}")
    return "\n".join(lines)
