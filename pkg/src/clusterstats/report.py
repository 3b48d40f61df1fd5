"""Report documents rendered as plain text or canonical JSON."""
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CAVEAT", "ReportDocument", "fmt_p", "fmt_stat", "to_jsonable", "digest"]

CAVEAT = (
    "A p-value is the probability of evidence at least as extreme as that observed, "
    "calculated assuming the null hypothesis of no effect (chance alone) is true. It is not "
    "the probability that the null hypothesis is true, nor the probability that chance "
    "explains the data, and it must not be read as the probability of innocence or guilt. "
    "Statistical significance does not measure the size or importance of an effect, and "
    "an association observed in the data does not by itself establish a cause."
)


def fmt_p(x):
    """p-values and probabilities: 4 significant figures."""
    return _fmt(x, 4)


def fmt_stat(x):
    """Test statistics, estimates and counts: 6 significant figures."""
    return _fmt(x, 6)


def _fmt(x, digits):
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{digits}g}"


def to_jsonable(value):
    """Plain JSON types with full float precision; infinities become ``"inf"``."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def _canonical(value):
    return json.dumps(to_jsonable(value), sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(value):
    return "sha256:" + hashlib.sha256(_canonical(value).encode("utf-8")).hexdigest()


@dataclass
class ReportDocument:
    analysis: str
    inputs: object
    parameters: dict
    results: dict
    warnings: list = field(default_factory=list)
    lines: list = field(default_factory=list)

    @property
    def inputs_digest(self):
        return digest(self.inputs)

    def to_dict(self):
        return {
            "analysis": self.analysis,
            "inputs_digest": self.inputs_digest,
            "parameters": to_jsonable(self.parameters),
            "results": to_jsonable({**self.results, "interpretation": CAVEAT}),
            "warnings": list(self.warnings),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def to_text(self):
        out = [f"== {self.analysis} ==", *self.lines]
        for w in self.warnings:
            out.append(f"warning: {w}")
        out.extend(["", "Interpretation: " + CAVEAT])
        return "\n".join(out) + "\n"
