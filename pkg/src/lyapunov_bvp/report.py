"""Certificate reports: hypothesis checklists, verdicts and oracle cross-checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["HypothesisCheck", "OracleCheck", "CertificateReport", "jsonable"]


def jsonable(x):
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(x, "value") and hasattr(x, "name"):  # enums
        return x.value
    return x


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    measured: object = None
    bound: object = None
    note: str = ""

    def to_dict(self):
        d = {"name": self.name, "measured": jsonable(self.measured),
             "bound": jsonable(self.bound), "passed": bool(self.passed)}
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class OracleCheck:
    """Independent confirmation of a certificate's conclusion.

    ``agreement`` is ``"agree"`` (the oracle confirms the conclusion),
    ``"consistent"`` (the oracle sits on a boundary case compatible with
    the conclusion), ``"inconclusive"`` or ``"disagree"``.
    """

    method: str
    agreement: str
    detail: dict = field(default_factory=dict)

    @property
    def confirms(self):
        return self.agreement in ("agree", "consistent")

    def to_dict(self):
        return {"method": self.method, "agreement": self.agreement, "detail": jsonable(self.detail)}


@dataclass(frozen=True)
class CertificateReport:
    theorem: str
    hypotheses: tuple
    certified: bool
    reason: str = ""
    conclusion: dict = field(default_factory=dict)
    oracle: OracleCheck | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.certified and not all(h.passed for h in self.hypotheses):
            raise ValueError("a certified report needs every hypothesis to pass")

    @property
    def verdict(self):
        return "Certified" if self.certified else f"NotCertified({self.reason})"

    def hypothesis(self, name):
        for h in self.hypotheses:
            if h.name == name:
                return h
        raise KeyError(name)

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "verdict": "Certified" if self.certified else "NotCertified",
            "reason": self.reason or None,
            "conclusion": jsonable(self.conclusion),
            "oracle_crosscheck": self.oracle.to_dict() if self.oracle else None,
            "metadata": jsonable(self.metadata),
        }

    @classmethod
    def from_checks(cls, theorem, checks, conclusion, oracle=None, metadata=None):
        checks = tuple(checks)
        failed = [h.name for h in checks if not h.passed]
        return cls(
            theorem=theorem,
            hypotheses=checks,
            certified=not failed,
            reason="" if not failed else "failed: " + ", ".join(failed),
            conclusion=conclusion if not failed else {},
            oracle=oracle,
            metadata=metadata or {},
        )
