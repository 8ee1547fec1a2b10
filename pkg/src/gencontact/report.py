"""Residuals and check records shared by the checks and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

PASS, FAIL, ERROR = "PASS", "FAIL", "ERROR"


@dataclass
class Residual:
    """The largest value of a nonnegative defect over the sample points."""
    name: str
    value: float
    witness: tuple | None = None
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return bool(self.value < self.tol)

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "witness": _point(self.witness),
                "tol": self.tol, "ok": self.ok}


@dataclass
class CheckResult:
    name: str
    status: str
    max_residual: float | None = None
    witness: tuple | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "max_residual": self.max_residual,
                "witness_point": _point(self.witness), "details": self.details}


def _point(p):
    return None if p is None else [float(v) for v in p]


def sup_over(points: Iterable, defect: Callable[[np.ndarray], float], name: str, tol: float) -> Residual:
    """Residual holding max over ``points`` of ``defect(p)`` and the point attaining it."""
    best, where = -1.0, None
    for p in points:
        v = float(defect(p))
        if not np.isfinite(v):
            return Residual(name, float("inf"), tuple(p), tol)
        if v > best:
            best, where = v, tuple(float(c) for c in p)
    return Residual(name, max(best, 0.0), where, tol)


def worst(residuals: Iterable[Residual]) -> Residual:
    """The residual that fails by the largest ratio to its tolerance."""
    return max(residuals, key=lambda r: r.value / r.tol if r.tol > 0 else r.value)


@dataclass
class ResidualSet:
    """Named residuals from one check, all compared against their own tolerance."""
    residuals: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.residuals)

    def __getitem__(self, name: str) -> Residual:
        for r in self.residuals:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def worst(self) -> Residual:
        return worst(self.residuals)

    def as_dict(self) -> dict:
        return {r.name: r.as_dict() for r in self.residuals}
