"""Structured pass/fail reports shared by every check in the toolkit.

A check computes named numerical residuals and compares each against a
tolerance.  The report keeps the raw numbers so that a verdict can always be
re-derived (and serialized) without re-running the check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS = "PASS"
FAIL = "FAIL"
INFO = "INFO"


@dataclass
class CheckItem:
    """One named residual with its tolerance and verdict.

    ``tol is None`` marks a measurement-only item: the value is recorded but
    never asserted against anything.
    """

    name: str
    residual: float
    tol: float | None = None
    passed: bool | None = None
    note: str = ""

    def __post_init__(self) -> None:
        self.residual = float(self.residual)
        if self.tol is not None and self.passed is None:
            self.passed = self.residual <= self.tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "residual": self.residual,
            "tol": self.tol,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class CheckReport:
    """Outcome of one verification run.

    Verdict rule: FAIL iff any asserted item exceeds its tolerance, INFO for
    measurement-only checks, PASS otherwise.  ``witnesses`` carries serialized
    matrices/regions that explain a failure.
    """

    name: str
    items: list[CheckItem] = field(default_factory=list)
    witnesses: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    info_only: bool = False
    wall_time: float = 0.0
    scenario: dict[str, Any] | None = None

    def add(
        self,
        name: str,
        residual: float,
        tol: float | None = None,
        note: str = "",
        passed: bool | None = None,
    ) -> CheckItem:
        item = CheckItem(name=name, residual=residual, tol=tol, passed=passed, note=note)
        self.items.append(item)
        return item

    @property
    def failed_items(self) -> list[CheckItem]:
        return [it for it in self.items if it.passed is False]

    @property
    def verdict(self) -> str:
        if self.failed_items:
            return FAIL
        if self.info_only:
            return INFO
        return PASS

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL

    @property
    def max_residual(self) -> float:
        if not self.items:
            return 0.0
        return max(it.residual for it in self.items)

    def residual(self, name: str) -> float:
        for it in self.items:
            if it.name == name:
                return it.residual
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "items": [it.to_dict() for it in self.items],
            "witnesses": self.witnesses,
            "notes": self.notes,
            "wall_time": self.wall_time,
            "scenario": self.scenario,
        }

    def summary_row(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "max_residual": self.max_residual,
            "tol": min((it.tol for it in self.items if it.tol is not None), default=None),
            "wall_time": self.wall_time,
        }
