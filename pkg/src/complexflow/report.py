"""Report containers used by the audits and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class AuditReport:
    """Outcome of a convention audit.

    An audit is informational: it lists every candidate convention with its
    worst residual over the samples and names the ones under ``tolerance``.
    """

    name: str
    tolerance: float
    residuals: dict[str, float] = field(default_factory=dict)
    counterexamples: list[dict[str, Any]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def matching(self) -> list[str]:
        return [k for k, r in self.residuals.items() if r <= self.tolerance]

    @property
    def definitive(self) -> bool:
        """A match is named, or every failure is documented by counterexamples."""
        return len(self.matching) > 0 or len(self.counterexamples) > 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "residuals": dict(self.residuals),
            "matching": self.matching,
            "counterexamples": self.counterexamples,
            "notes": list(self.notes),
        }


@dataclass
class Check:
    name: str
    status: str  # "pass" | "fail" | "info"
    residual: float
    tolerance: float | None
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def check(name: str, residual: float, tolerance: float, detail: str = "") -> Check:
    ok = bool(residual <= tolerance)
    return Check(name, "pass" if ok else "fail", float(residual), tolerance, detail)


def info(name: str, residual: float, detail: str = "") -> Check:
    return Check(name, "info", float(residual), None, detail)


@dataclass
class RunReport:
    command: str
    checks: list[Check] = field(default_factory=list)
    environment: dict[str, Any] = field(default_factory=dict)
    duration: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "checks": [c.to_dict() for c in self.checks],
            "environment": self.environment,
            "duration": self.duration,
        }

    def to_text(self) -> str:
        lines = [f"# {self.command}"]
        for c in self.checks:
            tol = "-" if c.tolerance is None else f"{c.tolerance:.1e}"
            lines.append(f"[{c.status.upper():4s}] {c.name}: residual={c.residual:.3e} tol={tol} {c.detail}".rstrip())
        lines.append(f"duration: {self.duration:.2f}s")
        return "\n".join(lines)
