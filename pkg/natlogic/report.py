import json
from dataclasses import dataclass, field
from typing import Any, Optional

SCHEMA_VERSION = "1"

EXIT_PASS = 0
EXIT_PROPERTY_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_BOUNDS_EXHAUSTED = 3


@dataclass
class Check:
    """Outcome of one property check. Falsy when the property failed."""

    name: str
    passed: bool
    witness: Optional[dict] = None
    note: Optional[str] = None
    skipped: bool = False

    def __bool__(self) -> bool:
        return self.passed

    @classmethod
    def ok(cls, name: str, note: Optional[str] = None) -> "Check":
        return cls(name, True, note=note)

    @classmethod
    def failed(cls, name: str, witness: dict, note: Optional[str] = None) -> "Check":
        return cls(name, False, witness=witness, note=note)

    @classmethod
    def skip(cls, name: str, note: str) -> "Check":
        return cls(name, True, note=note, skipped=True)

    def to_dict(self) -> dict:
        data = {"name": self.name, "passed": self.passed}
        if self.skipped:
            data["skipped"] = True
        if self.witness is not None:
            data["witness"] = self.witness
        if self.note:
            data["note"] = self.note
        return data


@dataclass
class Report:
    command: str
    status: str = "pass"
    verdicts: list[dict] = field(default_factory=list)
    witnesses: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    bounds: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    data: dict[str, Any] = field(default_factory=dict)
    timing: dict[str, float] = field(default_factory=dict)
    strict: bool = False

    def add_check(self, check: Check) -> Check:
        self.checks.append(check)
        if not check.passed:
            self.status = "fail"
            if check.witness is not None:
                self.witnesses.append({"check": check.name, **check.witness})
        return check

    def add_verdict(self, label: str, verdict) -> None:
        entry = {"query": label, **verdict.to_dict()}
        self.verdicts.append(entry)
        if verdict.bound:
            self.bounds.append(verdict.bound)

    def error(self, message: str) -> "Report":
        self.status = "error"
        self.notes.append(message)
        return self

    @property
    def exit_code(self) -> int:
        if self.status == "error":
            return EXIT_INPUT_ERROR
        if self.status == "fail":
            return EXIT_PROPERTY_FAILED
        if self.strict and self.bounds:
            return EXIT_BOUNDS_EXHAUSTED
        return EXIT_PASS

    def to_dict(self, include_timing: bool = True) -> dict:
        data = {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "status": self.status,
            "exit_code": self.exit_code,
            "verdicts": self.verdicts,
            "witnesses": self.witnesses,
            "checks": [check.to_dict() for check in self.checks],
            "bounds": self.bounds,
            "notes": self.notes,
            "data": self.data,
        }
        if include_timing:
            data["timing"] = self.timing
        return data

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=4, sort_keys=True, ensure_ascii=False)

    def dump(self, filename: str, include_timing: bool = True) -> None:
        with open(filename, "w", encoding="utf-8") as file:
            file.write(self.to_json(include_timing))
