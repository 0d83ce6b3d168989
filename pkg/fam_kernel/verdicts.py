from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Dict, Optional


class CheckStatus(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class CheckResult:
    """
    Outcome of a single check.

    A failing result carries a JSON-serialisable `witness` that reproduces
    the failure (a scenario document, or the coordinates of a suite
    instance).

    """

    name: str
    status: CheckStatus
    detail: str = ""
    witness: Optional[Any] = None

    @classmethod
    def ok(cls, name: str, detail: str = "") -> CheckResult:
        return cls(name, CheckStatus.PASS, detail)

    @classmethod
    def fail(cls, name: str, detail: str = "", witness: Any = None) -> CheckResult:
        return cls(name, CheckStatus.FAIL, detail, witness)

    @classmethod
    def skip(cls, name: str, detail: str = "") -> CheckResult:
        return cls(name, CheckStatus.SKIPPED, detail)

    @classmethod
    def expect(
        cls, name: str, condition: bool, detail: str = "", witness: Any = None
    ) -> CheckResult:
        if condition:
            return cls.ok(name, detail)
        return cls.fail(name, detail, witness)

    @property
    def passed(self) -> bool:
        return self.status is not CheckStatus.FAIL

    def as_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"name": self.name, "status": self.status.value}
        if self.detail:
            data["detail"] = self.detail
        if self.witness is not None:
            data["witness"] = self.witness
        return data
