from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict

from app.schema import CheckResult, CheckStatus


class BaseCheck(ABC, BaseModel):
    """One oracle of the validation suite."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    description: str

    async def __call__(self) -> CheckResult:
        """Run the check."""
        return await self.execute()

    @abstractmethod
    async def execute(self) -> CheckResult:
        """Run the check and report what was measured."""

    def passed(self, measured: Dict[str, Any], detail: Optional[str] = None) -> CheckResult:
        return CheckResult(name=self.name, status=CheckStatus.PASSED, measured=measured, detail=detail)

    def failed(self, measured: Dict[str, Any], detail: Optional[str] = None) -> CheckResult:
        return CheckResult(name=self.name, status=CheckStatus.FAILED, measured=measured, detail=detail)

    def verdict(self, ok: bool, measured: Dict[str, Any], detail: Optional[str] = None) -> CheckResult:
        return self.passed(measured, detail) if ok else self.failed(measured, detail)
