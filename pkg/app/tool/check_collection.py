"""Collection class for running the oracle suite."""
from typing import List

from app.exceptions import SolverError
from app.logger import logger
from app.schema import CheckResult, CheckStatus
from app.tool.base import BaseCheck


class CheckCollection:
    """A collection of defined checks."""

    def __init__(self, *checks: BaseCheck):
        self.checks = checks
        self.check_map = {check.name: check for check in checks}

    def __iter__(self):
        return iter(self.checks)

    async def execute(self, *, name: str) -> CheckResult:
        check = self.check_map.get(name)
        if not check:
            return CheckResult(name=name, status=CheckStatus.FAILED, detail=f"Check {name} is invalid")
        return await self._run(check)

    async def execute_all(self) -> List[CheckResult]:
        """Execute all checks in the collection sequentially."""
        results = []
        for check in self.checks:
            results.append(await self._run(check))
        return results

    @staticmethod
    async def _run(check: BaseCheck) -> CheckResult:
        try:
            result = await check()
        except SolverError as e:
            result = CheckResult(name=check.name, status=CheckStatus.FAILED, detail=e.message)
        if result:
            logger.info(f"Check {check.name}: passed")
        else:
            logger.warning(f"Check {check.name}: failed {result.detail or ''}".rstrip())
        return result
