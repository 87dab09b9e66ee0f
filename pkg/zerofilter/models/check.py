from dataclasses import dataclass
from typing import Tuple

SUITES = ("spectral", "lp", "oracle", "conservation")


@dataclass(frozen=True)
class CheckResult:
    """One measured quantity against its tolerance."""

    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def __str__(self):
        verdict = "ok" if self.passed else "FAIL"
        text = f"[{verdict}] {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"
        return f"{text} {self.detail}" if self.detail else text


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    @property
    def failures(self):
        return [check for check in self.checks if not check.passed]
