from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class Verdict(str, Enum):
    """Outcome of an experiment."""
    PASS = "pass"
    FAIL = "fail"
    DISCREPANCY_LOGGED = "discrepancy-logged"


class ReportRow(BaseModel):
    """One tabulated observation."""
    grid: str = Field(..., description="Grid point descriptor, e.g. 'x=1;s=0'")
    n: float = Field(..., description="Sweep parameter (operator index, or 1/h for Steklov rows)")
    observed: float
    reference: float
    abs_err: float = Field(..., ge=0.0)
    rel_err: float = Field(..., ge=0.0, description="abs_err/|reference|, or abs_err when reference is 0")

    @classmethod
    def build(cls, grid: str, n: float, observed: float, reference: float) -> "ReportRow":
        abs_err = abs(observed - reference)
        rel_err = abs_err / abs(reference) if reference != 0 else abs_err
        return cls(grid=grid, n=float(n), observed=float(observed), reference=float(reference),
                   abs_err=float(abs_err), rel_err=float(rel_err))


class ExperimentReport(BaseModel):
    """Tabular experiment record with a verdict."""
    name: str
    rows: List[ReportRow] = Field(..., min_length=1)
    fitted_order: Optional[float] = None
    verdict: Verdict
    summary: str = ""
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != Verdict.FAIL
