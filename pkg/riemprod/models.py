"""Pydantic models for residual reports, verdicts, and JSON file formats."""
from enum import Enum
from typing import Dict, List, Optional

import math
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ResidualReport(BaseModel):
    """Worst-entry comparison of two tensors against a relative tolerance."""
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    max_abs_residual: float = Field(..., ge=0.0)
    scale: float = Field(..., ge=0.0)
    relative: float = Field(..., ge=0.0)
    tol: float = Field(..., gt=0.0)
    passed: bool = Field(..., alias="pass")
    label: Optional[str] = Field(default=None, description="Name of the check that produced this report")

    @property
    def ratio(self) -> float:
        """Relative residual measured in units of the tolerance."""
        return self.relative / self.tol


class TheoremId(str, Enum):
    """Identities the verification suite can check."""
    T21 = "T21"
    T31 = "T31"
    T41 = "T41"
    T42 = "T42"
    T51 = "T51"
    T52 = "T52"
    T61 = "T61"
    T62 = "T62"
    C63 = "C63"
    EQ24 = "EQ24"
    EQ19 = "EQ19"
    ALGEBRA = "ALGEBRA"
    CLASSIFY = "CLASSIFY"


class TheoremVerdict(BaseModel):
    """Outcome of one seeded verification trial."""
    model_config = ConfigDict(populate_by_name=True)

    theorem_id: TheoremId
    n: int
    epsilon: int
    seed: int
    params: Dict[str, float] = Field(default_factory=dict)
    max_abs_residual: float
    relative: float
    tol: float
    passed: bool = Field(..., alias="pass")
    worst_check: Optional[str] = None
    detail: Dict[str, float] = Field(default_factory=dict, description="Relative residual per sub-check")
    error: Optional[str] = None

    @property
    def sort_key(self):
        return (self.theorem_id.value, self.n, self.epsilon, self.seed)


class ControlVerdict(BaseModel):
    """Outcome of a negative control: generic data must break the identity."""
    model_config = ConfigDict(populate_by_name=True)

    theorem_id: TheoremId
    n: int
    epsilon: int
    master_seed: int
    attempts: int
    exceeded: int
    threshold: float
    min_exceeded: int
    passed: bool = Field(..., alias="pass")

    @property
    def sort_key(self):
        return (self.theorem_id.value, self.n, self.epsilon, self.master_seed)


class ReportSummary(BaseModel):
    """Verdict counts."""
    total: int
    passed: int
    failed: int


class ReportFile(BaseModel):
    """Seeded verification report written by the verify command."""
    version: str
    master_seed: int
    suites: List[TheoremVerdict] = Field(default_factory=list)
    controls: List[ControlVerdict] = Field(default_factory=list)
    summary: ReportSummary

    @model_validator(mode="after")
    def check_summary(self) -> "ReportFile":
        outcomes = [v.passed for v in self.suites] + [c.passed for c in self.controls]
        if self.summary.total != len(outcomes) or self.summary.passed != sum(outcomes) \
                or self.summary.failed != len(outcomes) - sum(outcomes):
            raise ValueError("summary counts do not match the verdict lists")
        return self

    @property
    def all_passed(self) -> bool:
        return self.summary.failed == 0


class ClassLabel(str, Enum):
    """Classes recognised by the classifier, ordered from smallest to largest."""
    W0 = "W0"
    W3BAR = "W3bar"
    W6BAR = "W6bar"
    W1 = "W1"


class ClassReport(BaseModel):
    """Least-residual classification of an F tensor."""
    model_config = ConfigDict(populate_by_name=True)

    residuals: Dict[ClassLabel, float]
    best: ClassLabel
    passed: bool = Field(..., alias="pass")
    tol: float
    theta_recovered: List[float]
    theta_v: List[float]
    theta_h: List[float]
    theta_v_norm: float
    theta_h_norm: float
    observed_sign: Optional[int] = Field(
        default=None, description="Sign s with theta(Px) = s*theta(x), or None when mixed or zero"
    )


def _all_finite(values) -> bool:
    if isinstance(values, (list, tuple)):
        return all(_all_finite(v) for v in values)
    return isinstance(values, (int, float)) and math.isfinite(values)


def _shape(values) -> tuple:
    if isinstance(values, (list, tuple)):
        if not values:
            return (0,)
        inner = {_shape(v) for v in values}
        if len(inner) != 1:
            raise ValueError("ragged nested array")
        return (len(values),) + inner.pop()
    return ()


class InstanceFile(BaseModel):
    """JSON instance: point structure plus optional Lee form, connection and tensors."""
    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(..., ge=2)
    epsilon: int
    g: List[List[float]]
    P: List[List[float]]
    theta: Optional[List[float]] = None
    lam: Optional[float] = Field(default=None, alias="lambda")
    mu: Optional[float] = None
    H: Optional[List[List[float]]] = None
    Rprime: Optional[List[List[List[List[float]]]]] = None
    F: Optional[List[List[List[float]]]] = None
    seed: Optional[int] = None

    @field_validator("epsilon")
    @classmethod
    def check_epsilon(cls, value: int) -> int:
        if value not in (-1, 1):
            raise ValueError("epsilon must be +1 or -1")
        return value

    @model_validator(mode="after")
    def check_shapes(self) -> "InstanceFile":
        dim = 2 * self.n
        expected = {
            "g": (dim, dim),
            "P": (dim, dim),
            "theta": (dim,),
            "H": (dim, dim),
            "Rprime": (dim,) * 4,
            "F": (dim,) * 3,
        }
        for name, shape in expected.items():
            values = getattr(self, name)
            if values is None:
                continue
            if _shape(values) != shape:
                raise ValueError(f"{name} must have shape {shape}")
            if not _all_finite(values):
                raise ValueError(f"{name} contains non-finite entries")
        return self


class ContractionRecord(BaseModel):
    """Serialized Ricci-type contractions of a tensor."""
    rho: List[List[float]]
    tau: float
    rho_star: List[List[float]]
    tau_star: float


class InvariantRecord(BaseModel):
    """One invariant tensor with its contractions."""
    tensor: List[List[List[List[float]]]]
    contractions: ContractionRecord


class InvariantsFile(BaseModel):
    """Output of the invariants command."""
    n: int
    epsilon: int
    tensors: Dict[str, InvariantRecord]
