"""Request and response models for the HTTP service.

Responses are wrapped in an envelope carrying the originating request id
and exactly one of ``payload`` or ``error``. Error codes come from the
closed set in :mod:`cloudrisk.errors` plus the auth codes used here.
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field

ERROR_CODES = (
    "validation_error",
    "structural_error",
    "unknown_id",
    "state_error",
    "conflict",
    "deadlock",
    "store_error",
    "unauthorized",
    "forbidden",
)


class ErrorInfo(BaseModel):
    code: str
    message: str


class Envelope(BaseModel):
    request_id: str
    payload: Optional[Any] = None
    error: Optional[ErrorInfo] = None


class SessionCreate(BaseModel):
    session_id: str
    quantities: list[str]
    participants: list[str]
    moderator: str
    theta: float = 0.85
    delta: float = 0.05
    max_rounds: int = 10
    org_id: Optional[str] = Field(
        default=None,
        description="when set, quantity targets are resolved against the "
        "org's stored profile/register/catalog",
    )


class EstimateSubmit(BaseModel):
    quantity: str
    value: float


class FinalizeRequest(BaseModel):
    force: bool = False


class AssessmentRun(BaseModel):
    org_id: str
    snapshot_id: Optional[str] = None
    alpha_override: Optional[float] = None


class PlanRequest(BaseModel):
    org_id: str
    snapshot_id: str
    plan: list[str]
    rounding_mode: str = "full"


class OptimizeRequest(BaseModel):
    org_id: str
    snapshot_id: str
    mode: str = "exact"  # exact | greedy
    rounding_mode: str = "full"


class WhatIfRequest(BaseModel):
    org_id: str
    snapshot_id: str
    plan: list[str]
    toggle: str
    rounding_mode: str = "full"
