"""Shared exception types.

Every layer raises these; the CLI maps them to exit codes and the HTTP
service maps them to status codes, so the set is kept small and stable.
"""

from __future__ import annotations


class CloudRiskError(Exception):
    """Base class for all tool errors."""

    code = "error"


class ValidationError(CloudRiskError):
    """Malformed or out-of-range input data.

    ``details`` carries field-level diagnostics, one string per offending
    field/cell, so reports can name exactly what is wrong.
    """

    code = "validation_error"

    def __init__(self, message: str, details: list[str] | None = None):
        super().__init__(message)
        self.details = details or []

    def __str__(self) -> str:
        base = super().__str__()
        if self.details:
            return base + "\n  " + "\n  ".join(self.details)
        return base


class StructuralError(ValidationError):
    """A document or matrix is structurally wrong (missing/extra entries)."""

    code = "structural_error"


class UnknownIdError(CloudRiskError):
    """A referenced identifier does not resolve."""

    code = "unknown_id"


class StateError(CloudRiskError):
    """Operation not permitted in the current state (e.g. finalized session)."""

    code = "state_error"


class ConflictError(CloudRiskError):
    """Lost update / duplicate non-idempotent request / write lock held."""

    code = "conflict"


class DeadlockError(StateError):
    """An estimation session hit its round cap without reaching consensus."""

    code = "deadlock"


class StoreError(CloudRiskError):
    """Store unusable: unwritable path, held serve lock, corrupt document."""

    code = "store_error"
