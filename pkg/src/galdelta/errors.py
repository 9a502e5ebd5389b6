"""Exception hierarchy.

Every error carries a stable ``code`` and a ``details`` mapping naming the
offending indices, so the CLI can emit a machine-readable error document.
"""
from __future__ import annotations

from typing import Any


class GaldeltaError(Exception):
    code = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_document(self) -> dict:
        return {"error": self.code, "message": self.message, "details": _plain(self.details)}


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value


# -- categories and functors -------------------------------------------------

class CategoryError(GaldeltaError):
    code = "category_error"


class MalformedCategory(CategoryError):
    code = "malformed_category"


class MissingComposite(CategoryError):
    code = "missing_composite"


class NonAssociative(CategoryError):
    code = "non_associative"


class BadIdentity(CategoryError):
    code = "bad_identity"


class NotFunctorial(CategoryError):
    code = "not_functorial"


class SourceTargetMismatch(CategoryError):
    code = "source_target_mismatch"


class NotLayered(CategoryError):
    code = "not_layered"


class BadTransition(CategoryError):
    code = "bad_transition"


class NotDivisibilityChain(GaldeltaError):
    code = "not_divisibility_chain"


# -- simplicial data ---------------------------------------------------------

class SimplicialIdentityViolation(GaldeltaError):
    code = "simplicial_identity_violation"


class LevelOutOfRange(GaldeltaError):
    code = "level_out_of_range"


class BadGroup(GaldeltaError):
    code = "bad_group"


class BadAction(GaldeltaError):
    code = "bad_action"


class SizeGuardExceeded(GaldeltaError):
    code = "size_guard_exceeded"


# -- exodromy ----------------------------------------------------------------

class SearchBudgetExceeded(GaldeltaError):
    code = "search_budget_exceeded"


class NotCartesianInverting(GaldeltaError):
    code = "not_cartesian_inverting"


class EquivalenceFailure(GaldeltaError):
    code = "equivalence_failure"


class OrderTooLarge(GaldeltaError):
    code = "order_too_large"


# -- shape -------------------------------------------------------------------

class MatrixBudgetExceeded(GaldeltaError):
    code = "matrix_budget_exceeded"


# -- documents ---------------------------------------------------------------

class ParseError(GaldeltaError):
    code = "parse_error"
