"""Exception types shared across the engine."""

from __future__ import annotations

from dataclasses import dataclass


class EngineError(Exception):
    """Base class for all engine errors."""


# --- catalog ---------------------------------------------------------------

class MissingFile(EngineError):
    """A referenced file does not exist or is unreadable."""


class MalformedManifest(EngineError):
    """The manifest could not be parsed or fails document-level checks."""


@dataclass(frozen=True)
class CatalogIssue:
    """One validation failure found while loading a catalog.

    kind is a stable token: "duplicate_page_id", "missing_field",
    "bad_field", "bad_locale", "invalid_asset", "missing_asset_file".
    """
    kind: str
    page_id: str
    detail: str

    def __str__(self) -> str:
        return f"[{self.kind}] page {self.page_id!r}: {self.detail}"


class CatalogValidationError(EngineError):
    """Aggregate of every page-level problem found in one validation pass."""

    def __init__(self, issues: list[CatalogIssue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))

    def pages(self) -> set[str]:
        return {i.page_id for i in self.issues}

    def kinds(self) -> set[str]:
        return {i.kind for i in self.issues}


class EmptyCatalog(EngineError):
    """Selection requested from a catalog with no pages."""


class InvalidMuisId(EngineError):
    """Archive identifier is empty or cannot be escaped into a URL."""


# --- transcript ------------------------------------------------------------

class InvalidParams(EngineError):
    """Animation parameters must all be positive."""


# --- media scheduling ------------------------------------------------------

class TimeBeforeEpoch(EngineError):
    """Frame position requested for a time before the slot's epoch."""


class NegativeInterval(EngineError):
    """Clock-sync timestamps violate t4 >= t1 or t3 >= t2."""


class UnknownSlot(EngineError):
    """A frame report referenced a tower slot that is not occupied."""


# --- protocol / server -----------------------------------------------------

class SchemaViolation(EngineError):
    """A wire message failed schema validation."""


class RoleViolation(EngineError):
    """A connection sent a message its role is not allowed to send."""


class DuplicateRole(EngineError):
    """A second connection tried to claim an exclusive role."""


# --- simulator -------------------------------------------------------------

class ScriptInvalid(EngineError):
    """A scenario script failed validation."""
