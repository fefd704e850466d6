"""Exception types shared across the pipeline."""


class SoftcreditError(Exception):
    """Base class for all package errors."""


# --- ingest ---------------------------------------------------------------


class MalformedRepoUrl(SoftcreditError):
    """A URL could not be reduced to an owner/name repository reference."""


class SchemaError(SoftcreditError):
    """A source file row violates the expected schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# --- enrich ---------------------------------------------------------------


class ResolverUnavailable(SoftcreditError):
    """The DOI resolver could not be reached (transient)."""


class BackendError(SoftcreditError):
    """A metadata backend failed in a retryable way."""


class NotFound(SoftcreditError):
    """The backend has no record for the requested identifier."""

    def __init__(self, message: str, reason: str = "not_found"):
        self.reason = reason
        super().__init__(message)


class RepoGone(SoftcreditError):
    """The repository no longer exists (404-equivalent)."""


class RateLimited(SoftcreditError):
    """The backend asked us to slow down."""

    def __init__(self, message: str = "rate limited", retry_after: float | None = None):
        self.retry_after = retry_after
        super().__init__(message)


# --- graphstore -----------------------------------------------------------


class ConstraintViolation(SoftcreditError):
    """A record violates a store invariant (range, uniqueness, foreign key)."""


class SchemaVersionMismatch(SoftcreditError):
    """An export was written with an incompatible schema version."""


# --- matcher --------------------------------------------------------------


class AdapterUnavailable(SoftcreditError):
    """The external scoring model failed or returned an invalid response."""


class DegenerateSplit(SoftcreditError):
    """An entity-disjoint split left one side empty."""


# --- analysis -------------------------------------------------------------


class ZeroTotal(SoftcreditError):
    """Contribution shares requested against a zero repository total."""


class TooFewPublications(SoftcreditError):
    """Coding frequency requires at least three publications."""


# --- stats ----------------------------------------------------------------


class Singular(SoftcreditError):
    """The design matrix is rank deficient."""


class DomainError(SoftcreditError):
    """The response violates the family's domain (e.g. negative counts)."""


class DegenerateTable(SoftcreditError):
    """A contingency table has a zero marginal."""


class DegenerateAgreement(SoftcreditError):
    """Expected agreement is 1, so kappa is undefined."""


# --- annotation service ---------------------------------------------------


class SessionClosed(SoftcreditError):
    """The annotation session does not exist or was closed."""


class UnknownCandidate(SoftcreditError):
    """A label referenced a candidate pair outside the configured set."""


class ValidationError(SoftcreditError):
    """A submitted payload failed validation."""


class InsufficientOverlap(SoftcreditError):
    """No two annotators share a labeled pair."""


# --- pipeline -------------------------------------------------------------


class MissingPrerequisite(SoftcreditError):
    """A pipeline stage was invoked before the stage it depends on."""

    def __init__(self, stage: str, needs: str):
        self.stage = stage
        self.needs = needs
        super().__init__(f"stage '{stage}' requires '{needs}' to have completed")
