"""Exception hierarchy shared by the whole engine.

Every error carries a stable kebab-case ``code`` so the HTTP layer and the
CLI can map failures to machine-readable envelopes without string matching.
"""

from __future__ import annotations


class BeamTreeError(Exception):
    """Base class for all engine errors."""

    code = "internal-error"

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class InvalidParameterError(BeamTreeError):
    code = "invalid-parameter"


# --- backend errors ---------------------------------------------------------

class UnknownTokenError(BeamTreeError):
    """Out-of-vocabulary input for a closed-vocabulary backend."""

    code = "unknown-token"


class ContextEmptyError(BeamTreeError):
    code = "context-empty"


class LayerOutOfRangeError(BeamTreeError):
    code = "layer-out-of-range"


class CapabilityError(BeamTreeError):
    """Backend lacks a required capability flag."""

    code = "capability-missing"


class NotTrainableError(CapabilityError):
    code = "not-trainable"


class TrainingDivergedError(BeamTreeError):
    code = "training-diverged"


class UnknownSnapshotError(BeamTreeError):
    code = "unknown-snapshot"


class BackendUnavailableError(BeamTreeError):
    """Remote backend unreachable or timed out."""

    code = "backend-unavailable"


# --- tree errors ------------------------------------------------------------

class EmptyPromptError(BeamTreeError):
    code = "empty-prompt"


class UnknownNodeError(BeamTreeError):
    code = "unknown-node"


class ZeroProbabilityError(BeamTreeError):
    """A candidate with probability 0 has no defined log-score."""

    code = "zero-probability"


class CannotRemoveRootError(BeamTreeError):
    code = "cannot-remove-root"


class EndNotLeafError(BeamTreeError):
    code = "end-not-leaf"


class StartEndConflictError(BeamTreeError):
    code = "start-not-ancestor-of-end"


class MalformedTreeError(BeamTreeError):
    """Tree file fails to parse or violates the schema."""

    code = "malformed-tree"


class SchemaVersionError(MalformedTreeError):
    code = "schema-version-mismatch"


# --- decoder errors ---------------------------------------------------------

class PlaceholderError(BeamTreeError):
    """Comparative template must contain exactly one placeholder."""

    code = "bad-placeholder"


# --- semantics / ontology errors --------------------------------------------

class KeywordNotFoundError(BeamTreeError):
    code = "keyword-not-found"


class DimensionMismatchError(BeamTreeError):
    code = "dimension-mismatch"


class NetworkCycleError(BeamTreeError):
    code = "cycle-detected"


class DanglingReferenceError(BeamTreeError):
    code = "dangling-reference"


class NoSynsetFoundError(BeamTreeError):
    code = "no-synset-found"


class FixtureFormatError(BeamTreeError):
    code = "malformed-fixture"


# --- analysis errors --------------------------------------------------------

class EmptyWordListError(BeamTreeError):
    code = "empty-wordlist"


# --- service errors ---------------------------------------------------------

class WorkspaceLockedError(BeamTreeError):
    code = "workspace-locked"


class CorruptDataError(BeamTreeError):
    """Names the offending file in ``detail``."""

    code = "corrupt-data"


class NotFoundError(BeamTreeError):
    code = "not-found"


class ConflictError(BeamTreeError):
    code = "conflict"


class ReadOnlyError(BeamTreeError):
    code = "read-only"


def error_class_for_code(code: str) -> type[BeamTreeError]:
    """Resolve a wire-level error code back to its exception class.

    Unknown codes fall back to the base class so remote peers with newer
    vocabularies still raise something catchable.
    """

    def walk(cls):
        yield cls
        for sub in cls.__subclasses__():
            yield from walk(sub)

    for cls in walk(BeamTreeError):
        if cls.code == code:
            return cls
    return BeamTreeError
