"""Exception hierarchy. Every error raised by this package derives from ClevrGraphError."""


class ClevrGraphError(Exception):
    """Base class for all clevrgraph errors."""


class LexiconError(ClevrGraphError):
    """Bad lexicon data: non-canonical value, malformed lexicon file, broken invariant."""


class EmptyInputError(ClevrGraphError):
    """Empty or whitespace-only text where a sentence was required."""


class UnclassifiedQuestionError(ClevrGraphError):
    """The question matched none of the classification rules."""


class GraphValidationError(ClevrGraphError):
    """Base for structural-graph validation failures."""


class GraphSchemaError(GraphValidationError):
    """Graph document violates the JSON schema (types, keys, enum values)."""


class DanglingReferenceError(GraphValidationError):
    """An edge references a node id that does not exist."""


class InvariantError(GraphValidationError):
    """A well-formed document breaks a structural invariant (duplicates, modality rules, ...)."""


class SceneValidationError(ClevrGraphError):
    """Base for scene-document validation failures; carries the offending scene index."""

    def __init__(self, message, scene_index=None):
        if scene_index is not None:
            message = f"scene {scene_index}: {message}"
        super().__init__(message)
        self.scene_index = scene_index


class SceneSchemaError(SceneValidationError):
    """Malformed scene JSON: wrong types or missing required keys."""


class SceneValueError(SceneValidationError):
    """An object attribute value is not canonical for its category."""


class SceneShapeError(SceneValidationError):
    """A relationship matrix does not have one row per object."""


class SceneRelationError(SceneValidationError):
    """A relationship entry is reflexive or references an out-of-range object."""


class EmbeddingError(ClevrGraphError):
    """An embedding provider failed; the message names the offending node or edge."""


class ExportError(ClevrGraphError):
    """A feature-bundle payload could not be exported or re-imported."""


class ProjectionError(ClevrGraphError):
    """Base for projection failures (bad parameters, degenerate input)."""


class EmptyGraphError(ProjectionError):
    """Pooling was asked for on a bundle with zero nodes."""


class DegenerateInputError(ProjectionError):
    """Input vectors carry no variance (or are otherwise unusable for projection)."""
