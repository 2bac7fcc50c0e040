"""Exception types shared across the toolkit.

Every error carries a stable machine-readable ``code`` that the CLI emits in
its final JSON error record.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""

    code = "ToolkitError"


class MalformedLineError(ToolkitError):
    """A triple file line does not have exactly 3 tab-separated fields."""

    code = "MalformedLine"

    def __init__(self, line_no: int, reason: str = "expected 3 tab-separated fields"):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class ReservedRelationError(ToolkitError):
    """An input relation name collides with the reserved inverse suffix."""

    code = "ReservedRelation"


class EntityOverlapError(ToolkitError):
    code = "EntityOverlap"

    def __init__(self, shared: list[str]):
        preview = ", ".join(shared[:5])
        super().__init__(
            f"train and inference graphs share {len(shared)} entities (e.g. {preview})"
        )
        self.shared = shared


class UnknownRelationError(ToolkitError):
    code = "UnknownRelation"

    def __init__(self, relation: str):
        super().__init__(f"relation {relation!r} is absent from the training graph")
        self.relation = relation


class DanglingTestEntityError(ToolkitError):
    code = "DanglingTestEntity"

    def __init__(self, entity: str):
        super().__init__(f"test entity {entity!r} is absent from the inference graph")
        self.entity = entity


class UnknownEntityError(ToolkitError):
    code = "UnknownEntity"

    def __init__(self, entity: object):
        super().__init__(f"entity {entity!r} is not in the graph vocabulary")
        self.entity = entity


class TooFewEntitiesError(ToolkitError):
    code = "TooFewEntities"


class QueryMismatchError(ToolkitError):
    code = "QueryMismatch"

    def __init__(self, a: tuple, b: tuple):
        super().__init__(f"score sets answer different queries: {a} vs {b}")


class AnswerNotInSetError(ToolkitError):
    code = "AnswerNotInSet"


class AnswerMissingError(ToolkitError):
    code = "AnswerMissing"


class MalformedRecordError(ToolkitError):
    code = "MalformedRecord"

    def __init__(self, line_no: int, reason: str = "expected 4 tab-separated fields"):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class ScoreOutOfRangeError(ToolkitError):
    code = "ScoreOutOfRange"

    def __init__(self, line_no: int, value: float):
        super().__init__(f"line {line_no}: score {value} outside [0, 1]")
        self.line_no = line_no
        self.value = value


class NotEnoughEntitiesError(ToolkitError):
    code = "NotEnoughEntities"


class ConfigError(ToolkitError):
    code = "ConfigError"
