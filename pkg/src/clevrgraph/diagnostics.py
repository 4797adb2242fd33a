"""Non-fatal parse/grounding diagnostics, emitted by the CLI as JSON lines on stderr."""

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Diagnostic:
    """A machine-readable warning that does not abort processing.

    kind is a stable identifier (e.g. "dangling_relation", "ungrounded_mention",
    "scene_inconsistency", "renderer_missing"); context holds kind-specific fields.
    """

    kind: str
    message: str
    context: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {"kind": self.kind, "message": self.message}
        doc.update(self.context)
        return json.dumps(doc, sort_keys=True)
