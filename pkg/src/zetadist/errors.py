"""Error types shared by the library and the command line front end.

Each error carries the process exit code the CLI maps it to and a payload
that serializes to the machine readable JSON emitted on stderr.
"""

from __future__ import annotations


class ZetadistError(Exception):
    exit_code = 1
    kind = "error"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def payload(self) -> dict:
        out = {"error": self.kind, "message": self.message}
        if self.context:
            out["context"] = {k: _plain(v) for k, v in self.context.items()}
        return out


class ParameterError(ZetadistError):
    """Invalid argument or argument combination."""

    exit_code = 2
    kind = "parameter_error"


class CapacityError(ZetadistError):
    """Request exceeds a configured resource limit (table size, enumeration size)."""

    exit_code = 3
    kind = "capacity_error"


class NumericError(ZetadistError):
    """A numerical routine failed to converge or produced an inconsistent result."""

    exit_code = 4
    kind = "numeric_error"


def _plain(v):
    # keep payloads JSON serializable without pulling in numpy scalars
    try:
        import numpy as np

        if isinstance(v, np.generic):
            return v.item()
    except Exception:
        pass
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v
