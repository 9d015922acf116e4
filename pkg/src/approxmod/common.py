"""Small shared result types."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple


@dataclass
class CheckResult:
    """Outcome of validating a certificate.

    ``errors`` holds (path, rule, message) triples; the path is a tuple of
    premise indices from the root.
    """

    errors: List[Tuple[tuple, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return self.ok

    def add(self, path, rule, message):
        self.errors.append((tuple(path), rule, message))

    def messages(self) -> List[str]:
        out = []
        for path, rule, msg in self.errors:
            where = ".".join(str(i) for i in path) or "root"
            out.append(f"{where}: {rule}: {msg}")
        return out


class Unknown:
    """Returned by bounded searches that gave up.  Makes no claim."""

    def __init__(self, reason: str = "budget exhausted"):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"Unknown({self.reason!r})"


class OutOfFuel(Exception):
    pass


class Fuel:
    def __init__(self, amount: int):
        self.left = amount

    def tick(self, n: int = 1):
        self.left -= n
        if self.left < 0:
            raise OutOfFuel()
