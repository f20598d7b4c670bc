"""Proof trees shared by the classic and probabilistic DP drivers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

PROVED = "Proved"
UNKNOWN = "Unknown"


@dataclass
class ProofNode:
    """One processor application on one problem.

    ``problem`` is the canonical printing of the input problem, ``params``
    holds JSON-ready processor details and ``children`` the proofs of the
    resulting subproblems. A node with processor ``"unsolved"`` marks a
    problem the driver gave up on.
    """

    processor: str
    problem: str
    params: dict[str, Any] = field(default_factory=dict)
    children: list[ProofNode] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        if self.processor == "unsolved":
            return False
        return all(c.solved for c in self.children)

    def walk(self) -> Iterator[ProofNode]:
        yield self
        for c in self.children:
            yield from c.walk()

    def frontier(self) -> list[ProofNode]:
        return [n for n in self.walk() if n.processor == "unsolved"]

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        head = f"{pad}- {self.processor}"
        summary = self.params.get("summary")
        if summary:
            head += f": {summary}"
        lines = [head]
        for c in self.children:
            lines.append(c.render(indent + 1))
        return "\n".join(lines)


@dataclass
class Verdict:
    status: str
    property: str
    proof: ProofNode | None = None
    note: str = ""

    @property
    def proved(self) -> bool:
        return self.status == PROVED

    def __str__(self) -> str:
        if self.proved:
            return f"{self.property}: proved"
        return f"{self.property}: unknown (no proof found){': ' + self.note if self.note else ''}"
