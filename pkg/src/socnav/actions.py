"""The six-primitive action vocabulary and the one-line ranked-action grammar.

Canonical labels and the "1.<action> 2.<action> ..." line are a stable wire
format: remote models receive the labels verbatim and their replies are parsed
back with the tolerant matcher below.
"""

from __future__ import annotations

import re
from enum import Enum
from typing import Sequence


class Action(Enum):
    MOVE_FORWARD = "Move forward"
    MOVE_FORWARD_LEFT = "Move forward-left"
    MOVE_FORWARD_RIGHT = "Move forward-right"
    TURN_LEFT = "Turn left"
    TURN_RIGHT = "Turn right"
    STOP = "Stop"

    @property
    def label(self) -> str:
        return self.value


RankedActions = tuple[Action, ...]

ALL_ACTIONS: RankedActions = tuple(Action)

_EFFICIENCY_TIER = {
    Action.MOVE_FORWARD: 0,
    Action.MOVE_FORWARD_LEFT: 1,
    Action.MOVE_FORWARD_RIGHT: 1,
    Action.TURN_LEFT: 2,
    Action.TURN_RIGHT: 2,
    Action.STOP: 3,
}


def efficiency_rank(action: Action) -> int:
    """Forward-progress tier: forward < diagonals < turns < stop (lower is better)."""
    return _EFFICIENCY_TIER[action]


def _normalize_token(token: str) -> str:
    token = re.sub(r"[-_]+", " ", token.lower())
    token = re.sub(r"\s+", " ", token)
    return token.strip(" \t\r\n.,;:!?*\"'")


_ACTION_BY_KEY = {_normalize_token(a.value): a for a in Action}

# index marker: "1.", "2)", "3:", or a bare number followed by whitespace
_MARKER = re.compile(r"(\d+)\s*[.):]?\s*")


def parse_ranked_actions(text: str) -> RankedActions:
    """Parse a "1.<action> 2.<action> ..." line; unparseable input gives ()."""
    actions, _ = parse_ranked_actions_tally(text)
    return actions


def parse_ranked_actions_tally(text: str) -> tuple[RankedActions, int]:
    """Like :func:`parse_ranked_actions` but also counts dropped tokens.

    Numbered segments are matched case-insensitively with hyphens,
    underscores, and runs of whitespace treated as interchangeable.
    Segments matching no action count toward the returned tally; duplicates
    keep their first (lowest-index) occurrence.
    """
    markers = list(_MARKER.finditer(text))
    entries: list[tuple[int, int, Action]] = []
    unparsed = 0
    for k, marker in enumerate(markers):
        start = marker.end()
        end = markers[k + 1].start() if k + 1 < len(markers) else len(text)
        token = _normalize_token(text[start:end])
        if not token:
            continue
        action = _ACTION_BY_KEY.get(token)
        if action is None:
            unparsed += 1
            continue
        entries.append((int(marker.group(1)), k, action))
    entries.sort(key=lambda e: (e[0], e[1]))
    ordered: list[Action] = []
    for _, _, action in entries:
        if action not in ordered:
            ordered.append(action)
    return tuple(ordered), unparsed


def format_ranked_actions(actions: Sequence[Action]) -> str:
    """Render actions as the canonical single line, e.g. "1.Move forward 2.Stop"."""
    if not actions:
        raise ValueError("cannot format an empty action list")
    if len(set(actions)) != len(actions):
        raise ValueError("ranked actions must be duplicate-free")
    return " ".join(f"{i}.{a.value}" for i, a in enumerate(actions, start=1))
