"""Parsing, validation and filtering of user profiles and mention interactions.

Input formats:
  interactions: JSON Lines, one object per line with keys
    source, target, timestamp (int), sentiment ("NEG"|"NEU"|"POS"),
    and optional text.
  profiles: tab-separated with header row: user_id, mbti, bot_score.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import InvalidType, MalformedRecord

log = logging.getLogger(__name__)

MALFORMED_FRACTION_LIMIT = 0.10


class Sentiment(enum.IntEnum):
    """Sentiment trichotomy; integer value doubles as matrix index."""

    NEG = 0
    NEU = 1
    POS = 2


class MbtiType(enum.Enum):
    """The 16 four-letter personality type codes."""

    ENFJ = "ENFJ"
    ENFP = "ENFP"
    ENTJ = "ENTJ"
    ENTP = "ENTP"
    ESFJ = "ESFJ"
    ESFP = "ESFP"
    ESTJ = "ESTJ"
    ESTP = "ESTP"
    INFJ = "INFJ"
    INFP = "INFP"
    INTJ = "INTJ"
    INTP = "INTP"
    ISFJ = "ISFJ"
    ISFP = "ISFP"
    ISTJ = "ISTJ"
    ISTP = "ISTP"

    def __str__(self) -> str:
        return self.value

    @property
    def attitude(self) -> str:
        return self.value[0]

    @property
    def perceiving(self) -> str:
        return self.value[1]

    @property
    def judging(self) -> str:
        return self.value[2]

    @property
    def lifestyle(self) -> str:
        return self.value[3]


ALL_TYPES: tuple[MbtiType, ...] = tuple(sorted(MbtiType, key=lambda t: t.value))

_TYPE_CODE_RE = re.compile(
    r"\b(" + "|".join(t.value for t in ALL_TYPES) + r")\b", re.IGNORECASE
)
_MARKER_RE = re.compile(r"\b(mbti|briggs|myers)\b", re.IGNORECASE)


def parse_mbti(code: str) -> MbtiType:
    """Case-insensitive lookup of a four-letter type code."""
    try:
        return MbtiType(code.upper())
    except ValueError:
        raise InvalidType(f"not a personality type code: {code!r}") from None


def detect_self_identification(text: str) -> MbtiType | None:
    """Return the type a text self-identifies with, if unambiguous.

    Requires exactly one distinct type code (word-boundary match) plus at
    least one of the marker terms mbti/briggs/myers. Texts naming two or
    more distinct codes are ambiguous and yield None.
    """
    codes = {m.group(1).upper() for m in _TYPE_CODE_RE.finditer(text)}
    if len(codes) != 1:
        return None
    if not _MARKER_RE.search(text):
        return None
    return MbtiType(codes.pop())


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    mbti: MbtiType
    bot_score: float

    def __post_init__(self):
        if not self.user_id:
            raise ValueError("user_id must be non-empty")
        if not 0.0 <= self.bot_score <= 5.0:
            raise ValueError(f"bot_score outside [0, 5]: {self.bot_score}")


@dataclass(frozen=True)
class InteractionEvent:
    source: str
    target: str
    timestamp: int
    sentiment: Sentiment
    text: str | None = field(default=None)

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("self-mentions are excluded")


def filter_bots(profiles: list[UserProfile], threshold: float = 2.5) -> list[UserProfile]:
    """Keep profiles with bot_score strictly below threshold, in input order.

    A score exactly at the threshold counts as a bot and is removed.
    """
    if not 0.0 <= threshold <= 5.0:
        raise ValueError(f"threshold outside [0, 5]: {threshold}")
    return [p for p in profiles if p.bot_score < threshold]


_EVENT_KEYS = {"source", "target", "timestamp", "sentiment", "text"}


def _parse_event_line(line: str) -> InteractionEvent:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from None
    if not isinstance(record, dict):
        raise ValueError("record is not a key-value object")
    unknown = set(record) - _EVENT_KEYS
    if unknown:
        raise ValueError(f"unknown field(s): {sorted(unknown)}")
    missing = {"source", "target", "timestamp", "sentiment"} - set(record)
    if missing:
        raise ValueError(f"missing field(s): {sorted(missing)}")
    source, target = record["source"], record["target"]
    if not isinstance(source, str) or not source:
        raise ValueError("source must be a non-empty string")
    if not isinstance(target, str) or not target:
        raise ValueError("target must be a non-empty string")
    ts = record["timestamp"]
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise ValueError(f"timestamp must be an integer, got {ts!r}")
    token = record["sentiment"]
    if token not in Sentiment.__members__:
        raise ValueError(f"unknown sentiment token: {token!r}")
    text = record.get("text")
    if text is not None and not isinstance(text, str):
        raise ValueError("text must be a string when present")
    if source == target:
        raise ValueError("source equals target (self-mention)")
    return InteractionEvent(source, target, ts, Sentiment[token], text)


def load_interactions(stream: Iterable[str]) -> list[InteractionEvent]:
    """Parse interaction records, rejecting bad lines with a diagnostic.

    Blank lines are skipped. Each malformed line is logged with its line
    number; if more than 10% of the non-blank lines are malformed the whole
    load fails with an aggregate MalformedRecord. Output is sorted by
    (timestamp, input position).
    """
    events: list[tuple[int, int, InteractionEvent]] = []
    bad: list[tuple[int, str]] = []
    total = 0
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        total += 1
        try:
            event = _parse_event_line(line)
        except ValueError as exc:
            bad.append((lineno, str(exc)))
            log.warning("interactions line %d rejected: %s", lineno, exc)
            continue
        events.append((event.timestamp, lineno, event))
    if total and len(bad) / total > MALFORMED_FRACTION_LIMIT:
        raise MalformedRecord(
            f"{len(bad)} of {total} interaction lines malformed "
            f"(first: line {bad[0][0]}: {bad[0][1]})",
            line=bad[0][0],
            line_errors=bad,
        )
    events.sort(key=lambda item: (item[0], item[1]))
    return [event for _, _, event in events]


def load_profiles(stream: Iterable[str]) -> list[UserProfile]:
    """Parse the tab-separated profiles table (header: user_id, mbti, bot_score).

    Malformed rows and duplicate user ids are rejected with per-line
    diagnostics under the same >10% aggregate rule as load_interactions.
    """
    reader = csv.reader(stream, delimiter="\t")
    profiles: list[UserProfile] = []
    seen: set[str] = set()
    bad: list[tuple[int, str]] = []
    total = 0
    header: list[str] | None = None
    for lineno, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if header is None:
            header = [c.strip() for c in row]
            if header != ["user_id", "mbti", "bot_score"]:
                raise MalformedRecord(
                    f"bad profiles header: {header}", line=lineno
                )
            continue
        total += 1
        try:
            if len(row) != 3:
                raise ValueError(f"expected 3 fields, got {len(row)}")
            user_id, code, score_text = (c.strip() for c in row)
            profile = UserProfile(user_id, parse_mbti(code), float(score_text))
            if profile.user_id in seen:
                raise ValueError(f"duplicate user_id: {profile.user_id!r}")
        except (ValueError, InvalidType) as exc:
            bad.append((lineno, str(exc)))
            log.warning("profiles line %d rejected: %s", lineno, exc)
            continue
        seen.add(profile.user_id)
        profiles.append(profile)
    if header is None:
        raise MalformedRecord("profiles file has no header row")
    if total and len(bad) / total > MALFORMED_FRACTION_LIMIT:
        raise MalformedRecord(
            f"{len(bad)} of {total} profile rows malformed "
            f"(first: line {bad[0][0]}: {bad[0][1]})",
            line=bad[0][0],
            line_errors=bad,
        )
    return profiles
