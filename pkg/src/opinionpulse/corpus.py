"""Message corpus ingestion, validation, deduplication and sampling.

Corpora live in flat line-delimited files (JSONL, or a TSV alternative).
Ingestion is streaming: memory stays constant in the file size, malformed
lines are counted and skipped, never fatal. All timestamps are normalized
to UTC at ingest; display bucketing applies its own offset downstream.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from .exceptions import InputError

logger = logging.getLogger("opinionpulse.corpus")

PLATFORMS = ("twitter", "nunl", "reddit")

_TSV_COLUMNS = ("id", "created_at", "text", "lang", "platform")


def parse_timestamp(value) -> datetime:
    """Parse an ISO-8601 string or integer epoch seconds into aware UTC.

    Naive ISO strings are taken as UTC; offsets are converted.
    """
    if isinstance(value, bool):
        raise ValueError(f"bad timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(int(value), tz=timezone.utc)
    if isinstance(value, str):
        raw = value.strip()
        if raw.isdigit() or (raw.startswith("-") and raw[1:].isdigit()):
            return datetime.fromtimestamp(int(raw), tz=timezone.utc)
        if raw.endswith(("Z", "z")):
            raw = raw[:-1] + "+00:00"
        parsed = datetime.fromisoformat(raw)
        if parsed.tzinfo is None:
            return parsed.replace(tzinfo=timezone.utc)
        return parsed.astimezone(timezone.utc)
    raise ValueError(f"bad timestamp: {value!r}")


@dataclass(frozen=True, slots=True)
class Message:
    """One social-media post, immutable and thread-safe.

    ``timestamp`` is normalized to aware UTC on construction, ``lang`` is
    lowercased. Construction fails for empty text or unknown platform.
    """

    id: str
    timestamp: datetime
    text: str
    lang: str = "und"
    platform: str = "twitter"
    is_repost: bool = False

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("message text is empty")
        if self.platform not in PLATFORMS:
            raise ValueError(f"unknown platform {self.platform!r}")
        ts = self.timestamp
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        else:
            ts = ts.astimezone(timezone.utc)
        object.__setattr__(self, "timestamp", ts)
        object.__setattr__(self, "lang", self.lang.lower())


@dataclass
class CorpusStats:
    """Running counts of an ingest pass.

    ``total`` covers accepted messages only; day keys are UTC dates.
    """

    total: int = 0
    rejected: int = 0
    per_day: dict = field(default_factory=dict)
    per_platform: dict = field(default_factory=dict)

    def add(self, msg: Message) -> None:
        self.total += 1
        day = msg.timestamp.date().isoformat()
        self.per_day[day] = self.per_day.get(day, 0) + 1
        self.per_platform[msg.platform] = self.per_platform.get(msg.platform, 0) + 1

    def reject(self) -> None:
        self.rejected += 1

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "rejected": self.rejected,
            "per_day": dict(sorted(self.per_day.items())),
            "per_platform": dict(sorted(self.per_platform.items())),
        }


class MessageStream:
    """Iterator of Messages that exposes the stats gathered while consumed."""

    def __init__(self, iterator: Iterator[Message], stats: CorpusStats):
        self._iterator = iterator
        self.stats = stats

    def __iter__(self):
        return self

    def __next__(self) -> Message:
        return next(self._iterator)


def _message_from_json(line: str) -> Message:
    record = json.loads(line)
    if not isinstance(record, dict):
        raise ValueError("line is not a JSON object")
    try:
        msg_id = record["id"]
        created = record["created_at"]
        text = record["text"]
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]}") from None
    if not isinstance(text, str):
        raise ValueError("text is not a string")
    return Message(
        id=str(msg_id),
        timestamp=parse_timestamp(created),
        text=text,
        lang=str(record.get("lang", "und")),
        platform=str(record.get("platform", "twitter")),
        is_repost=bool(record.get("retweet", False)),
    )


def _message_from_tsv(line: str) -> Message:
    parts = line.split("\t")
    if len(parts) != len(_TSV_COLUMNS):
        raise ValueError(f"expected {len(_TSV_COLUMNS)} columns, got {len(parts)}")
    msg_id, created, text, lang, platform = parts
    return Message(
        id=msg_id,
        timestamp=parse_timestamp(created),
        text=text,
        lang=lang,
        platform=platform,
    )


def ingest(path, fmt: str = "jsonl") -> MessageStream:
    """Stream Messages from a line-delimited file.

    Malformed lines are logged with their line number and counted in
    ``stats.rejected``; they never abort the stream. The returned stream
    holds the file open until exhausted.
    """
    if fmt not in ("jsonl", "tsv"):
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    if not path.is_file():
        raise InputError(f"corpus file not found: {path}")
    parse = _message_from_json if fmt == "jsonl" else _message_from_tsv
    stats = CorpusStats()

    def generate():
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.rstrip("\n").rstrip("\r")
                if not line:
                    continue
                if fmt == "tsv" and lineno == 1 and line.split("\t") == list(_TSV_COLUMNS):
                    continue  # tolerated header row
                try:
                    msg = parse(line)
                except (ValueError, json.JSONDecodeError) as exc:
                    stats.reject()
                    logger.warning("%s line %d rejected: %s", path.name, lineno, exc)
                    continue
                stats.add(msg)
                yield msg

    return MessageStream(generate(), stats)


def message_to_record(msg: Message) -> dict:
    """JSONL record for a message; inverse of the ingest schema."""
    return {
        "id": msg.id,
        "created_at": msg.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "text": msg.text,
        "lang": msg.lang,
        "platform": msg.platform,
        "retweet": msg.is_repost,
    }


def write_jsonl(msgs: Iterable[Message], handle) -> int:
    """Write messages to an open text handle, one JSON object per line."""
    count = 0
    for msg in msgs:
        handle.write(json.dumps(message_to_record(msg), ensure_ascii=False))
        handle.write("\n")
        count += 1
    return count


def filter_lang(
    msgs: Iterable[Message],
    keep: str,
    und_predicate: Callable[[Message], bool] | None = None,
) -> Iterator[Message]:
    """Retain messages whose language tag equals ``keep``.

    Messages tagged "und" go through ``und_predicate``; the default is to
    retain them, since upstream language tags are more reliable than any
    local guess we could make.
    """
    keep = keep.lower()
    if not keep.isalpha() or not 2 <= len(keep) <= 3:
        raise ValueError(f"invalid language tag {keep!r}")
    for msg in msgs:
        if msg.lang == keep:
            yield msg
        elif msg.lang == "und":
            if und_predicate is None or und_predicate(msg):
                yield msg


def dedup(msgs: Iterable[Message], mode: str = "by_id") -> Iterator[Message]:
    """Drop duplicate messages, first occurrence wins, order preserved.

    ``by_id`` keys on (platform, id); ``by_exact_text`` on the trimmed text.
    """
    if mode not in ("by_id", "by_exact_text"):
        raise ValueError(f"unknown dedup mode {mode!r}")
    seen = set()
    for msg in msgs:
        key = (msg.platform, msg.id) if mode == "by_id" else msg.text.strip()
        if key in seen:
            continue
        seen.add(key)
        yield msg


def sample(
    msgs: Iterable[Message],
    *,
    rate: float | None = None,
    n: int | None = None,
    seed: int,
) -> list[Message]:
    """Uniform sample without replacement, order-preserving, seeded.

    Exactly one of ``rate``/``n`` must be given. ``rate`` draws an
    independent Bernoulli per message (streaming, size is binomial);
    ``n`` picks an exact-size subset and needs the whole population.
    """
    if (rate is None) == (n is None):
        raise ValueError("give exactly one of rate or n")
    rng = random.Random(seed)
    if rate is not None:
        if not 0 < rate <= 1:
            raise ValueError(f"rate must be in (0, 1], got {rate}")
        return [msg for msg in msgs if rng.random() < rate]
    population = list(msgs)
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n > len(population):
        raise ValueError(
            f"requested sample of {n} from population of {len(population)}"
        )
    chosen = sorted(rng.sample(range(len(population)), n))
    return [population[i] for i in chosen]
