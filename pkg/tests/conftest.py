"""Shared builders for corpora, labeled sets and fixture files."""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from opinionpulse.corpus import Message
from opinionpulse.stance import LabeledExample

LABELS = ("supports", "rejects", "other")

SUPPORT_WORDS = ["steun", "goed", "eens", "prima", "voorstander", "helpt", "nuttig", "verstandig"]
REJECT_WORDS = ["onzin", "slecht", "oneens", "waardeloos", "tegenstander", "schadelijk", "nutteloos", "dom"]
OTHER_WORDS = ["zon", "koffie", "trein", "film", "muziek", "recept", "vakantie", "voetbal"]
FILLER_WORDS = ["de", "het", "een", "dus", "toch", "ook"]
_POOLS = {"supports": SUPPORT_WORDS, "rejects": REJECT_WORDS, "other": OTHER_WORDS}


def msg(
    text: str,
    *,
    id: str = "m1",
    ts: str = "2020-03-12T15:00:00Z",
    lang: str = "nl",
    platform: str = "twitter",
    is_repost: bool = False,
) -> Message:
    when = datetime.fromisoformat(ts.replace("Z", "+00:00"))
    return Message(id=id, timestamp=when, text=text, lang=lang, platform=platform,
                   is_repost=is_repost)


def make_messages(texts, start="2020-03-01T12:00:00Z", step_minutes=7) -> list[Message]:
    """One message per text, ids m0.. and evenly spaced timestamps."""
    t0 = datetime.fromisoformat(start.replace("Z", "+00:00"))
    return [
        msg(text, id=f"m{i}", ts=(t0 + timedelta(minutes=step_minutes * i))
            .strftime("%Y-%m-%dT%H:%M:%SZ"))
        for i, text in enumerate(texts)
    ]


def write_corpus(path, msgs) -> None:
    """JSONL corpus file in the ingest schema."""
    with open(path, "w", encoding="utf-8") as handle:
        for m in msgs:
            handle.write(json.dumps({
                "id": m.id,
                "created_at": m.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "text": m.text,
                "lang": m.lang,
                "platform": m.platform,
                "retweet": m.is_repost,
            }, ensure_ascii=False) + "\n")


def make_separable(n: int, seed: int, noise: float = 0.0) -> list[LabeledExample]:
    """Synthetic 3-class set with disjoint per-class vocabularies.

    Labels rotate supports/rejects/other; with ``noise`` each label flips
    to another class with that probability.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        label = LABELS[i % 3]
        pool = _POOLS[label]
        k = int(rng.integers(2, 5))
        words = [pool[int(j)] for j in rng.integers(0, len(pool), k)]
        words += [FILLER_WORDS[int(j)] for j in rng.integers(0, len(FILLER_WORDS), int(rng.integers(1, 3)))]
        rng.shuffle(words)
        final = label
        if noise and rng.random() < noise:
            final = LABELS[(LABELS.index(label) + 1 + int(rng.integers(0, 2))) % 3]
        out.append(LabeledExample(text=" ".join(words), label=final))
    return out


def write_labels(path, examples) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for ex in examples:
            handle.write(f"{ex.label}\t{ex.text}\n")


@pytest.fixture
def utc():
    return timezone.utc


# (number, description, passed) rows appended by the acceptance suite
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {description}")
