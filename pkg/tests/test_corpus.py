"""Ingest, dedup and sampling tests, including the streaming-memory check."""

import json
import logging
import tracemalloc
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_messages, msg, write_corpus
from opinionpulse.corpus import (
    Message,
    dedup,
    filter_lang,
    ingest,
    message_to_record,
    parse_timestamp,
    sample,
    write_jsonl,
)
from opinionpulse.exceptions import InputError


class TestParseTimestamp:
    def test_iso_with_z_suffix(self):
        ts = parse_timestamp("2020-03-12T15:00:00Z")
        assert ts == datetime(2020, 3, 12, 15, 0, tzinfo=timezone.utc)

    def test_epoch_seconds(self):
        assert parse_timestamp(1584025200) == datetime(2020, 3, 12, 15, 0, tzinfo=timezone.utc)

    def test_offset_normalized_to_utc(self):
        ts = parse_timestamp("2020-03-12T16:00:00+01:00")
        assert ts == datetime(2020, 3, 12, 15, 0, tzinfo=timezone.utc)
        assert ts.tzinfo == timezone.utc

    def test_naive_treated_as_utc(self):
        assert parse_timestamp("2020-03-12T15:00:00").tzinfo == timezone.utc

    def test_garbage_raises(self):
        with pytest.raises(ValueError):
            parse_timestamp("twaalf maart")


class TestMessage:
    def test_rejects_empty_text(self):
        with pytest.raises(ValueError):
            msg("   ")

    def test_rejects_unknown_platform(self):
        with pytest.raises(ValueError):
            msg("tekst", platform="myspace")

    def test_lang_lowercased(self):
        assert msg("tekst", lang="NL").lang == "nl"


class TestIngest:
    def test_well_formed_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(
            '{"id":"1","created_at":"2020-03-12T15:00:00Z","text":"persconferentie",'
            '"lang":"nl","platform":"twitter"}\n',
            encoding="utf-8",
        )
        stream = ingest(path)
        msgs = list(stream)
        assert len(msgs) == 1
        assert msgs[0].text == "persconferentie"
        assert msgs[0].timestamp == datetime(2020, 3, 12, 15, 0, tzinfo=timezone.utc)
        assert stream.stats.rejected == 0

    def test_malformed_line_skipped_and_counted(self, tmp_path, caplog):
        path = tmp_path / "c.jsonl"
        path.write_text("not json\n", encoding="utf-8")
        with caplog.at_level(logging.WARNING, logger="opinionpulse.corpus"):
            stream = ingest(path)
            assert list(stream) == []
        assert stream.stats.rejected == 1
        # the diagnostic names the line number
        assert any("line 1" in rec.getMessage() for rec in caplog.records)

    def test_1000_lines_with_3_malformed(self, tmp_path):
        path = tmp_path / "c.jsonl"
        bad_at = {100, 500, 900}
        with open(path, "w", encoding="utf-8") as handle:
            for i in range(1000):
                if i in bad_at:
                    handle.write("{broken\n")
                else:
                    handle.write(json.dumps({
                        "id": str(i), "created_at": "2020-03-12T15:00:00Z",
                        "text": f"bericht {i}", "lang": "nl", "platform": "twitter",
                    }) + "\n")
        stream = ingest(path)
        msgs = list(stream)
        assert len(msgs) == 997
        assert stream.stats.total == 997
        assert stream.stats.rejected == 3

    def test_stats_totals_agree(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus(path, make_messages([f"tekst {i}" for i in range(50)]))
        stream = ingest(path)
        list(stream)
        stats = stream.stats.to_dict()
        assert stats["total"] == sum(stats["per_day"].values())
        assert stats["total"] == sum(stats["per_platform"].values())

    def test_missing_file_is_fatal(self, tmp_path):
        with pytest.raises(InputError):
            ingest(tmp_path / "absent.jsonl")

    def test_tsv_format(self, tmp_path):
        path = tmp_path / "c.tsv"
        path.write_text(
            "id\tcreated_at\ttext\tlang\tplatform\n"
            "1\t2020-03-12T15:00:00Z\tpersconferentie\tnl\ttwitter\n",
            encoding="utf-8",
        )
        msgs = list(ingest(path, fmt="tsv"))
        assert len(msgs) == 1
        assert msgs[0].platform == "twitter"

    def test_unparseable_timestamp_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id":"1","created_at":"gisteren","text":"x"}\n', encoding="utf-8")
        stream = ingest(path)
        assert list(stream) == []
        assert stream.stats.rejected == 1


class TestRoundTrip:
    def test_field_for_field(self, tmp_path):
        original = [
            msg("Eén bericht met ünïcode \U0001F637", id="a", ts="2020-03-12T14:30:05Z",
                lang="nl", platform="nunl", is_repost=True),
            msg("tweede", id="b", ts="2020-06-01T00:00:00Z", platform="reddit"),
        ]
        path = tmp_path / "c.jsonl"
        with open(path, "w", encoding="utf-8") as handle:
            assert write_jsonl(original, handle) == 2
        again = list(ingest(path))
        assert again == original

    @settings(max_examples=50)
    @given(
        text=st.text(min_size=1).filter(lambda s: s.strip() and "\n" not in s and "\r" not in s),
        epoch=st.integers(min_value=0, max_value=2_000_000_000),
        lang=st.sampled_from(["nl", "en", "und"]),
        platform=st.sampled_from(["twitter", "nunl", "reddit"]),
        repost=st.booleans(),
    )
    def test_record_round_trip(self, text, epoch, lang, platform, repost):
        original = Message(
            id="x", timestamp=parse_timestamp(epoch), text=text,
            lang=lang, platform=platform, is_repost=repost,
        )
        record = json.loads(json.dumps(message_to_record(original), ensure_ascii=False))
        from opinionpulse.corpus import _message_from_json

        assert _message_from_json(json.dumps(record, ensure_ascii=False)) == original


class TestFilterLang:
    def test_keeps_matching_tag(self):
        msgs = [msg("a", lang="nl"), msg("b", lang="en"), msg("c", lang="nl")]
        assert len(list(filter_lang(msgs, "nl"))) == 2

    def test_und_retained_by_default(self):
        assert len(list(filter_lang([msg("a", lang="und")], "nl"))) == 1

    def test_und_predicate_hook(self):
        msgs = [msg("houd afstand", lang="und"), msg("keep apart", lang="und")]
        kept = list(filter_lang(msgs, "nl", und_predicate=lambda m: "afstand" in m.text))
        assert [m.text for m in kept] == ["houd afstand"]

    def test_ten_percent_excluded(self):
        msgs = [msg(f"t{i}", lang="en") for i in range(10)]
        msgs += [msg(f"t{i}", lang="nl") for i in range(10, 100)]
        assert len(list(filter_lang(msgs, "nl"))) == 90

    def test_bad_tag(self):
        with pytest.raises(ValueError):
            list(filter_lang([msg("a")], "nederlands!"))


class TestDedup:
    def test_by_id(self):
        msgs = [msg("eerste", id="1"), msg("tweede", id="1"), msg("derde", id="2")]
        assert [m.text for m in dedup(msgs, mode="by_id")] == ["eerste", "derde"]

    def test_same_id_different_platform_kept(self):
        msgs = [msg("a", id="1", platform="twitter"), msg("b", id="1", platform="reddit")]
        assert len(list(dedup(msgs, mode="by_id"))) == 2

    def test_by_exact_text(self):
        msgs = [msg("RT abc", id="1"), msg("RT abc", id="2")]
        assert len(list(dedup(msgs, mode="by_exact_text"))) == 1

    def test_100_with_20_duplicates(self):
        msgs = [msg(f"tekst {i}", id=f"a{i}") for i in range(80)]
        msgs += [msg(f"tekst {i}", id=f"b{i}") for i in range(20)]
        assert len(list(dedup(msgs, mode="by_exact_text"))) == 80

    @given(st.lists(st.sampled_from(["aap", "noot", "mies", "wim"]), max_size=30))
    def test_idempotent(self, texts):
        msgs = [msg(t, id=str(i)) for i, t in enumerate(texts)]
        once = list(dedup(msgs, mode="by_exact_text"))
        assert list(dedup(once, mode="by_exact_text")) == once


class TestSample:
    def test_rate_one_is_identity(self):
        msgs = make_messages([f"t{i}" for i in range(1000)])
        assert sample(msgs, rate=1.0, seed=42) == msgs

    def test_exact_n_deterministic_and_ordered(self):
        msgs = make_messages([f"t{i}" for i in range(10)])
        first = sample(msgs, n=3, seed=7)
        second = sample(msgs, n=3, seed=7)
        assert first == second
        assert len(first) == 3
        positions = [msgs.index(m) for m in first]
        assert positions == sorted(positions)

    def test_n_too_large_names_both_numbers(self):
        msgs = make_messages(["a", "b"])
        with pytest.raises(ValueError, match=r"3.*2"):
            sample(msgs, n=3, seed=1)

    def test_requires_exactly_one_mode(self):
        msgs = make_messages(["a"])
        with pytest.raises(ValueError):
            sample(msgs, seed=1)
        with pytest.raises(ValueError):
            sample(msgs, rate=0.5, n=1, seed=1)

    def test_rate_preserves_order(self):
        msgs = make_messages([f"t{i}" for i in range(200)])
        picked = sample(msgs, rate=0.3, seed=11)
        positions = [msgs.index(m) for m in picked]
        assert positions == sorted(positions)

    def test_rate_sizes_match_binomial_within_3_sigma(self):
        # mean size over seeds must approach rate*N
        n, rate, runs = 400, 0.25, 60
        msgs = make_messages([f"t{i}" for i in range(n)])
        sizes = [len(sample(msgs, rate=rate, seed=s)) for s in range(runs)]
        mean = sum(sizes) / runs
        sigma_of_mean = (n * rate * (1 - rate)) ** 0.5 / runs ** 0.5
        assert abs(mean - n * rate) < 3 * sigma_of_mean


def test_streaming_memory_is_flat(tmp_path):
    """Peak memory may not scale with file size (10x lines, <2x memory)."""
    small, large = tmp_path / "small.jsonl", tmp_path / "large.jsonl"
    record = {"id": "0", "created_at": "2020-03-12T15:00:00Z",
              "text": "een doorsnee bericht over van alles", "lang": "nl",
              "platform": "twitter"}
    line = json.dumps(record) + "\n"
    small.write_text(line * 2_000, encoding="utf-8")
    large.write_text(line * 20_000, encoding="utf-8")

    def peak(path):
        tracemalloc.start()
        count = sum(1 for _ in ingest(path))
        _, peak_bytes = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        return count, peak_bytes

    n_small, peak_small = peak(small)
    n_large, peak_large = peak(large)
    assert n_small == 2_000 and n_large == 20_000
    assert peak_large < 2 * peak_small + 256_000
