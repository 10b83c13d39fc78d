import io
import json
import struct

import numpy as np
import pytest

from evoverb import (
    BadMagicError,
    DataError,
    FormatError,
    HeaderError,
    LogitSet,
    PayloadTooLargeError,
    RowSumError,
    TruncatedError,
    Verbalizer,
    Vocabulary,
    read_logits,
    read_verbalizer,
    read_vocab,
    write_logits,
    write_verbalizer,
    write_vocab,
)

from conftest import random_logitset


def roundtrip(ls: LogitSet) -> LogitSet:
    buf = io.BytesIO()
    write_logits(ls, buf)
    buf.seek(0)
    return read_logits(buf)


def valid_bytes(ls: LogitSet) -> bytearray:
    buf = io.BytesIO()
    write_logits(ls, buf)
    return bytearray(buf.getvalue())


# -------------------------------------------------------------- logits file

class TestLogitsFormat:
    def test_payload_bytes_are_f32_le(self):
        ls = LogitSet(probs=np.array([[0.25, 0.75]]), labels=[0], num_labels=1)
        data = bytes(valid_bytes(ls))
        assert data.startswith(b"EVSL1\n")
        (header_len,) = struct.unpack("<Q", data[6:14])
        payload = data[14 + header_len:]
        assert payload == struct.pack("<f", 0.25) + struct.pack("<f", 0.75)

    def test_byte_count_returned(self, rng):
        ls = random_logitset(rng)
        buf = io.BytesIO()
        n = write_logits(ls, buf)
        assert n == len(buf.getvalue())

    def test_roundtrip_bitwise(self, rng):
        ls = random_logitset(rng, num_instances=8, vocab_size=10, num_labels=2)
        back = roundtrip(ls)
        assert back.probs.tobytes() == ls.probs.tobytes()
        np.testing.assert_array_equal(back.labels, ls.labels)
        assert back.num_labels == ls.num_labels

    def test_roundtrip_via_paths(self, rng, tmp_path):
        ls = random_logitset(rng)
        path = tmp_path / "dev.evsl1"
        write_logits(ls, path)
        back = read_logits(path)
        assert back.probs.tobytes() == ls.probs.tobytes()

    def test_bad_magic(self, rng):
        data = valid_bytes(random_logitset(rng))
        data[:4] = b"XXXX"
        with pytest.raises(BadMagicError, match="magic"):
            read_logits(io.BytesIO(bytes(data)))

    def test_truncated_payload_names_byte_counts(self, rng):
        data = valid_bytes(random_logitset(rng, num_instances=4, vocab_size=6))
        with pytest.raises(TruncatedError, match=r"expected 96 bytes, got 90"):
            read_logits(io.BytesIO(bytes(data[:-6])))

    def test_truncated_header(self, rng):
        data = valid_bytes(random_logitset(rng))
        with pytest.raises(TruncatedError, match="header"):
            read_logits(io.BytesIO(bytes(data[:10])))

    def test_row_sum_violation_names_row(self):
        probs = np.array([[0.5, 0.5], [0.45, 0.45]], dtype=np.float32)
        good = LogitSet(probs=np.full((2, 2), 0.5), labels=[0, 1], num_labels=2)
        data = valid_bytes(good)
        data[-16:] = probs.astype("<f4").tobytes()
        with pytest.raises(RowSumError, match="row 1"):
            read_logits(io.BytesIO(bytes(data)))

    def test_label_length_mismatch(self, rng):
        ls = random_logitset(rng, num_instances=4, vocab_size=6)
        buf = io.BytesIO()
        write_logits(ls, buf)
        data = buf.getvalue()
        (header_len,) = struct.unpack("<Q", data[6:14])
        header = json.loads(data[14:14 + header_len])
        header["labels"] = header["labels"][:-1]
        new_header = json.dumps(header, separators=(",", ":"), sort_keys=True).encode()
        patched = data[:6] + struct.pack("<Q", len(new_header)) + new_header + data[14 + header_len:]
        with pytest.raises(HeaderError, match="labels length"):
            read_logits(io.BytesIO(patched))

    def test_header_not_json(self):
        blob = b"EVSL1\n" + struct.pack("<Q", 4) + b"!!!!"
        with pytest.raises(HeaderError, match="JSON"):
            read_logits(io.BytesIO(blob))

    def test_wrong_dtype_rejected(self, rng):
        ls = random_logitset(rng)
        buf = io.BytesIO()
        write_logits(ls, buf)
        data = buf.getvalue()
        (header_len,) = struct.unpack("<Q", data[6:14])
        header = json.loads(data[14:14 + header_len])
        header["dtype"] = "f64"
        new_header = json.dumps(header, separators=(",", ":"), sort_keys=True).encode()
        patched = data[:6] + struct.pack("<Q", len(new_header)) + new_header + data[14 + header_len:]
        with pytest.raises(HeaderError, match="dtype"):
            read_logits(io.BytesIO(patched))

    def test_payload_cap_checked_before_allocation(self):
        header = json.dumps(
            {
                "num_instances": 2**40,
                "vocab_size": 2**20,
                "num_labels": 2,
                "labels": [],
                "dtype": "f32",
                "layout": "row-major",
            }
        ).encode()
        blob = b"EVSL1\n" + struct.pack("<Q", len(header)) + header
        with pytest.raises((PayloadTooLargeError, HeaderError)):
            read_logits(io.BytesIO(blob))

    def test_payload_cap_configurable(self, rng):
        ls = random_logitset(rng, num_instances=4, vocab_size=6)
        data = bytes(valid_bytes(ls))
        with pytest.raises(PayloadTooLargeError, match="cap"):
            read_logits(io.BytesIO(data), max_payload_bytes=10)

    def test_100_random_roundtrips(self):
        rng = np.random.default_rng(2024)
        for trial in range(100):
            n = int(rng.integers(2, 12))
            v = int(rng.integers(2, 20))
            k = int(rng.integers(1, 4))
            ls = random_logitset(rng, num_instances=max(n, k * 2), vocab_size=v, num_labels=2)
            back = roundtrip(ls)
            assert back.probs.tobytes() == ls.probs.tobytes()
            np.testing.assert_array_equal(back.labels, ls.labels)


# -------------------------------------------------------------- vocabulary

class TestVocabFormat:
    def test_three_lines(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_bytes(b"alpha\nbeta\ngamma\n")
        vocab = read_vocab(path)
        assert vocab.tokens == ["alpha", "beta", "gamma"]

    def test_trailing_newline_optional(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_bytes(b"alpha\nbeta")
        assert read_vocab(path).tokens == ["alpha", "beta"]

    def test_crlf_stripped(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_bytes(b"alpha\r\nbeta\r\n")
        assert read_vocab(path).tokens == ["alpha", "beta"]

    def test_duplicates_permitted(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_bytes(b"dup\ndup\n")
        assert read_vocab(path).tokens == ["dup", "dup"]

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_bytes(b"")
        with pytest.raises(DataError, match="empty"):
            read_vocab(path)

    def test_blank_line_rejected(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_bytes(b"alpha\n\nbeta\n")
        with pytest.raises(FormatError, match="line 1"):
            read_vocab(path)

    def test_write_read_roundtrip(self, tmp_path):
        vocab = Vocabulary(tokens=["a", "b", "c d", "é"])
        path = tmp_path / "vocab.txt"
        write_vocab(vocab, path)
        assert read_vocab(path).tokens == vocab.tokens


# -------------------------------------------------------------- verbalizer

class TestVerbalizerFormat:
    def test_roundtrip(self, tmp_path):
        verb = Verbalizer(vocab_ids=[[3, 1], [2, 0]], tokens=[["d", "b"], ["c", "a"]])
        meta = {"fitness": 0.75, "config": {"population_size": 4}, "seed": 9}
        path = tmp_path / "verb.json"
        write_verbalizer(verb, meta, path)
        back, back_meta = read_verbalizer(path)
        np.testing.assert_array_equal(back.vocab_ids, verb.vocab_ids)
        assert back.tokens == verb.tokens
        assert back_meta == meta

    def test_output_is_stable_bytes(self, tmp_path):
        verb = Verbalizer(vocab_ids=[[0], [1]], tokens=[["a"], ["b"]])
        meta = {"fitness": 1.0, "config": {}, "seed": 0}
        p1, p2 = tmp_path / "v1.json", tmp_path / "v2.json"
        write_verbalizer(verb, meta, p1)
        write_verbalizer(verb, meta, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_label_order_in_document(self, tmp_path):
        verb = Verbalizer(vocab_ids=[[5, 3], [2, 7]], tokens=[["f", "d"], ["c", "h"]])
        path = tmp_path / "verb.json"
        write_verbalizer(verb, {"fitness": 0.5, "config": {}, "seed": 1}, path)
        doc = json.loads(path.read_text())
        assert [e["label"] for e in doc["labels"]] == [0, 1]
        assert doc["labels"][0]["words"] == ["f", "d"]
        assert doc["labels"][0]["vocab_ids"] == [5, 3]

    def test_malformed_document_rejected(self, tmp_path):
        path = tmp_path / "verb.json"
        path.write_text('{"labels": [{"label": 0}]}')
        with pytest.raises(FormatError):
            read_verbalizer(path)

    def test_non_contiguous_labels_rejected(self, tmp_path):
        path = tmp_path / "verb.json"
        doc = {
            "labels": [
                {"label": 0, "words": ["a"], "vocab_ids": [0]},
                {"label": 2, "words": ["b"], "vocab_ids": [1]},
            ]
        }
        path.write_text(json.dumps(doc))
        with pytest.raises(FormatError, match="0..1"):
            read_verbalizer(path)
