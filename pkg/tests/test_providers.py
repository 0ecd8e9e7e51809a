import io
import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from conftest import planted_embedding_jsonl, planted_store
from cosim.dataset import PairRecord
from cosim.errors import (
    AlignmentError,
    BackendError,
    DimensionError,
    FormatError,
    MissingEmbeddingError,
    ProtocolError,
)
from cosim.providers import (
    EmbeddingStore,
    FetchOptions,
    fetch_embeddings,
    load_embeddings,
    synthetic_embeddings,
    write_embeddings,
)


class TestStore:
    def test_lookup(self, store):
        emb = store.lookup("0", 1)
        assert emb.context_text == "alpha beta"

    def test_missing_key(self, store):
        with pytest.raises(MissingEmbeddingError):
            store.lookup("9", 1)

    def test_dimension_consistency_enforced(self, store):
        bad = dict(store.embeddings)
        from cosim.alignment import ContextEmbedding, Token
        from cosim.vecmath import WordVector

        bad[("9", 1)] = ContextEmbedding("x", (Token("x", 0, 1, WordVector((1.0, 2.0, 3.0))),))
        with pytest.raises(DimensionError):
            EmbeddingStore(bad, 2, "broken")


class TestFileFormat:
    def test_load_planted(self, store):
        loaded = load_embeddings(io.StringIO(planted_embedding_jsonl()))
        assert loaded == store

    def test_roundtrip(self, store):
        buf = io.StringIO()
        write_embeddings(store, buf)
        assert load_embeddings(io.StringIO(buf.getvalue())) == store

    def test_canonical_bytes(self, store):
        buf1, buf2 = io.StringIO(), io.StringIO()
        n1 = write_embeddings(store, buf1)
        n2 = write_embeddings(planted_store(), buf2)
        assert buf1.getvalue() == buf2.getvalue()
        assert n1 == n2 == len(buf1.getvalue().encode("utf-8"))

    def test_empty_store_is_header_only(self):
        buf = io.StringIO()
        write_embeddings(EmbeddingStore({}, 4, "empty"), buf)
        lines = buf.getvalue().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["dimension"] == 4

    def test_missing_header(self):
        with pytest.raises(FormatError):
            load_embeddings(io.StringIO(""))

    def test_bad_json_line_number(self):
        text = planted_embedding_jsonl() + "{not json\n"
        with pytest.raises(FormatError) as exc:
            load_embeddings(io.StringIO(text))
        assert exc.value.row == 6

    def test_dimension_mismatch_in_token(self):
        header = json.dumps({"format": "ctxemb/1", "dimension": 4, "provenance": "x"})
        line = json.dumps(
            {"pair_id": "0", "context": 1, "text": "ab",
             "tokens": [{"t": "ab", "s": 0, "e": 2, "v": [1.0, 2.0, 3.0]}]}
        )
        with pytest.raises(DimensionError):
            load_embeddings(io.StringIO(header + "\n" + line + "\n"))

    def test_span_out_of_bounds(self):
        header = json.dumps({"format": "ctxemb/1", "dimension": 1, "provenance": "x"})
        line = json.dumps(
            {"pair_id": "0", "context": 1, "text": "ab",
             "tokens": [{"t": "abc", "s": 0, "e": 3, "v": [1.0]}]}
        )
        with pytest.raises(AlignmentError):
            load_embeddings(io.StringIO(header + "\n" + line + "\n"))

    def test_duplicate_key(self):
        header = json.dumps({"format": "ctxemb/1", "dimension": 1, "provenance": "x"})
        line = json.dumps(
            {"pair_id": "0", "context": 1, "text": "a",
             "tokens": [{"t": "a", "s": 0, "e": 1, "v": [1.0]}]}
        )
        with pytest.raises(FormatError):
            load_embeddings(io.StringIO("\n".join([header, line, line]) + "\n"))

    def test_nan_rejected(self):
        header = json.dumps({"format": "ctxemb/1", "dimension": 1, "provenance": "x"})
        line = '{"pair_id": "0", "context": 1, "text": "a", "tokens": [{"t": "a", "s": 0, "e": 1, "v": [NaN]}]}'
        with pytest.raises(FormatError):
            load_embeddings(io.StringIO(header + "\n" + line + "\n"))


class TestSynthetic:
    def test_bit_identical_across_runs(self, records):
        a = synthetic_embeddings(records, seed=7, dimension=8)
        b = synthetic_embeddings(records, seed=7, dimension=8)
        assert a == b

    def test_seed_changes_vectors(self, records):
        a = synthetic_embeddings(records, seed=1, dimension=8)
        b = synthetic_embeddings(records, seed=2, dimension=8)
        assert a != b

    def test_dimension_respected(self, records):
        store = synthetic_embeddings(records, seed=0, dimension=16)
        for key in store.keys():
            for token in store.embeddings[key].tokens:
                assert token.vector.dim == 16

    def test_whitespace_offsets_exact(self, records):
        store = synthetic_embeddings(records, seed=0, dimension=4)
        emb = store.lookup("1", 1)
        assert [(t.text, t.start, t.end) for t in emb.tokens] == [
            ("unbank", 0, 6),
            ("money", 7, 12),
        ]
        for t in emb.tokens:
            assert emb.context_text[t.start : t.end] == t.text

    def test_same_token_same_context_same_vector(self):
        rec = PairRecord("0", "en", "a", "b", "bank of bank", "other", "bank", "of", "other", "other")
        store = synthetic_embeddings([rec], seed=3, dimension=4)
        emb = store.lookup("0", 1)
        assert emb.tokens[0].vector == emb.tokens[2].vector

    def test_same_token_other_context_differs(self):
        rec = PairRecord("0", "en", "a", "b", "bank here", "bank there", "bank", "here", "bank", "there")
        store = synthetic_embeddings([rec], seed=3, dimension=4)
        v1 = store.lookup("0", 1).tokens[0].vector
        v2 = store.lookup("0", 2).tokens[0].vector
        assert v1 != v2


class StubHandler(BaseHTTPRequestHandler):
    """Configurable /embed stub; behavior injected via server attributes."""

    def log_message(self, *args):
        pass

    def do_POST(self):
        assert self.path == "/embed"
        self.server.request_count += 1
        if self.server.fail_with_500:
            self.send_response(500)
            self.end_headers()
            self.wfile.write(b"boom")
            return
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        self.server.payloads.append(payload)
        items = []
        for entry in payload["texts"]:
            tokens = []
            pos = 0
            for i, word in enumerate(entry["text"].split()):
                start = entry["text"].index(word, pos)
                tok = {"t": word, "s": start, "e": start + len(word), "v": [float(len(word)), float(i)]}
                if self.server.drop_end_field:
                    del tok["e"]
                tokens.append(tok)
                pos = start + len(word)
            items.append({"id": entry["id"], "tokens": tokens})
        body = json.dumps({"dimension": 2, "items": items}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), StubHandler)
    server.request_count = 0
    server.payloads = []
    server.fail_with_500 = False
    server.drop_end_field = False
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()


def endpoint(server) -> str:
    return f"http://127.0.0.1:{server.server_address[1]}"


class TestFetch:
    def test_fetch_matches_local_tokenization(self, stub_server, records):
        store = fetch_embeddings(endpoint(stub_server), records, FetchOptions(batch_size=3))
        assert len(store) == 4
        emb = store.lookup("1", 2)
        assert [t.text for t in emb.tokens] == ["unbank", "cash"]
        assert emb.tokens[0].vector.values == (6.0, 0.0)
        assert store.dimension == 2

    def test_one_request_per_batch(self, stub_server, records):
        fetch_embeddings(endpoint(stub_server), records, FetchOptions(batch_size=3))
        # 4 contexts at batch size 3 -> ceil(4/3) = 2 requests
        assert stub_server.request_count == 2
        assert stub_server.payloads[0]["language"] == "en"

    def test_persistent_500_gives_backend_error(self, stub_server, records):
        stub_server.fail_with_500 = True
        opts = FetchOptions(batch_size=8, retries=2, backoff=0.01)
        with pytest.raises(BackendError) as exc:
            fetch_embeddings(endpoint(stub_server), records, opts)
        assert stub_server.request_count == 3  # initial + 2 retries
        assert "0#1" in str(exc.value)

    def test_missing_token_field_is_protocol_error(self, stub_server, records):
        stub_server.drop_end_field = True
        with pytest.raises(ProtocolError):
            fetch_embeddings(endpoint(stub_server), records, FetchOptions(batch_size=8))

    def test_unreachable_endpoint(self, records):
        opts = FetchOptions(retries=0, backoff=0.01, timeout=0.5)
        with pytest.raises(BackendError):
            fetch_embeddings("http://127.0.0.1:9", records, opts)

    def test_empty_records_rejected(self):
        with pytest.raises(BackendError):
            fetch_embeddings("http://127.0.0.1:9", [])
