"""Live end-to-end: the service feeds the cosim CLI over HTTP.

Chain under test: embed --provider http, then score on the fetched
embedding file, then evaluate against gold, on a 10-pair English sample.
The CLI's own protocol validation doubles as the wire conformance check.
"""
import socket
import subprocess
import sys
import time

import pytest
import requests

PAIRS = [
    ("bank", "shore"), ("light", "lamp"), ("stone", "rock"), ("river", "stream"),
    ("cloud", "storm"), ("leaf", "tree"), ("road", "path"), ("glass", "cup"),
    ("bird", "wing"), ("fire", "smoke"),
]


def sample_tsv() -> str:
    rows = []
    for i, (w1, w2) in enumerate(PAIRS):
        c1 = f"The {w1} stood near the {w2} that morning, case {i}."
        c2 = f"Nobody saw the {w2} behind the old {w1} at night, case {i}."
        rows.append(f"{w1}\t{w2}\t{c1}\t{c2}\t{w1}\t{w2}\t{w1}\t{w2}")
    return "\n".join(rows) + "\n"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def service():
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "cosim_service", "--model", "ref:12", "--port", str(port)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE,
    )
    endpoint = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 20
        while True:
            try:
                if requests.get(f"{endpoint}/health", timeout=1).status_code == 200:
                    break
            except requests.RequestException:
                pass
            if time.monotonic() > deadline:
                proc.kill()
                out, err = proc.communicate(timeout=5)
                raise RuntimeError(f"service never became healthy: {err.decode()[:500]}")
            time.sleep(0.1)
        yield endpoint
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def cli(*argv):
    return subprocess.run([sys.executable, "-m", "cosim", *argv], capture_output=True, text=True)


def test_health_reports_model(service):
    body = requests.get(f"{service}/health", timeout=5).json()
    assert body == {"status": "ok", "model": "ref:12"}


def test_embed_score_evaluate_chain(service, tmp_path):
    data = tmp_path / "sample.tsv"
    data.write_text(sample_tsv(), encoding="utf-8")

    emb = tmp_path / "http_emb.jsonl"
    proc = cli(
        "embed", "--data", str(data), "--provider", "http", "--endpoint", service,
        "--batch", "6", "--out", str(emb),
    )
    assert proc.returncode == 0, proc.stderr
    assert "wrote 20 contexts" in proc.stderr

    pred = tmp_path / "pred.tsv"
    proc = cli(
        "score", "--data", str(data), "--provider", "file", "--embeddings", str(emb),
        "--out", str(pred),
    )
    assert proc.returncode == 0, proc.stderr

    # gold := blended predictions, so every correlation must print 1.000
    rows = pred.read_text(encoding="utf-8").splitlines()[1:]
    gold = tmp_path / "gold.tsv"
    gold.write_text(
        "".join(f"{r.split(chr(9))[0]}\t{r.split(chr(9))[-1]}\n" for r in rows), encoding="utf-8"
    )
    proc = cli("evaluate", "--pred", str(pred), "--gold", str(gold))
    assert proc.returncode == 0, proc.stderr
    assert "blend_pearson=1.000" in proc.stdout
    assert "blend_spearman=1.000" in proc.stdout


def test_http_provider_fetch_is_deterministic(service, tmp_path):
    data = tmp_path / "sample.tsv"
    data.write_text(sample_tsv(), encoding="utf-8")
    outputs = []
    for name in ("a.jsonl", "b.jsonl"):
        out = tmp_path / name
        proc = cli(
            "embed", "--data", str(data), "--provider", "http", "--endpoint", service,
            "--out", str(out),
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_score_straight_from_http_provider(service, tmp_path):
    data = tmp_path / "sample.tsv"
    data.write_text(sample_tsv(), encoding="utf-8")
    pred = tmp_path / "pred.tsv"
    proc = cli(
        "score", "--data", str(data), "--provider", "http", "--endpoint", service,
        "--no-standardize", "--out", str(pred),
    )
    assert proc.returncode == 0, proc.stderr
    assert len(pred.read_text(encoding="utf-8").splitlines()) == 11  # header + 10 pairs
