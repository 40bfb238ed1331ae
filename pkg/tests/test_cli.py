from __future__ import annotations

import json
import signal
import subprocess
import sys
import urllib.request
from pathlib import Path

import pytest

from polcomm import data_path
from polcomm.cli import main


@pytest.fixture(scope="module")
def registry_dir() -> str:
    return str(data_path("sample"))


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, registry_dir):
    """simulate -> load -> window run -> export-manifest, shared by tests."""
    root = tmp_path_factory.mktemp("cli")
    traffic = root / "traffic.ndjson"
    truth = root / "truth.ndjson"
    store = root / "store.json"
    rc = main(
        [
            "--seed", "5",
            "simulate",
            "--registry", registry_dir,
            "--posts", "2000",
            "--relevant-fraction", "0.4",
            "--engagement-mean", "2.0",
            "--duration-hours", "72",
            "--out", str(traffic),
            "--ground-truth", str(truth),
        ]
    )
    assert rc == 0
    rc = main(["load", "--registry", registry_dir, "--archives", str(traffic), "--store", str(store)])
    assert rc == 0
    return root, traffic, truth, store


def test_simulate_writes_archive_and_truth(pipeline):
    root, traffic, truth, _ = pipeline
    first = traffic.read_text(encoding="utf-8").splitlines()[0]
    record = json.loads(first)
    assert {"post_id", "platform", "created_at", "text"} <= set(record)
    assert truth.exists()


def test_load_then_collect_is_idempotent(pipeline, registry_dir, capsys):
    root, traffic, _, store = pipeline
    before = Path(store).read_bytes()
    rc = main(["collect", "--registry", registry_dir, "--archive", str(traffic), "--store", str(store)])
    assert rc == 0
    report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert report["duplicates"] == report["matched"]
    assert Path(store).read_bytes() == before


def test_window_run_records_snapshots(pipeline, registry_dir, capsys):
    root, _, truth, store = pipeline
    rc = main(
        [
            "window", "run",
            "--registry", registry_dir,
            "--store", str(store),
            "--ground-truth", str(truth),
            "--until", "2017-12-31T00:00:00Z",
        ]
    )
    assert rc == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["captured"] > 0
    data = json.loads(Path(store).read_text(encoding="utf-8"))
    assert data["engagement_snapshots"]


def test_analyze_aggregates(pipeline, registry_dir, capsys):
    root, _, _, store = pipeline
    for aggregate in ("daily-series", "top-selectors", "party-engagement", "adoption"):
        rc = main(["analyze", aggregate, "--registry", registry_dir, "--store", str(store)])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].count(",") >= 1
    rc = main(
        ["analyze", "top-accounts", "--registry", registry_dir, "--store", str(store), "--platform", "twitter", "--metric", "followers"]
    )
    assert rc == 0


def test_backfill_command(pipeline, registry_dir, tmp_path, capsys):
    root, traffic, _, _ = pipeline
    store = tmp_path / "backfill-store.json"
    rc = main(
        [
            "backfill",
            "--registry", registry_dir,
            "--archive", str(traffic),
            "--keywords", "weidel,btw17",
            "--store", str(store),
        ]
    )
    assert rc == 0
    report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert report["keywords"] == ["weidel", "btw17"]
    assert store.exists()


def test_manifest_export_and_hydrate(pipeline, registry_dir, tmp_path, capsys):
    root, traffic, _, store = pipeline
    manifest_dir = tmp_path / "manifest"
    rc = main(["export-manifest", "--registry", registry_dir, "--store", str(store), "--out", str(manifest_dir)])
    assert rc == 0
    hydrated = tmp_path / "hydrated.json"
    rc = main(["hydrate", "--manifest", str(manifest_dir), "--archive", str(traffic), "--store", str(hydrated)])
    assert rc == 0
    report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert report["missing"] == 0


def test_validate_command(registry_dir, capsys):
    rc = main(["validate", "--registry", registry_dir])
    assert rc == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["ok"] is True


def test_config_file_controls_backfill_cap(pipeline, registry_dir, tmp_path, capsys):
    root, traffic, _, _ = pipeline
    config = tmp_path / "config.json"
    config.write_text('{"retweet_cap": 1}', encoding="utf-8")
    store = tmp_path / "s.json"
    rc = main(
        [
            "--config", str(config),
            "backfill",
            "--registry", registry_dir,
            "--archive", str(traffic),
            "--keywords", "btw17",
            "--store", str(store),
        ]
    )
    assert rc == 0
    report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert report["retweets_fetched"] <= report["originals"] * 1


def test_serve_subprocess_answers_queries(pipeline, registry_dir):
    root, _, _, store = pipeline
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "polcomm.cli",
            "serve", "--registry", registry_dir, "--store", str(store), "--port", "0",
        ],
        stdout=subprocess.PIPE,
        text=True,
    )
    try:
        line = proc.stdout.readline().strip()
        assert line.startswith("serving on ")
        url = line.split(" ", 2)[2]
        with urllib.request.urlopen(url + "/api/v1/meta", timeout=5) as resp:
            assert resp.status == 200
            assert "parties" in json.loads(resp.read())
    finally:
        proc.send_signal(signal.SIGINT)
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
