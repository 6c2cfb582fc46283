#!/usr/bin/env python3
"""Tour of the HTTP review service against the extended demo corpus.

Starts the service in a subprocess on a scratch copy of the corpus, walks
the read endpoints, decides one suggestion, and triggers a re-run.
"""

import json
import shutil
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request
from pathlib import Path

HERE = Path(__file__).resolve().parents[1]
PORT = 8765
BASE = "http://127.0.0.1:%d" % PORT


def call(path, payload=None):
    req = urllib.request.Request(BASE + path)
    if payload is not None:
        req.data = json.dumps(payload).encode()
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req) as resp:
        return json.load(resp)


def wait_up(deadline=20.0):
    start = time.monotonic()
    while time.monotonic() - start < deadline:
        try:
            return call("/coverage")
        except (urllib.error.URLError, ConnectionError):
            time.sleep(0.2)
    raise SystemExit("service did not come up")


def main():
    work = Path(tempfile.mkdtemp(prefix="sublex-tour-"))
    shutil.copytree(HERE / "data" / "demo_corpus_ext", work / "corpus")
    proc = subprocess.Popen(
        [sys.executable, "-m", "sublex.cli", "serve",
         "--config", str(work / "corpus" / "config.json"),
         "--port", str(PORT)],
    )
    try:
        cov = wait_up()
        print("coverage:", json.dumps(cov["current"], indent=2))

        rows = call("/relations")["rows"]
        print("\n%d relation rows, e.g." % len(rows))
        for row in rows[:3]:
            values = ", ".join(v["value"] for v in row["values"])
            print("  %-20s %s" % (row["entity"], values))

        inv = call("/inventory?entity=Harte%20Hirnhaut")
        print("\nHarte Hirnhaut inventory:",
              [v["value"] for v in inv["values"]])

        items = call("/suggestions?kind=LEXICON&status=SUGGESTED")["items"]
        print("\n%d lexicon suggestions pending" % len(items))
        # pick one born from an unknown (XXX) token so the re-run improves
        first = next(i for i in items if i["payload"]["origin"] == "PARSER_AS")
        print("deciding", first["rendered"])
        decided = call("/suggestions/%s/decide" % first["id"],
                       {"verdict": "ACCEPT", "who": "tour"})
        print("  ->", decided["status"])

        rerun = call("/rerun", {})
        print("\nre-run:", rerun["run_id"],
              "xxx_tokens:", rerun["coverage"]["xxx_tokens"])
    finally:
        proc.terminate()
        proc.wait(timeout=10)
        shutil.rmtree(work, ignore_errors=True)


if __name__ == "__main__":
    main()
