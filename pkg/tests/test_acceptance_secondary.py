"""Secondary acceptance: the browser UI completes a full live session.

Builds the frontend, serves the session API, runs the scripted browser test
(vitest + happy-dom) against it, then checks the server-side session log:
five answered rounds including one skip, exactly one synthesis event, one
pinned reference, and one stored Likert record.
"""
import json
import os
import shutil
import subprocess
import threading
import time
from pathlib import Path

import pytest

FRONTEND = Path(__file__).resolve().parent.parent / "frontend"

pytestmark = pytest.mark.skipif(
    shutil.which("npm") is None, reason="npm not available"
)


@pytest.fixture(scope="module")
def frontend_ready():
    if not (FRONTEND / "node_modules").is_dir():
        subprocess.run(["npm", "install"], cwd=FRONTEND, check=True, timeout=600)
    build = subprocess.run(
        ["npm", "run", "build"], cwd=FRONTEND, capture_output=True, text=True,
        timeout=300,
    )
    assert build.returncode == 0, build.stdout + build.stderr
    return FRONTEND


def test_ui_full_session_loop(frontend_ready, tmp_path):
    import uvicorn

    from platekit.service import create_app

    log_dir = tmp_path / "logs"
    app = create_app(log_dir=log_dir)
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]

    try:
        env = dict(os.environ, PLATEKIT_BASE_URL=f"http://127.0.0.1:{port}")
        run = subprocess.run(
            ["npm", "run", "test:e2e"], cwd=frontend_ready, env=env,
            capture_output=True, text=True, timeout=300,
        )
        assert run.returncode == 0, run.stdout + run.stderr
    finally:
        server.should_exit = True
        thread.join(timeout=10)

    logs = list(log_dir.glob("session_*.jsonl"))
    assert len(logs) == 1
    rounds = []
    synthesis_events = 0
    likert_records = 0
    reference_events = 0
    for line in logs[0].read_text().splitlines():
        rec = json.loads(line)
        if rec.get("type") == "round":
            rounds.append(rec)
            if any(r["provenance"] == "synthesized" for r in rec["records"]):
                synthesis_events += 1
        elif rec.get("type") == "likert":
            likert_records += 1
        elif rec.get("type") == "reference":
            reference_events += 1

    assert len(rounds) == 5
    assert sum(1 for r in rounds if r["answer"] == "skip") == 1
    assert synthesis_events == 1
    assert reference_events == 1
    assert likert_records == 1
    print(
        f"PASS ui-loop: 5 rounds, {synthesis_events} synthesis event, "
        f"reference pinned, likert stored"
    )
