"""The full seeded pipeline, driven through the command-line entry point."""

from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

from founderrank.cli import run

PIPELINE_SPEC = {"founders": 100, "investors": 100, "others": 300, "seed": 7}


def _subprocess_runner(hash_seed: int):
    env = dict(os.environ, PYTHONHASHSEED=str(hash_seed))

    def call(argv: list[str]) -> int:
        return subprocess.run([sys.executable, "-m", "founderrank", *argv], env=env,
                              stdout=subprocess.DEVNULL).returncode
    return call


def run_pipeline(workdir: Path, spec: dict = PIPELINE_SPEC, trials: int = 10000,
                 hash_seed: int | None = None) -> dict[str, int]:
    """Run synth, ingest, build, metrics, rank (nfr and baseline) and eval; return each exit code.

    With ``hash_seed`` every step runs in its own interpreter under that
    PYTHONHASHSEED, which exposes any dependence on set iteration order.
    """
    run_step = run if hash_seed is None else _subprocess_runner(hash_seed)
    workdir.mkdir(parents=True, exist_ok=True)
    (workdir / "spec.json").write_text(json.dumps(spec))
    world = workdir / "world"
    log = ["--run-log", str(workdir / "runs.jsonl")]
    codes = {"synth": run_step(log + ["synth", "--spec", str(workdir / "spec.json"), "--out", str(world)])}
    owner = json.loads((world / "ground_truth.json").read_text())["mailbox_owner"]
    steps = {
        "ingest": ["ingest", "--events", str(world / "events.jsonl"), "--founder", owner,
                   "--state", str(workdir / "state"), "--out", str(workdir / "delta.json")],
        "build": ["build", "--deltas", str(workdir / "delta.json"), "--labels", str(world / "labels.csv"),
                  "--out", str(workdir / "graph.snap")],
        "metrics": ["metrics", "--graph", str(workdir / "graph.snap"), "--out", str(workdir / "metrics.csv")],
        "rank_nfr": ["rank", "--method", "nfr", "--profiles", str(world / "profiles.csv"),
                     "--metrics", str(workdir / "metrics.csv"), "--out", str(workdir / "nfr.csv")],
        "rank_baseline": ["rank", "--method", "baseline", "--profiles", str(world / "profiles.csv"),
                          "--out", str(workdir / "baseline.csv")],
        "eval": ["eval", "--candidate", str(workdir / "nfr.csv"), "--baseline", str(workdir / "baseline.csv"),
                 "--trials", str(trials), "--seed", "7", "--out", str(workdir / "report.txt")],
    }
    for name, argv in steps.items():
        codes[name] = run_step(log + argv)
    return codes


def output_files(workdir: Path) -> dict[str, bytes]:
    """Every artifact except the run log, whose durations differ between runs."""
    return {str(p.relative_to(workdir)): p.read_bytes() for p in sorted(workdir.rglob("*"))
            if p.is_file() and p.name != "runs.jsonl"}
