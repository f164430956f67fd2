#!/usr/bin/env python3
"""Run every registered experiment, reusing cached checkpoints."""

import sys
import time
from pathlib import Path

from partsep.harness.experiments import run_all


def log(msg: str) -> None:
    print(f"[{time.strftime('%H:%M:%S')}] {msg}", flush=True)


if __name__ == "__main__":
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    started = time.perf_counter()
    run_all(root, log=log)
    log(f"all experiments done in {(time.perf_counter() - started) / 60:.1f} min")
