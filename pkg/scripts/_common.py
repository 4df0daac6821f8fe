"""Shared helpers for the experiment scripts."""
import argparse
import sys
from pathlib import Path

from gradhss.bench.config import load_config
from gradhss.bench.experiments import run


def parser(description: str, out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=f"results/{out}")
    p.add_argument("--quick", action="store_true", help="smaller instances for a fast look")
    return p


def run_kind(kind: str, overrides: dict) -> int:
    cfg = load_config(None, kind, overrides)
    status = run(cfg)
    print(f"{kind}: {'ok' if status == 0 else 'FAILED'} -> {Path(cfg.out).resolve()}")
    return status


def finish(status: int) -> None:
    sys.exit(status)
