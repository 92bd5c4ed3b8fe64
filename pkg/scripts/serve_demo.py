#!/usr/bin/env python3
"""Launch the labeling service on a synthetic demo corpus.

Generates a small synthetic corpus (if the data directory is empty) and
serves the labeling API, optionally with the built frontend mounted at /.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from tddetect import cli, service


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="out/demo", help="data directory")
    ap.add_argument("--n", type=int, default=200, help="demo corpus size")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--listen", default="127.0.0.1:8080")
    ap.add_argument(
        "--frontend", default="frontend/dist",
        help="static assets to mount at / (skipped if missing)",
    )
    args = ap.parse_args()

    data = Path(args.data)
    corpus_path = data / "corpus.jsonl"
    if not corpus_path.exists():
        rc = cli.main([
            "gen-synthetic", "--n", str(args.n), "--seed", str(args.seed),
            "--out", str(data),
        ])
        if rc != 0:
            raise SystemExit(rc)

    frontend = args.frontend if Path(args.frontend).is_dir() else None
    if frontend is None:
        print(f"frontend dir {args.frontend!r} not found; serving API only")
    service.run_server(
        str(corpus_path),
        str(data / "labels.jsonl"),
        str(data / "pretrained.txt"),
        listen=args.listen,
        seed=args.seed,
        frontend_dir=frontend,
    )


if __name__ == "__main__":
    main()
