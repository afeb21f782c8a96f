#!/usr/bin/env python3
"""End-to-end demo: synthesize a corpus, run the full pipeline with the
identity mock backend, then filter and stratified-sample the result.

Everything is seeded, so repeated runs are byte-identical.
"""

import argparse
import subprocess
import sys
from pathlib import Path

from tarjama.cli import main as tarjama_main


def run(args: list[str]) -> None:
    print(f"$ tarjama {' '.join(args)}")
    rc = tarjama_main(args)
    if rc != 0:
        sys.exit(rc)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="mock_run")
    parser.add_argument("--num", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    corpus = work / "corpus.jsonl"
    manifest = work / "runs.jsonl"

    subprocess.run([sys.executable, str(Path(__file__).parent / "make_synthetic_corpus.py"),
                    "--out", str(corpus), "--num", str(args.num),
                    "--seed", str(args.seed)], check=True)

    out = work / "pipeline"
    run(["pipeline", "--input", str(corpus), "--out", str(out),
         "--backend", "mock-identity", "--manifest", str(manifest)])
    run(["stats", "--scored", str(out / "scored.jsonl"),
         "--out", str(work / "report.md"), "--format", "markdown",
         "--manifest", str(manifest)])
    run(["filter", "--corpus", str(out / "translated_corpus.jsonl"),
         "--scored", str(out / "scored.jsonl"),
         "--kept-out", str(work / "kept.jsonl"),
         "--rejected-out", str(work / "rejected.jsonl"),
         "--manifest", str(manifest)])
    run(["sample", "--corpus", str(work / "kept.jsonl"),
         "--out", str(work / "sampled.jsonl"),
         "--ratios", "code:1,science:1,math:2",
         "--total", str(max(4, args.num // 4)),
         "--seed", str(args.seed), "--allow-shortfall",
         "--manifest", str(manifest)])

    print(f"\nartifacts in {work}/ (report: {work / 'report.md'})")


if __name__ == "__main__":
    main()
