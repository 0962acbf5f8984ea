"""Export command line.

    kpqa-export --samples corpus.jsonl --mode mock \
        --weights-out weights.jsonl --embeddings-out embeddings.jsonl

Modes: ``kpqa`` runs the token classifier on (question, separator, answer);
``kp`` omits the question; ``mock`` needs no model and is deterministic.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .export import MODES, ExportError, ExportJob, run_export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpqa-export", description=__doc__)
    parser.add_argument("--samples", required=True, help="samples.jsonl corpus")
    parser.add_argument("--mode", choices=MODES, default="mock")
    parser.add_argument("--model", default=None,
                        help="model id or local path (required unless --mode mock)")
    parser.add_argument("--weights-out", default=None)
    parser.add_argument("--embeddings-out", default=None)
    parser.add_argument("--layer", type=int, default=1,
                        help="hidden-state index for embeddings; 1 = first "
                             "layer after the embedding layer")
    parser.add_argument("--pooling", choices=("mean", "first"), default="mean",
                        help="subword-to-word aggregation")
    parser.add_argument("--mock-dim", type=int, default=8,
                        help="vector dimension in mock mode")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = ExportJob(
            samples_path=args.samples,
            mode=args.mode,
            model=args.model,
            layer=args.layer,
            weights_out=args.weights_out,
            embeddings_out=args.embeddings_out,
            pooling=args.pooling,
            mock_dim=args.mock_dim,
        )
        run_export(job)
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
