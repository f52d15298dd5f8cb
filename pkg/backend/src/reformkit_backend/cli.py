"""Backend command line: train the generator and classifier, serve them."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .classifier import load_labeled_corpus, save_classifier, train_classifier
from .data import generable_triads, load_triads
from .model import DecodingConfig
from .service import CLASSIFIER_FILE, GENERATOR_FILE, create_app
from .train import TrainingConfig, save_artifact, train

DEFAULT_ACCEPTABILITY = Path(__file__).resolve().parent.parent.parent / "data" / "acceptability.jsonl"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reformkit-backend", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the type-guided generator on a triad file")
    p.add_argument("--triads", required=True, help="line-delimited triad file")
    p.add_argument("--domain", choices=["movie", "travel", "hybrid"], default="hybrid")
    p.add_argument("--base-model", default="gru-small")
    p.add_argument("--batch-size", type=int, default=10)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--epochs", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unguided", action="store_true", help="train the ablation without type tokens")
    p.add_argument("--decoding", choices=["greedy", "topk", "nucleus"], default="nucleus")
    p.add_argument("--top-p", type=float, default=0.5)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--decoding-seed", type=int, default=0)
    p.add_argument("--artifacts", required=True, help="output directory")

    p = sub.add_parser("train-classifier", help="train the acceptability classifier")
    p.add_argument("--corpus", default=str(DEFAULT_ACCEPTABILITY))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--artifacts", required=True, help="output directory")

    p = sub.add_parser("serve", help="serve the trained artifacts")
    p.add_argument("--artifacts", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8710)
    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    triads = generable_triads(load_triads(args.triads), domain=args.domain)
    cfg = TrainingConfig(
        base_model=args.base_model,
        domain=args.domain,
        batch_size=args.batch_size,
        folds=args.folds,
        epochs=args.epochs,
        seed=args.seed,
        guided=not args.unguided,
        decoding=DecodingConfig(
            mode=args.decoding, top_p=args.top_p, top_k=args.top_k, seed=args.decoding_seed
        ),
    )
    result = train(triads, cfg)
    artifacts = Path(args.artifacts)
    artifacts.mkdir(parents=True, exist_ok=True)
    save_artifact(result.artifact, artifacts / GENERATOR_FILE)
    for fold in result.folds:
        print(
            f"fold {fold.fold}: train={fold.n_train} val={fold.n_validation} "
            f"rougeL={fold.validation_rouge_l:.3f} "
            f"loss {fold.first_loss:.3f} -> {fold.last_loss:.3f}"
        )
    mean = sum(result.fold_scores()) / len(result.folds)
    print(f"mean fold rougeL {mean:.3f}; artifact written to {artifacts / GENERATOR_FILE}")
    return 0


def _cmd_train_classifier(args: argparse.Namespace) -> int:
    examples = load_labeled_corpus(args.corpus)
    classifier = train_classifier(examples, seed=args.seed)
    artifacts = Path(args.artifacts)
    artifacts.mkdir(parents=True, exist_ok=True)
    save_classifier(classifier, artifacts / CLASSIFIER_FILE)
    correct = sum(classifier.acceptable(text)[0] == bool(label) for text, label in examples)
    print(f"classifier trained on {len(examples)} examples ({correct} fit); "
          f"artifact written to {artifacts / CLASSIFIER_FILE}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    app = create_app(args.artifacts)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    commands = {
        "train": _cmd_train,
        "train-classifier": _cmd_train_classifier,
        "serve": _cmd_serve,
    }
    return commands[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
