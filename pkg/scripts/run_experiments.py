#!/usr/bin/env python3
"""Train both model families on the bundled corpus and export their histories.

Writes ``experiments/<model>_history.csv`` (chart-ready, same schema the
service serves) plus a final-epoch comparison table on stdout.

    python3 scripts/run_experiments.py --epochs 50 --seed 42
"""

import argparse
import sys
from pathlib import Path

from wazobia import bilstm, crf
from wazobia.corpus import (
    SplitSpec,
    bundled_corpus_path,
    bundled_gazetteer_path,
    read_corpus,
    split,
)
from wazobia.features import build_vocab
from wazobia.metrics import export_history
from wazobia.postprocess import Gazetteer
from wazobia.runtime import DEFAULT_LEARNING_RATE


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--corpus", type=Path, default=None)
    parser.add_argument("--out-dir", type=Path, default=Path("experiments"))
    args = parser.parse_args()

    corpus_path = args.corpus or bundled_corpus_path()
    corpus = read_corpus(corpus_path).sentences
    gazetteer = Gazetteer.load(bundled_gazetteer_path())
    train_set, val_set, test_set = split(corpus, SplitSpec(seed=args.seed))
    print(
        f"corpus: {len(corpus)} sentences -> {len(train_set)}/{len(val_set)}/{len(test_set)}",
        file=sys.stderr,
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)

    histories = {}
    config = crf.TrainConfig(
        epochs=args.epochs, seed=args.seed, learning_rate=DEFAULT_LEARNING_RATE["crf"]
    )
    vocab = build_vocab([ex.sentence for ex in train_set], gazetteer)
    _, histories["crf"] = crf.train(train_set, val_set, config, vocab, gazetteer)

    config = crf.TrainConfig(
        epochs=args.epochs, seed=args.seed, learning_rate=DEFAULT_LEARNING_RATE["bilstm"]
    )
    word_vocab = bilstm.build_word_vocab(train_set)
    _, histories["bilstm"] = bilstm.train(train_set, val_set, config, word_vocab)

    print(f"{'model':8} {'train_loss':>10} {'val_loss':>10} {'P':>8} {'R':>8} {'F1':>8} {'acc':>8}")
    for name, history in histories.items():
        export_history(history, args.out_dir / f"{name}_history.csv")
        last = history[-1]
        print(
            f"{name:8} {last.training_loss:10.4f} {last.validation_loss:10.4f} "
            f"{last.precision:8.4f} {last.recall:8.4f} {last.f1:8.4f} {last.accuracy:8.4f}"
        )
    print(f"histories written to {args.out_dir}/", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
