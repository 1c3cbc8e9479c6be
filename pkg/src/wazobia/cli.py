"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime error. Progress rows from
``train`` go to stdout (one per epoch, Table-style column order); every other
diagnostic goes to stderr so stdout stays machine-readable.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import bilstm as bilstm_mod
from . import crf as crf_mod
from . import runtime
from .corpus import (
    SplitSpec,
    bundled_corpus_path,
    bundled_gazetteer_path,
    read_corpus,
    split,
    write_corpus,
)
from .errors import WazobiaError
from .metrics import export_history
from .postprocess import Gazetteer
from .runtime import Store, Tagger, default_config, evaluate, load_model
from .text import Language


def _data_dir(flag_value) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(runtime.DATA_DIR_ENV)
    return Path(env) if env else Path("wazobia_data")


def _gazetteer(path) -> Gazetteer:
    return Gazetteer.load(path or bundled_gazetteer_path())


@click.group()
def cli():
    """Named-entity recognition for Hausa, Igbo, and Yoruba."""


@cli.command("split")
@click.option("--in", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def split_cmd(input_path, seed, out_dir):
    """Write train/val/test files using the seeded 80/10/10 split."""
    corpus_read = read_corpus(input_path)
    train_set, val_set, test_set = split(corpus_read.sentences, SplitSpec(seed=seed))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, subset in (("train", train_set), ("val", val_set), ("test", test_set)):
        write_corpus(subset, out / f"{name}.txt")
    click.echo(
        f"split {len(corpus_read.sentences)} sentences -> "
        f"{len(train_set)}/{len(val_set)}/{len(test_set)} in {out}",
        err=True,
    )


@cli.command("train")
@click.option("--model", "model_type", type=click.Choice(["crf", "bilstm"]), default="crf", show_default=True)
@click.option("--in", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Corpus file; defaults to the bundled mini-corpus.")
@click.option("--epochs", default=50, show_default=True, type=int)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--lr", "learning_rate", type=float, default=None,
              help="Learning rate (default 0.1 for crf, 0.2 for bilstm).")
@click.option("--l2", "l2_lambda", type=float, default=None, help="CRF L2 strength.")
@click.option("--min-feat-freq", type=int, default=None, help="Feature frequency cutoff.")
@click.option("--data-dir", default=None, type=click.Path(file_okay=False))
@click.option("--gazetteer", "gazetteer_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Pretrained word vectors for the bilstm.")
def train_cmd(model_type, input_path, epochs, seed, learning_rate, l2_lambda,
              min_feat_freq, data_dir, gazetteer_path, embeddings_path):
    """Train synchronously; one progress row per epoch on stdout."""
    config = default_config(
        model_type,
        epochs=epochs,
        seed=seed,
        learning_rate=learning_rate,
        l2_lambda=l2_lambda,
        min_feat_freq=min_feat_freq,
    )
    store = Store(_data_dir(data_dir))
    corpus_path = Path(input_path) if input_path else bundled_corpus_path()

    def print_epoch(row):
        click.echo(
            f"{row.epoch}\t{row.training_loss:.6f}\t{row.validation_loss:.6f}\t"
            f"{row.precision:.6f}\t{row.recall:.6f}\t{row.f1:.6f}\t{row.accuracy:.6f}"
        )

    record = runtime.execute_run(
        corpus_path,
        model_type,
        config,
        store,
        _gazetteer(gazetteer_path),
        on_epoch=print_epoch,
        embeddings_path=embeddings_path,
    )
    click.echo(f"run_id: {record.run_id}", err=True)
    click.echo(f"model: {store.model_path(record.run_id)}", err=True)
    for name, summary in (("train", record.train_metrics), ("test", record.test_metrics)):
        click.echo(
            f"{name}: P={summary['precision']:.6f} R={summary['recall']:.6f} "
            f"F1={summary['f1_score']:.6f} acc={summary['accuracy']:.6f} "
            f"acc(no O)={summary['accuracy_excluding_o']:.6f}",
            err=True,
        )


@cli.command("eval")
@click.option("--model-file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--in", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--gazetteer", "gazetteer_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--hard-bio-constraints", is_flag=True, default=False)
def eval_cmd(model_file, input_path, gazetteer_path, hard_bio_constraints):
    """Evaluate a saved model: micro and per-type PRF plus both accuracies."""
    model = load_model(model_file)
    tagger = Tagger(model, _gazetteer(gazetteer_path), hard_bio=hard_bio_constraints)
    corpus_read = read_corpus(input_path)
    results = evaluate(tagger, corpus_read.sentences)
    micro = results["micro"]
    click.echo(
        f"micro\tP={micro.precision:.6f}\tR={micro.recall:.6f}\tF1={micro.f1:.6f}"
        f"\ttp={micro.tp}\tfp={micro.fp}\tfn={micro.fn}"
    )
    for entity_type, prf in results["per_type"].items():
        click.echo(
            f"{entity_type.value}\tP={prf.precision:.6f}\tR={prf.recall:.6f}\tF1={prf.f1:.6f}"
            f"\ttp={prf.tp}\tfp={prf.fp}\tfn={prf.fn}"
        )
    click.echo(f"token_accuracy\t{results['accuracy']:.6f}")
    click.echo(f"token_accuracy_excluding_o\t{results['accuracy_excluding_o']:.6f}")


@cli.command("tag")
@click.option("--model-file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--text", default=None)
@click.option("--file", "file_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--ocr", "ocr_image", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Extract the input text from an image via the OCR command.")
@click.option("--ocr-command", default=None,
              help=f"OCR command template (default: ${runtime.OCR_COMMAND_ENV}).")
@click.option("--language", default="unknown", show_default=True)
@click.option("--gazetteer", "gazetteer_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--hard-bio-constraints", is_flag=True, default=False)
def tag_cmd(model_file, text, file_path, ocr_image, ocr_command, language,
            gazetteer_path, hard_bio_constraints):
    """Print entity spans as TYPE<TAB>start_char<TAB>end_char<TAB>surface."""
    language_value = Language.parse(language)
    sources = [s for s in (text, file_path, ocr_image) if s is not None]
    if len(sources) != 1:
        raise click.UsageError("provide exactly one of --text, --file, --ocr")
    if ocr_image is not None:
        template = ocr_command or os.environ.get(runtime.OCR_COMMAND_ENV)
        text = runtime.ocr_extract(ocr_image, language_value, template)
    elif file_path is not None:
        text = Path(file_path).read_text(encoding="utf-8")
    if not (text or "").strip():
        raise click.UsageError("no text to tag")
    model = load_model(model_file)
    tagger = Tagger(model, _gazetteer(gazetteer_path), hard_bio=hard_bio_constraints)
    result = tagger.tag(text, language_value)
    for span in result.spans:
        click.echo(
            f"{span.entity_type.value}\t{span.start_char}\t{span.end_char}\t{span.surface}"
        )


@cli.command("serve")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default=None, type=click.Path(file_okay=False))
@click.option("--ui-dir", default=None, type=click.Path(exists=True, file_okay=False),
              help="Static UI bundle to serve at /.")
@click.option("--gazetteer", "gazetteer_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--ocr-command", default=None)
@click.option("--hard-bio-constraints", is_flag=True, default=False)
def serve_cmd(port, host, data_dir, ui_dir, gazetteer_path, ocr_command, hard_bio_constraints):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(
        _data_dir(data_dir),
        gazetteer_path=gazetteer_path,
        ui_dir=ui_dir,
        ocr_command=ocr_command or os.environ.get(runtime.OCR_COMMAND_ENV),
        hard_bio=hard_bio_constraints,
    )
    uvicorn.run(app, host=host, port=port)


@cli.group("metrics")
def metrics_group():
    """Metrics-history utilities."""


@metrics_group.command("export")
@click.option("--run", "run_id", required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--data-dir", default=None, type=click.Path(file_okay=False))
def metrics_export_cmd(run_id, out_path, data_dir):
    """Write a run's per-epoch history as CSV."""
    store = Store(_data_dir(data_dir))
    record = store.load_run(run_id)
    export_history(record.history, out_path)
    click.echo(f"wrote {len(record.history)} epochs to {out_path}", err=True)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as err:
        click.echo(f"usage error: {err.format_message()}", err=True)
        return 1
    except click.ClickException as err:
        click.echo(f"error: {err.format_message()}", err=True)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except WazobiaError as err:
        click.echo(str(err), err=True)
        return 2
    except OSError as err:
        click.echo(f"io error: {err}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
