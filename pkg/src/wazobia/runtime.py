"""Model serialization, the file-backed run/annotation store, training
orchestration, and the external OCR adapter.

Store layout under the data root (flag ``--data-dir`` or env var
``WAZOBIA_DATA_DIR``, flag wins):

    <root>/runs/<run_id>/record        run record (JSON)
    <root>/runs/<run_id>/model         model file (JSON)
    <root>/annotations/<record_id>     annotation record (JSON)
    <root>/corpora/<corpus_id>         uploaded corpus files

Weights are serialized as decimal numbers via Python's shortest round-trip
repr, which is lossless for IEEE-754 doubles, so a saved model tags exactly
like the in-memory one. Writes go through a temp file + rename so concurrent
readers never observe a half-written record.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import shlex
import subprocess
import threading
import uuid
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import bilstm as bilstm_mod
from . import crf as crf_mod
from . import features as features_mod
from .corpus import LabeledSentence, SplitSpec, read_corpus, split
from .errors import WazobiaError
from .metrics import PRF, RunEpoch, entity_prf, token_accuracy
from .postprocess import Gazetteer, disambiguate
from .text import (
    BIO_LABELS,
    EntitySpan,
    Language,
    Sentence,
    decode_bio,
    sentence_from_text,
)

FORMAT_VERSION = 1
MODEL_TYPES = ("crf", "bilstm")
DEFAULT_LEARNING_RATE = {"crf": 0.1, "bilstm": 0.2}

DATA_DIR_ENV = "WAZOBIA_DATA_DIR"
OCR_COMMAND_ENV = "WAZOBIA_OCR_COMMAND"

# Tesseract-style language codes for the {lang} substitution.
OCR_LANG_CODES = {
    Language.HAUSA: "hau",
    Language.IGBO: "ibo",
    Language.YORUBA: "yor",
    Language.UNKNOWN: "eng",
}


def utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def default_config(model_type: str, **overrides) -> crf_mod.TrainConfig:
    """TrainConfig with the per-model default learning rate filled in."""
    if model_type not in MODEL_TYPES:
        raise WazobiaError("BAD_CONFIG", f"unknown model type {model_type!r}")
    values = {"learning_rate": DEFAULT_LEARNING_RATE[model_type]}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return crf_mod.TrainConfig(**values)


# ---------------------------------------------------------------------------
# Model files


@dataclass
class LoadedModel:
    """A trained model plus everything needed to tag with it."""

    model_type: str
    labels: Tuple[str, ...]
    languages: List[Language]
    config: crf_mod.TrainConfig
    created_at: str
    feature_vocab: Optional[features_mod.FeatureVocab] = None
    crf_params: Optional[crf_mod.CrfParams] = None
    word_vocab: Optional[bilstm_mod.WordVocab] = None
    bilstm_params: Optional[bilstm_mod.BilstmParams] = None


def _config_to_dict(config: crf_mod.TrainConfig) -> dict:
    return asdict(config)


def _config_from_dict(data: dict) -> crf_mod.TrainConfig:
    known = {f for f in crf_mod.TrainConfig.__dataclass_fields__}
    return crf_mod.TrainConfig(**{k: v for k, v in data.items() if k in known})


def save_model(model: LoadedModel, path) -> None:
    doc: dict = {
        "format_version": FORMAT_VERSION,
        "model_type": model.model_type,
        "labels": list(model.labels),
        "languages": [lang.value for lang in model.languages],
        "created_at": model.created_at,
        "config": _config_to_dict(model.config),
    }
    if model.model_type == "crf":
        assert model.feature_vocab is not None and model.crf_params is not None
        doc["feature_vocab"] = model.feature_vocab.index
        doc["weights"] = {
            "emission": model.crf_params.emission.tolist(),
            "transition": model.crf_params.transition.tolist(),
        }
    else:
        assert model.word_vocab is not None and model.bilstm_params is not None
        doc["word_vocab"] = model.word_vocab.index
        doc["weights"] = {
            name: array.tolist() for name, array in model.bilstm_params.named_arrays()
        }
    _atomic_write(Path(path), json.dumps(doc))


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise WazobiaError("CORRUPT_FILE", f"missing field {path}{key}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise WazobiaError("CORRUPT_FILE", f"field {path}{key} is not a number")
    elif not isinstance(value, kind):
        raise WazobiaError(
            "CORRUPT_FILE", f"field {path}{key} has type {type(value).__name__}"
        )
    return value


def _array(doc: dict, key: str, shape: Tuple[int, ...], path: str) -> np.ndarray:
    raw = _require(doc, key, list, path)
    try:
        array = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError):
        raise WazobiaError("CORRUPT_FILE", f"field {path}{key} is not numeric") from None
    if array.shape != shape:
        raise WazobiaError(
            "CORRUPT_FILE", f"field {path}{key} has shape {array.shape}, expected {shape}"
        )
    return array


def load_model(path) -> LoadedModel:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise WazobiaError("FILE_NOT_FOUND", f"no model file at {path}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as err:
        raise WazobiaError("CORRUPT_FILE", f"not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise WazobiaError("CORRUPT_FILE", "top-level value is not an object")

    version = _require(doc, "format_version", int, "")
    if version != FORMAT_VERSION:
        raise WazobiaError("BAD_VERSION", f"unsupported format_version {version}")
    model_type = _require(doc, "model_type", str, "")
    if model_type not in MODEL_TYPES:
        raise WazobiaError("CORRUPT_FILE", f"field model_type has value {model_type!r}")
    labels = tuple(_require(doc, "labels", list, ""))
    if labels != BIO_LABELS:
        raise WazobiaError("CORRUPT_FILE", "field labels does not match the 7-label scheme")
    languages = [Language.parse(v) for v in _require(doc, "languages", list, "")]
    created_at = _require(doc, "created_at", str, "")
    config = _config_from_dict(_require(doc, "config", dict, ""))
    weights = _require(doc, "weights", dict, "")

    model = LoadedModel(model_type, labels, languages, config, created_at)
    if model_type == "crf":
        vocab_map = _require(doc, "feature_vocab", dict, "")
        vocab = features_mod.FeatureVocab(dict(vocab_map)).freeze()
        n_feat = len(vocab)
        model.feature_vocab = vocab
        model.crf_params = crf_mod.CrfParams(
            _array(weights, "emission", (n_feat, len(BIO_LABELS)), "weights."),
            _array(weights, "transition", (len(BIO_LABELS), len(BIO_LABELS)), "weights."),
        )
    else:
        vocab_map = _require(doc, "word_vocab", dict, "")
        word_vocab = bilstm_mod.WordVocab(dict(vocab_map)).freeze()
        model.word_vocab = word_vocab
        params = bilstm_mod.BilstmParams.zeros(
            len(word_vocab), config.embed_dim, config.hidden_dim
        )
        for name, array in params.named_arrays():
            array[...] = _array(weights, name, array.shape, "weights.")
        model.bilstm_params = params
    return model


# ---------------------------------------------------------------------------
# Tagging pipeline


@dataclass
class TagResult:
    sentence: Sentence
    labels: List[str]
    spans: List[EntitySpan]


class Tagger:
    """Tokenize -> label -> span decode -> gazetteer disambiguation."""

    def __init__(self, model: LoadedModel, gazetteer: Optional[Gazetteer] = None, hard_bio: bool = False):
        self.model = model
        self.gazetteer = gazetteer if gazetteer is not None else Gazetteer()
        self.hard_bio = hard_bio

    def label_sentence(self, sentence: Sentence) -> List[str]:
        if self.model.model_type == "crf":
            feats = features_mod.sentence_features(
                sentence, self.model.feature_vocab, self.gazetteer
            )
            labels = crf_mod.predict_labels(
                self.model.crf_params, feats, hard_bio=self.hard_bio
            )
        else:
            labels = bilstm_mod.predict_labels(
                self.model.bilstm_params, sentence, self.model.word_vocab
            )
        return crf_mod.pipeline_labels(labels, sentence)

    def tag(self, raw_text: str, language: Language = Language.UNKNOWN) -> TagResult:
        if not raw_text.strip():
            raise WazobiaError("EMPTY_TEXT", "nothing to tag")
        sentence = sentence_from_text(raw_text, language)
        labels = self.label_sentence(sentence)
        spans = decode_bio(labels, sentence.tokens)
        spans = disambiguate(spans, sentence, self.gazetteer)
        spans = [
            EntitySpan(
                sp.entity_type,
                sp.start_tok,
                sp.end_tok,
                sp.start_char,
                sp.end_char,
                raw_text[sp.start_char : sp.end_char],
            )
            for sp in spans
        ]
        return TagResult(sentence, labels, spans)


def evaluate(
    tagger: Tagger, examples: Sequence[LabeledSentence]
) -> Dict[str, object]:
    """Entity PRF (micro + per type) and both token accuracies."""
    gold_labels, pred_labels, gold_spans, pred_spans = [], [], [], []
    for example in examples:
        predicted = tagger.label_sentence(example.sentence)
        gold_labels.append(list(example.labels))
        pred_labels.append(predicted)
        gold_spans.append(decode_bio(example.labels))
        pred_spans.append(decode_bio(predicted))
    micro, per_type = entity_prf(gold_spans, pred_spans)
    return {
        "micro": micro,
        "per_type": per_type,
        "accuracy": token_accuracy(gold_labels, pred_labels),
        "accuracy_excluding_o": token_accuracy(gold_labels, pred_labels, exclude_o=True),
    }


def metrics_summary(results: Dict[str, object]) -> dict:
    micro: PRF = results["micro"]  # type: ignore[assignment]
    return {
        "precision": micro.precision,
        "recall": micro.recall,
        "f1_score": micro.f1,
        "accuracy": results["accuracy"],
        "accuracy_excluding_o": results["accuracy_excluding_o"],
    }


# ---------------------------------------------------------------------------
# Store


@dataclass
class RunRecord:
    run_id: str
    model_type: str
    config: crf_mod.TrainConfig
    history: List[RunEpoch] = field(default_factory=list)
    corpus_fingerprint: str = ""
    status: str = "running"  # running | done | failed
    error: Optional[str] = None
    test_metrics: Optional[dict] = None
    train_metrics: Optional[dict] = None


@dataclass
class AnnotationRecord:
    record_id: str
    text: str
    language: Language
    spans: List[EntitySpan]
    created_at: str
    provenance: str  # model_suggested | human_corrected


def _atomic_write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _span_to_dict(span: EntitySpan) -> dict:
    return {
        "type": span.entity_type.value,
        "start_tok": span.start_tok,
        "end_tok": span.end_tok,
        "start_char": span.start_char,
        "end_char": span.end_char,
        "surface": span.surface,
    }


def _span_from_dict(data: dict) -> EntitySpan:
    from .text import EntityType

    return EntitySpan(
        EntityType.parse(str(data["type"])),
        int(data["start_tok"]),
        int(data["end_tok"]),
        int(data.get("start_char", 0)),
        int(data.get("end_char", 0)),
        str(data.get("surface", "")),
    )


class Store:
    """File-backed persistence for runs, models, annotations, and corpora.

    Writes are serialized through a single lock; reads are lock-free and
    rely on atomic renames.
    """

    def __init__(self, root) -> None:
        self.root = Path(root)
        self._write_lock = threading.Lock()

    # -- paths
    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def record_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "record"

    def model_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "model"

    def annotation_path(self, record_id: str) -> Path:
        return self.root / "annotations" / record_id

    def corpus_path(self, corpus_id: str) -> Path:
        return self.root / "corpora" / corpus_id

    # -- runs
    def save_run(self, record: RunRecord) -> None:
        doc = {
            "run_id": record.run_id,
            "model_type": record.model_type,
            "config": _config_to_dict(record.config),
            "history": [asdict(row) for row in record.history],
            "corpus_fingerprint": record.corpus_fingerprint,
            "status": record.status,
            "error": record.error,
            "test_metrics": record.test_metrics,
            "train_metrics": record.train_metrics,
        }
        with self._write_lock:
            _atomic_write(self.record_path(record.run_id), json.dumps(doc))

    def load_run(self, run_id: str) -> RunRecord:
        path = self.record_path(run_id)
        if not path.exists():
            raise WazobiaError("UNKNOWN_RUN", f"no run {run_id}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        return RunRecord(
            run_id=doc["run_id"],
            model_type=doc["model_type"],
            config=_config_from_dict(doc["config"]),
            history=[RunEpoch(**row) for row in doc["history"]],
            corpus_fingerprint=doc["corpus_fingerprint"],
            status=doc["status"],
            error=doc.get("error"),
            test_metrics=doc.get("test_metrics"),
            train_metrics=doc.get("train_metrics"),
        )

    def list_runs(self) -> List[RunRecord]:
        runs_dir = self.root / "runs"
        if not runs_dir.exists():
            return []
        records = [
            self.load_run(p.name) for p in sorted(runs_dir.iterdir()) if (p / "record").exists()
        ]
        return records

    def load_run_model(self, run_id: str) -> LoadedModel:
        path = self.model_path(run_id)
        if not path.exists():
            raise WazobiaError("UNKNOWN_MODEL", f"no model for run {run_id}")
        return load_model(path)

    def list_models(self) -> List[Tuple[str, LoadedModel]]:
        pairs = []
        for record in self.list_runs():
            if self.model_path(record.run_id).exists():
                pairs.append((record.run_id, self.load_run_model(record.run_id)))
        return pairs

    # -- annotations
    def save_annotation(self, record: AnnotationRecord) -> None:
        doc = {
            "record_id": record.record_id,
            "text": record.text,
            "language": record.language.value,
            "spans": [_span_to_dict(sp) for sp in record.spans],
            "created_at": record.created_at,
            "provenance": record.provenance,
        }
        with self._write_lock:
            _atomic_write(self.annotation_path(record.record_id), json.dumps(doc))

    def load_annotation(self, record_id: str) -> AnnotationRecord:
        path = self.annotation_path(record_id)
        if not path.exists():
            raise WazobiaError("UNKNOWN_ANNOTATION", f"no annotation {record_id}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        return AnnotationRecord(
            record_id=doc["record_id"],
            text=doc["text"],
            language=Language.parse(doc["language"]),
            spans=[_span_from_dict(sp) for sp in doc["spans"]],
            created_at=doc["created_at"],
            provenance=doc["provenance"],
        )

    def list_annotations(self) -> List[AnnotationRecord]:
        ann_dir = self.root / "annotations"
        if not ann_dir.exists():
            return []
        return [self.load_annotation(p.name) for p in sorted(ann_dir.iterdir())]

    # -- corpora
    def save_corpus_text(self, text: str) -> str:
        corpus_id = uuid.uuid4().hex
        with self._write_lock:
            _atomic_write(self.corpus_path(corpus_id), text)
        return corpus_id


def validate_annotation_spans(text: str, spans: Sequence[EntitySpan]) -> None:
    """Spans must map onto a re-tokenization of the text, non-overlapping."""
    tokens = sentence_from_text(text).tokens
    seen_tokens: set = set()
    for span in spans:
        if not (0 <= span.start_tok <= span.end_tok < len(tokens)):
            raise WazobiaError(
                "INVALID_SPANS", f"token range {span.start_tok}..{span.end_tok} out of bounds"
            )
        if (
            span.start_char != tokens[span.start_tok].start_char
            or span.end_char != tokens[span.end_tok].end_char
        ):
            raise WazobiaError(
                "INVALID_SPANS",
                f"character offsets {span.start_char}..{span.end_char} do not match tokens",
            )
        for i in range(span.start_tok, span.end_tok + 1):
            if i in seen_tokens:
                raise WazobiaError("INVALID_SPANS", f"token {i} covered twice")
            seen_tokens.add(i)


# ---------------------------------------------------------------------------
# Training orchestration


def corpus_fingerprint(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def execute_run(
    corpus_path,
    model_type: str,
    config: crf_mod.TrainConfig,
    store: Store,
    gazetteer: Optional[Gazetteer] = None,
    run_id: Optional[str] = None,
    on_epoch: Optional[Callable[[RunEpoch], None]] = None,
    embeddings_path=None,
) -> RunRecord:
    """Split, train, evaluate on the held-out test block, persist everything.

    The record file is rewritten after every epoch, so pollers watching
    ``record`` see history grow while the run is in flight.
    """
    if model_type not in MODEL_TYPES:
        raise WazobiaError("BAD_CONFIG", f"unknown model type {model_type!r}")
    run_id = run_id or uuid.uuid4().hex
    gaz = gazetteer if gazetteer is not None else Gazetteer()
    record = RunRecord(run_id, model_type, config, corpus_fingerprint=corpus_fingerprint(corpus_path))
    store.save_run(record)
    try:
        corpus_read = read_corpus(corpus_path)
        train_set, val_set, test_set = split(corpus_read.sentences, SplitSpec(seed=config.seed))

        def epoch_hook(row: RunEpoch) -> None:
            record.history.append(row)
            store.save_run(record)
            if on_epoch is not None:
                on_epoch(row)

        if model_type == "crf":
            vocab = features_mod.build_vocab(
                [ex.sentence for ex in train_set], gaz, min_freq=config.min_feat_freq
            )
            params, _ = crf_mod.train(train_set, val_set, config, vocab, gaz, on_epoch=epoch_hook)
            model = LoadedModel(
                "crf",
                BIO_LABELS,
                sorted({ex.sentence.language for ex in corpus_read.sentences}, key=lambda l: l.value),
                config,
                utc_now(),
                feature_vocab=vocab,
                crf_params=params,
            )
        else:
            if embeddings_path is not None:
                word_vocab, pretrained = bilstm_mod.load_embeddings(embeddings_path)
                config = crf_mod.TrainConfig(**{**_config_to_dict(config), "embed_dim": pretrained.shape[1]})
            else:
                word_vocab, pretrained = bilstm_mod.build_word_vocab(train_set), None
            params, _ = bilstm_mod.train(
                train_set, val_set, config, word_vocab,
                pretrained_embeddings=pretrained, on_epoch=epoch_hook,
            )
            model = LoadedModel(
                "bilstm",
                BIO_LABELS,
                sorted({ex.sentence.language for ex in corpus_read.sentences}, key=lambda l: l.value),
                config,
                utc_now(),
                word_vocab=word_vocab,
                bilstm_params=params,
            )

        save_model(model, store.model_path(run_id))
        tagger = Tagger(model, gaz)
        record.train_metrics = metrics_summary(evaluate(tagger, train_set))
        record.test_metrics = metrics_summary(evaluate(tagger, test_set))
        record.status = "done"
        store.save_run(record)
        return record
    except Exception as err:
        record.status = "failed"
        record.error = str(err)
        store.save_run(record)
        raise


class RunManager:
    """Single-run policy: at most one training run in flight per process."""

    def __init__(self, store: Store):
        self.store = store
        self._lock = threading.Lock()
        self._thread: Optional[threading.Thread] = None

    def busy(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def start(
        self,
        corpus_path,
        model_type: str,
        config: crf_mod.TrainConfig,
        gazetteer: Optional[Gazetteer] = None,
    ) -> str:
        with self._lock:
            if self.busy():
                raise WazobiaError("RUN_IN_PROGRESS", "another training run is in flight")
            run_id = uuid.uuid4().hex

            def work():
                try:
                    execute_run(
                        corpus_path, model_type, config, self.store, gazetteer, run_id=run_id
                    )
                except Exception:
                    pass  # failure state already persisted by execute_run

            self._thread = threading.Thread(target=work, daemon=True)
            self._thread.start()
            return run_id

    def wait(self, timeout: Optional[float] = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)


# ---------------------------------------------------------------------------
# OCR adapter


def ocr_extract(image_path, language: Language, command_template: Optional[str]) -> str:
    """Run the configured OCR command with {input}/{lang} substituted.

    Returns the command's stdout with trailing whitespace stripped.
    """
    if not command_template:
        raise WazobiaError("OCR_UNAVAILABLE", "no OCR command configured")
    path = Path(image_path)
    if not path.exists():
        raise WazobiaError("FILE_NOT_FOUND", f"no such image: {image_path}")
    argv = [
        part.replace("{input}", str(path)).replace("{lang}", OCR_LANG_CODES[language])
        for part in shlex.split(command_template)
    ]
    try:
        result = subprocess.run(argv, capture_output=True, timeout=120)
    except FileNotFoundError:
        raise WazobiaError("OCR_UNAVAILABLE", f"OCR command not found: {argv[0]}") from None
    except subprocess.TimeoutExpired:
        raise WazobiaError("OCR_FAILED", "OCR command timed out") from None
    if result.returncode != 0:
        stderr = result.stderr.decode("utf-8", errors="replace").strip()
        raise WazobiaError(
            "OCR_FAILED", f"OCR exited with {result.returncode}: {stderr}"
        )
    return result.stdout.decode("utf-8", errors="replace").rstrip()
