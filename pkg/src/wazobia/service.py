"""HTTP API serving taggers, training runs, annotations, and the UI bundle.

All error responses are ``{"error_code": ..., "message": ...}``. Tagging is
read-only and side-effect-free; training requests funnel through the
runtime's single-run policy and return 202 plus a pollable run id.
"""

from __future__ import annotations

import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse

from . import runtime
from .corpus import bundled_corpus_path, bundled_gazetteer_path
from .errors import WazobiaError
from .metrics import HISTORY_CSV_HEADER, history_csv
from .postprocess import Gazetteer
from .runtime import (
    AnnotationRecord,
    RunManager,
    Store,
    Tagger,
    default_config,
    validate_annotation_spans,
)
from .text import Language

_STATUS_BY_CODE = {
    "EMPTY_TEXT": 400,
    "BAD_LANGUAGE": 400,
    "BAD_TYPE": 400,
    "BAD_CONFIG": 400,
    "BAD_REQUEST": 400,
    "INVALID_SPANS": 400,
    "EMPTY_FILE": 400,
    "BAD_TAG": 400,
    "BAD_LINE": 400,
    "CORPUS_TOO_SMALL": 400,
    "UNKNOWN_MODEL": 404,
    "UNKNOWN_RUN": 404,
    "UNKNOWN_ANNOTATION": 404,
    "UNKNOWN_CORPUS": 404,
    "FILE_NOT_FOUND": 404,
    "RUN_IN_PROGRESS": 409,
    "OCR_UNAVAILABLE": 503,
}


def _span_payload(span) -> dict:
    return {
        "type": span.entity_type.value,
        "start_tok": span.start_tok,
        "end_tok": span.end_tok,
        "start_char": span.start_char,
        "end_char": span.end_char,
        "surface": span.surface,
    }


def create_app(
    data_dir,
    gazetteer_path=None,
    ui_dir=None,
    ocr_command: Optional[str] = None,
    hard_bio: bool = False,
) -> FastAPI:
    store = Store(data_dir)
    manager = RunManager(store)
    gazetteer = Gazetteer.load(gazetteer_path or bundled_gazetteer_path())
    taggers: dict = {}

    app = FastAPI(title="wazobia-ner")
    app.state.store = store
    app.state.run_manager = manager

    @app.exception_handler(WazobiaError)
    async def wazobia_error_handler(_request: Request, err: WazobiaError):
        return JSONResponse(
            status_code=_STATUS_BY_CODE.get(err.code, 500),
            content={"error_code": err.code, "message": err.message},
        )

    def get_tagger(model_id: Optional[str]) -> tuple[str, Tagger]:
        if model_id is None:
            # newest model file by mtime; avoids parsing every model per request
            candidates = [
                store.model_path(record.run_id)
                for record in store.list_runs()
                if store.model_path(record.run_id).exists()
            ]
            if not candidates:
                raise WazobiaError("UNKNOWN_MODEL", "no trained models available")
            model_id = max(candidates, key=lambda path: path.stat().st_mtime).parent.name
        if model_id not in taggers:
            taggers[model_id] = Tagger(
                store.load_run_model(model_id), gazetteer, hard_bio=hard_bio
            )
        return model_id, taggers[model_id]

    def tag_payload(text: str, language: Language, model_id: Optional[str]) -> dict:
        resolved_id, tagger = get_tagger(model_id)
        result = tagger.tag(text, language)
        return {
            "tokens": [
                {"text": tok.text, "start_char": tok.start_char, "end_char": tok.end_char}
                for tok in result.sentence.tokens
            ],
            "entities": [_span_payload(span) for span in result.spans],
            "model_id": resolved_id,
            "language": language.value,
        }

    @app.post("/api/tag")
    async def tag(request: Request):
        body = await _json_body(request)
        text = body.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise WazobiaError("EMPTY_TEXT", "text must be a non-empty string")
        language = Language.parse(body.get("language", "unknown"))
        return tag_payload(text, language, body.get("model_id"))

    @app.post("/api/ocr-tag")
    async def ocr_tag(
        image: UploadFile = File(...),
        language: str = Form("unknown"),
        model_id: Optional[str] = Form(None),
    ):
        lang = Language.parse(language)
        suffix = Path(image.filename or "upload").suffix or ".img"
        upload_dir = store.root / "uploads"
        upload_dir.mkdir(parents=True, exist_ok=True)
        target = upload_dir / f"{uuid.uuid4().hex}{suffix}"
        target.write_bytes(await image.read())
        try:
            extracted = runtime.ocr_extract(target, lang, ocr_command)
            if not extracted.strip():
                raise WazobiaError("EMPTY_TEXT", "OCR produced no text")
            payload = tag_payload(extracted, lang, model_id)
            payload["extracted_text"] = extracted
            return payload
        finally:
            target.unlink(missing_ok=True)

    @app.get("/api/models")
    async def models():
        return [
            {
                "model_id": model_id,
                "model_type": model.model_type,
                "created_at": model.created_at,
                "languages": [lang.value for lang in model.languages],
            }
            for model_id, model in store.list_models()
        ]

    @app.post("/api/runs", status_code=202)
    async def start_run(request: Request):
        body = await _json_body(request)
        model_type = body.get("model_type", "crf")
        config_body = body.get("config") or {}
        if not isinstance(config_body, dict):
            raise WazobiaError("BAD_REQUEST", "config must be an object")
        config = default_config(model_type, **config_body)
        if "corpus_text" in body:
            corpus_id = store.save_corpus_text(str(body["corpus_text"]))
            corpus_path = store.corpus_path(corpus_id)
        elif body.get("corpus_id"):
            corpus_path = store.corpus_path(str(body["corpus_id"]))
            if not corpus_path.exists():
                raise WazobiaError("UNKNOWN_CORPUS", f"no corpus {body['corpus_id']}")
        else:
            corpus_path = bundled_corpus_path()
        run_id = manager.start(corpus_path, model_type, config, gazetteer)
        return {"run_id": run_id}

    @app.get("/api/runs/{run_id}")
    async def get_run(run_id: str):
        record = store.load_run(run_id)
        return {
            "run_id": record.run_id,
            "model_type": record.model_type,
            "config": runtime._config_to_dict(record.config),
            "history": [vars(row) for row in record.history],
            "corpus_fingerprint": record.corpus_fingerprint,
            "status": record.status,
            "error": record.error,
            "test_metrics": record.test_metrics,
            "train_metrics": record.train_metrics,
        }

    @app.get("/api/runs/{run_id}/metrics.csv")
    async def run_metrics_csv(run_id: str):
        record = store.load_run(run_id)
        if record.history:
            content = history_csv(record.history)
        else:
            content = HISTORY_CSV_HEADER + "\n"  # mid-run with no epochs yet
        return PlainTextResponse(content, media_type="text/csv")

    @app.post("/api/annotations", status_code=201)
    async def save_annotation(request: Request):
        body = await _json_body(request)
        text = body.get("text", "")
        if not isinstance(text, str) or not text:
            raise WazobiaError("BAD_REQUEST", "text must be a non-empty string")
        try:
            spans = [runtime._span_from_dict(sp) for sp in body.get("spans", [])]
        except (KeyError, TypeError, ValueError):
            raise WazobiaError("BAD_REQUEST", "malformed spans") from None
        validate_annotation_spans(text, spans)
        provenance = body.get("provenance", "human_corrected")
        if provenance not in ("model_suggested", "human_corrected"):
            raise WazobiaError("BAD_REQUEST", f"bad provenance {provenance!r}")
        record = AnnotationRecord(
            record_id=uuid.uuid4().hex,
            text=text,
            language=Language.parse(body.get("language", "unknown")),
            spans=spans,
            created_at=runtime.utc_now(),
            provenance=provenance,
        )
        store.save_annotation(record)
        return {"record_id": record.record_id}

    @app.get("/api/annotations")
    async def list_annotations():
        return [
            {
                "record_id": record.record_id,
                "text": record.text,
                "language": record.language.value,
                "spans": [_span_payload(sp) for sp in record.spans],
                "created_at": record.created_at,
                "provenance": record.provenance,
            }
            for record in store.list_annotations()
        ]

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise WazobiaError("BAD_REQUEST", "body must be JSON") from None
    if not isinstance(body, dict):
        raise WazobiaError("BAD_REQUEST", "body must be a JSON object")
    return body
