"""HTTP facade over the solution store.

Endpoints (JSON everywhere; every non-2xx body is
{"status": int, "code": str, "message": str}):

    GET  /api/solutions?cursor=&skeleton=     paged summaries
    GET  /api/solutions/top?skeleton=&k=      top-rated (the evolve seeds)
    GET  /api/solutions/{id}                  record without the trace
    GET  /api/solutions/{id}/trace            the stored trace file, verbatim
    POST /api/solutions                       create from a SolutionRecord body
    POST /api/solutions/{id}/ratings          {value, rater_token} -> crowd score
    GET  /healthz

The list endpoint pages DEFAULT_PAGE_SIZE items per call with an opaque
cursor. CORS allows cross-origin GETs and rating POSTs so the web gallery
can be hosted separately during development.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging

import uvicorn
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import DuplicateIdError, NotFoundError, SchemaVersionError, ValidationError
from .gallery import DEFAULT_THRESHOLD, Rating, SolutionStore, record_from_dict, record_to_dict

log = logging.getLogger(__name__)

DEFAULT_PAGE_SIZE = 50


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _encode_cursor(last_id: str) -> str:
    return base64.urlsafe_b64encode(last_id.encode()).decode()


_URLSAFE_TO_STANDARD = bytes.maketrans(b"-_", b"+/")


def _decode_cursor(cursor: str) -> str:
    try:
        raw = cursor.encode("ascii").translate(_URLSAFE_TO_STANDARD)
        return base64.b64decode(raw, validate=True).decode()
    except (binascii.Error, UnicodeDecodeError, ValueError):
        raise ApiError(400, "bad_cursor", f"malformed cursor {cursor!r}") from None


def create_app(store: SolutionStore, page_size: int = DEFAULT_PAGE_SIZE) -> FastAPI:
    app = FastAPI(title="crowdwalk gallery", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def api_error_handler(_req, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"status": exc.status, "code": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"status": 400, "code": "bad_request", "message": str(exc)},
        )

    def _json_body(payload: bytes) -> dict:
        try:
            doc = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ApiError(400, "bad_request", f"body is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ApiError(400, "bad_request", "body must be a JSON object")
        return doc

    @app.get("/healthz")
    def healthz():
        store.solution_ids()  # readable store or it raises
        return {"status": "ok"}

    @app.get("/api/solutions")
    def list_solutions(cursor: str | None = None, skeleton: str | None = None):
        items = store.list_solutions(skeleton)
        if cursor:
            after = _decode_cursor(cursor)
            items = [item for item in items if item["id"] > after]
        page = items[:page_size]
        next_cursor = _encode_cursor(page[-1]["id"]) if len(items) > page_size else None
        return {"items": page, "next_cursor": next_cursor}

    @app.get("/api/solutions/top")
    def top_rated(skeleton: str | None = None, k: int = 10):
        if k < 1:
            raise ApiError(400, "bad_request", "k must be >= 1")
        records = store.top_rated(skeleton, k)
        return {"items": [record_to_dict(r, include_trace=False) for r in records]}

    @app.get("/api/solutions/{solution_id}")
    def get_solution(solution_id: str):
        try:
            record = store.get_solution(solution_id)
        except NotFoundError as exc:
            raise ApiError(404, "not_found", str(exc)) from None
        return record_to_dict(record, include_trace=False)

    @app.get("/api/solutions/{solution_id}/trace")
    def get_trace(solution_id: str):
        try:
            payload = store.trace_bytes(solution_id)
        except NotFoundError as exc:
            raise ApiError(404, "not_found", str(exc)) from None
        return Response(content=payload, media_type="application/json")

    @app.post("/api/solutions", status_code=201)
    async def create_solution(request: Request):
        doc = _json_body(await request.body())
        try:
            record = record_from_dict(doc)
        except SchemaVersionError as exc:
            raise ApiError(400, "schema_version", str(exc)) from None
        except ValidationError as exc:
            raise ApiError(400, "invalid_record", str(exc)) from None
        record.ratings = []  # votes arrive only through the ratings endpoint
        try:
            store.put_solution(record)
        except DuplicateIdError as exc:
            raise ApiError(409, "duplicate_id", str(exc)) from None
        except ValidationError as exc:
            raise ApiError(400, "invalid_record", str(exc)) from None
        return {"id": record.id}

    @app.post("/api/solutions/{solution_id}/ratings")
    async def submit_rating(solution_id: str, request: Request):
        doc = _json_body(await request.body())
        if "value" not in doc or "rater_token" not in doc:
            raise ApiError(400, "bad_request", "body needs 'value' and 'rater_token'")
        value = doc["value"]
        token = doc["rater_token"]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ApiError(400, "bad_request", "'value' must be a number")
        if not isinstance(token, str) or not token:
            raise ApiError(400, "bad_request", "'rater_token' must be a non-empty string")
        if not 0.0 <= float(value) <= 1.0:
            raise ApiError(422, "rating_out_of_range", f"value {value} outside [0, 1]")
        try:
            score = store.submit_rating(solution_id, Rating(float(value), token))
        except NotFoundError as exc:
            raise ApiError(404, "not_found", str(exc)) from None
        return score.to_dict()

    return app


def serve(store_path: str, host: str = "127.0.0.1", port: int = 8000,
          threshold: float = DEFAULT_THRESHOLD, page_size: int = DEFAULT_PAGE_SIZE) -> None:
    """Run the gallery service until interrupted."""
    store = SolutionStore(store_path, threshold=threshold)
    app = create_app(store, page_size=page_size)
    log.info("serving gallery at http://%s:%d (store: %s)", host, port, store_path)
    uvicorn.run(app, host=host, port=port, log_level="info")
