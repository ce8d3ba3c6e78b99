"""Solution store and crowd-opinion math.

Layout: one directory per solution under <root>/solutions/<id>/ holding
record.json (metadata + genome), trace.json, and ratings.log, an append-only
JSON-lines file. <root>/index.json lists known ids but the directories are
authoritative: on open the store rescans them and replays every ratings log,
so a crash after an acknowledged write never loses it. Writes land via
fsync + atomic rename.

A rater is an opaque token; resubmitting with the same token replaces the
previous value (the log keeps the full audit trail, the latest entry per
token wins). The crowd score is the plain mean of current values; a solution
classifies as good when count > 0 and mean >= threshold (default 0.5).
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .controller import Genome, genome_from_dict, genome_to_dict
from .errors import DuplicateIdError, NotFoundError, SchemaVersionError, ValidationError
from .sim.trace import AnimationTrace, trace_from_dict, trace_to_dict, trace_to_json

RECORD_SCHEMA_VERSION = 1
INDEX_SCHEMA_VERSION = 1
DEFAULT_THRESHOLD = 0.5

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


@dataclass(frozen=True)
class Rating:
    value: float
    rater_token: str
    submitted_at: str = ""

    def validate(self) -> None:
        if not isinstance(self.value, (int, float)) or not 0.0 <= float(self.value) <= 1.0:
            raise ValidationError(f"rating value must be in [0, 1], got {self.value!r}")
        if not self.rater_token or not isinstance(self.rater_token, str):
            raise ValidationError("rater_token must be a non-empty string")


@dataclass(frozen=True)
class CrowdScore:
    mean: float
    count: int
    label: str  # good | poor | unrated

    def to_dict(self) -> dict:
        return {"mean": self.mean, "count": self.count, "class": self.label}


@dataclass
class SolutionRecord:
    id: str
    created_at: str
    skeleton_name: str
    optimizer: dict
    mechanistic_fitness: float
    genome: Genome
    trace: AnimationTrace
    ratings: list[Rating] = field(default_factory=list)

    def validate(self) -> None:
        if not isinstance(self.id, str) or not _ID_PATTERN.match(self.id):
            raise ValidationError(
                "id must be 1-64 characters of [A-Za-z0-9_-], got "
                f"{self.id!r}"
            )
        if not self.skeleton_name:
            raise ValidationError("skeleton_name must be non-empty")
        if not isinstance(self.optimizer, dict) or "name" not in self.optimizer:
            raise ValidationError("optimizer must be a dict with at least a 'name'")
        if not isinstance(self.mechanistic_fitness, (int, float)):
            raise ValidationError("mechanistic_fitness must be a number")
        if not self.trace.frames:
            raise ValidationError("trace has no frames")
        bodies = self.trace.body_count
        for k, frame in enumerate(self.trace.frames):
            if frame.shape != (bodies, 3):
                raise ValidationError(f"trace frame {k} does not match body count {bodies}")
        expected_inputs = 4 * bodies + 1
        if self.genome.topology[0] != expected_inputs:
            raise ValidationError(
                f"genome expects {self.genome.topology[0]} inputs but the trace's "
                f"skeleton implies {expected_inputs}"
            )
        if self.trace.skeleton_name != self.skeleton_name:
            raise ValidationError("trace skeleton_name does not match the record")


def record_to_dict(record: SolutionRecord, include_trace: bool = True) -> dict:
    doc = {
        "schema_version": RECORD_SCHEMA_VERSION,
        "id": record.id,
        "created_at": record.created_at,
        "skeleton_name": record.skeleton_name,
        "optimizer": record.optimizer,
        "mechanistic_fitness": record.mechanistic_fitness,
        "genome": genome_to_dict(record.genome),
        "ratings": [
            {"value": r.value, "rater_token": r.rater_token, "submitted_at": r.submitted_at}
            for r in record.ratings
        ],
    }
    if include_trace:
        doc["trace"] = trace_to_dict(record.trace)
    return doc


def record_from_dict(doc: dict, trace: AnimationTrace | None = None) -> SolutionRecord:
    if not isinstance(doc, dict):
        raise ValidationError("solution record must be an object")
    if doc.get("schema_version") != RECORD_SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unsupported record schema version {doc.get('schema_version')!r}"
        )
    try:
        if trace is None:
            trace = trace_from_dict(doc["trace"])
        record = SolutionRecord(
            id=doc["id"],
            created_at=doc["created_at"],
            skeleton_name=doc["skeleton_name"],
            optimizer=doc["optimizer"],
            mechanistic_fitness=float(doc["mechanistic_fitness"]),
            genome=genome_from_dict(doc["genome"]),
            trace=trace,
            ratings=[Rating(float(r["value"]), str(r["rater_token"]),
                            str(r.get("submitted_at", ""))) for r in doc.get("ratings", [])],
        )
    except KeyError as exc:
        raise ValidationError(f"solution record missing field {exc}") from exc
    record.validate()
    return record


def _fsync_dir(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    _fsync_dir(path.parent)


class SolutionStore:
    """Durable gallery of solutions with append-only ratings.

    Reads are lock-free once loaded; rating writes serialize through one
    lock per solution, so concurrent votes on different solutions never
    contend.
    """

    def __init__(self, root: str | Path, threshold: float = DEFAULT_THRESHOLD):
        if not 0.0 <= threshold <= 1.0:
            raise ValidationError("threshold must be in [0, 1]")
        self.root = Path(root)
        self.threshold = threshold
        self.solutions_dir = self.root / "solutions"
        self.solutions_dir.mkdir(parents=True, exist_ok=True)
        self._meta: dict[str, dict] = {}
        self._ratings: dict[str, dict[str, Rating]] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._store_lock = threading.Lock()
        self._load()

    # -- loading ---------------------------------------------------------

    def _load(self) -> None:
        for entry in sorted(self.solutions_dir.iterdir()) if self.solutions_dir.exists() else []:
            record_path = entry / "record.json"
            if not entry.is_dir() or not record_path.exists():
                continue  # unacknowledged leftovers from a crash mid-put
            try:
                doc = json.loads(record_path.read_text())
            except json.JSONDecodeError:
                continue
            if doc.get("schema_version") != RECORD_SCHEMA_VERSION:
                raise SchemaVersionError(
                    f"{record_path}: unsupported schema version {doc.get('schema_version')!r}"
                )
            sid = doc["id"]
            self._meta[sid] = {
                "skeleton_name": doc["skeleton_name"],
                "mechanistic_fitness": float(doc["mechanistic_fitness"]),
                "created_at": doc["created_at"],
            }
            self._ratings[sid] = self._replay_log(entry / "ratings.log")
            self._locks[sid] = threading.Lock()
        self._write_index()

    @staticmethod
    def _replay_log(path: Path) -> dict[str, Rating]:
        latest: dict[str, Rating] = {}
        if not path.exists():
            return latest
        for line in path.read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                rating = Rating(float(doc["value"]), str(doc["rater_token"]),
                                str(doc.get("submitted_at", "")))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                continue  # torn tail write; everything acknowledged is intact
            latest[rating.rater_token] = rating
        return latest

    def _write_index(self) -> None:
        doc = {"schema_version": INDEX_SCHEMA_VERSION, "ids": sorted(self._meta)}
        _atomic_write(self.root / "index.json", json.dumps(doc, sort_keys=True) + "\n")

    # -- paths -----------------------------------------------------------

    def _dir(self, solution_id: str) -> Path:
        return self.solutions_dir / solution_id

    def trace_path(self, solution_id: str) -> Path:
        self._require(solution_id)
        return self._dir(solution_id) / "trace.json"

    def trace_bytes(self, solution_id: str) -> bytes:
        return self.trace_path(solution_id).read_bytes()

    # -- operations ------------------------------------------------------

    def solution_ids(self) -> list[str]:
        return sorted(self._meta)

    def _require(self, solution_id: str) -> None:
        if solution_id not in self._meta:
            raise NotFoundError(f"unknown solution id {solution_id!r}")

    def put_solution(self, record: SolutionRecord) -> str:
        record.validate()
        with self._store_lock:
            if record.id in self._meta:
                raise DuplicateIdError(f"solution {record.id!r} already exists")
            directory = self._dir(record.id)
            directory.mkdir(parents=True, exist_ok=True)
            _atomic_write(directory / "trace.json", trace_to_json(record.trace) + "\n")
            _atomic_write(
                directory / "record.json",
                json.dumps(record_to_dict(record, include_trace=False),
                           sort_keys=True, separators=(",", ":")) + "\n",
            )
            self._meta[record.id] = {
                "skeleton_name": record.skeleton_name,
                "mechanistic_fitness": float(record.mechanistic_fitness),
                "created_at": record.created_at,
            }
            self._ratings[record.id] = {}
            self._locks[record.id] = threading.Lock()
            self._write_index()
        return record.id

    def get_solution(self, solution_id: str) -> SolutionRecord:
        self._require(solution_id)
        directory = self._dir(solution_id)
        doc = json.loads((directory / "record.json").read_text())
        trace = trace_from_dict(json.loads((directory / "trace.json").read_text()))
        record = record_from_dict(doc, trace=trace)
        current = self._ratings[solution_id]
        record.ratings = [current[token] for token in sorted(current)]
        return record

    def submit_rating(self, solution_id: str, rating: Rating) -> CrowdScore:
        self._require(solution_id)
        rating.validate()
        if not rating.submitted_at:
            rating = Rating(rating.value, rating.rater_token, utc_now())
        with self._locks[solution_id]:
            line = json.dumps(
                {"value": rating.value, "rater_token": rating.rater_token,
                 "submitted_at": rating.submitted_at},
                sort_keys=True,
            )
            with open(self._dir(solution_id) / "ratings.log", "a") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._ratings[solution_id][rating.rater_token] = rating
        return self.score(solution_id)

    def score(self, solution_id: str) -> CrowdScore:
        self._require(solution_id)
        current = self._ratings[solution_id]
        count = len(current)
        if count == 0:
            return CrowdScore(mean=0.0, count=0, label="unrated")
        mean = sum(r.value for r in current.values()) / count
        label = "good" if mean >= self.threshold else "poor"
        return CrowdScore(mean=mean, count=count, label=label)

    def top_rated(self, skeleton_name: str | None = None, k: int = 10) -> list[SolutionRecord]:
        """Up to k good-rated solutions, best first; the evolve seeds."""
        if k < 1:
            raise ValidationError("k must be >= 1")
        scored = []
        for sid, meta in self._meta.items():
            if skeleton_name is not None and meta["skeleton_name"] != skeleton_name:
                continue
            score = self.score(sid)
            if score.label != "good":
                continue
            scored.append((-score.mean, -score.count, -meta["mechanistic_fitness"], sid))
        scored.sort()
        return [self.get_solution(sid) for *_rank, sid in scored[:k]]

    def list_solutions(self, skeleton_name: str | None = None) -> list[dict]:
        """Summaries ordered by id; the service paginates over this."""
        out = []
        for sid in self.solution_ids():
            meta = self._meta[sid]
            if skeleton_name is not None and meta["skeleton_name"] != skeleton_name:
                continue
            score = self.score(sid)
            out.append({
                "id": sid,
                "skeleton": meta["skeleton_name"],
                "created_at": meta["created_at"],
                "mechanistic_fitness": meta["mechanistic_fitness"],
                **score.to_dict(),
            })
        return out
