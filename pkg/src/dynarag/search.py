"""Deterministic mock retrieval backends: web-text search and image-KG search.

Both indexes are immutable after ingest and score by exact cosine similarity
over the full corpus (desk scale; the brute-force scan is the implementation,
not an approximation). Ties break by url ascending so results are totally
ordered. The web index can interleave corpus items flagged as hard negatives
at a configurable rate to mimic retrieval noise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .encoders import HashedTextEncoder
from .errors import DimensionMismatch, IndexNotBuilt, ParseError

WEB_RESULT_CAP = 50  # the web API returns at most 50 pages per query


class Source(str, Enum):
    IMAGE_KG = "image_kg"
    WEB = "web"


@dataclass(frozen=True)
class WebDoc:
    url: str
    title: str
    snippet: str
    html: str = ""
    timestamp: str = ""
    is_hard_negative: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "WebDoc":
        doc = cls(
            url=raw["url"],
            title=raw.get("title", ""),
            snippet=raw["snippet"],
            html=raw.get("html", ""),
            timestamp=raw.get("timestamp", ""),
            is_hard_negative=bool(raw.get("is_hard_negative", False)),
        )
        if not doc.snippet:
            raise ValueError("snippet must be non-empty")
        return doc

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "title": self.title,
            "snippet": self.snippet,
            "html": self.html,
            "timestamp": self.timestamp,
            "is_hard_negative": self.is_hard_negative,
        }


@dataclass(frozen=True)
class KgEntry:
    entity_name: str
    url: str
    image_embedding: np.ndarray
    attributes: dict[str, str]  # insertion-ordered, lowercase keys

    @classmethod
    def from_dict(cls, raw: dict) -> "KgEntry":
        embedding = np.asarray(raw["image_embedding"], dtype=np.float64)
        norm = float(np.linalg.norm(embedding))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"embedding norm {norm} is not 1 within 1e-9")
        attributes = {str(k).lower(): str(v) for k, v in raw.get("attributes", {}).items()}
        return cls(
            entity_name=raw["entity_name"],
            url=raw["url"],
            image_embedding=embedding,
            attributes=attributes,
        )

    def to_dict(self) -> dict:
        return {
            "entity_name": self.entity_name,
            "url": self.url,
            "image_embedding": [float(x) for x in self.image_embedding],
            "attributes": dict(self.attributes),
        }


@dataclass(frozen=True)
class SearchHit:
    source: Source
    score: float
    payload: WebDoc | KgEntry

    @property
    def url(self) -> str:
        return self.payload.url


def _read_jsonl(path: str | Path, parse) -> list:
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                items.append(parse(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return items


def _rank(matrix: np.ndarray, urls: list[str], query: np.ndarray) -> list[tuple[int, float]]:
    """All indexes scored against the query, sorted by (-score, url)."""
    scores = matrix @ query
    order = sorted(range(len(urls)), key=lambda i: (-scores[i], urls[i]))
    return [(i, float(scores[i])) for i in order]


class WebSearchIndex:
    """Cosine top-k over web docs embedded from title + snippet."""

    def __init__(self, encoder: HashedTextEncoder | None = None,
                 hard_negative_rate: float = 0.0):
        self.encoder = encoder or HashedTextEncoder()
        self.hard_negative_rate = hard_negative_rate
        self._docs: list[WebDoc] | None = None
        self._positives: list[int] = []
        self._negatives: list[int] = []
        self._matrix: np.ndarray | None = None

    @classmethod
    def ingest(cls, corpus_path: str | Path, encoder: HashedTextEncoder | None = None,
               hard_negative_rate: float = 0.0) -> "WebSearchIndex":
        index = cls(encoder, hard_negative_rate)
        index.build(_read_jsonl(corpus_path, WebDoc.from_dict))
        return index

    def build(self, docs: list[WebDoc]) -> "WebSearchIndex":
        seen: set[str] = set()
        for doc in docs:
            if doc.url in seen:
                raise ValueError(f"duplicate url in corpus: {doc.url}")
            seen.add(doc.url)
        self._docs = list(docs)
        self._positives = [i for i, d in enumerate(docs) if not d.is_hard_negative]
        self._negatives = [i for i, d in enumerate(docs) if d.is_hard_negative]
        vectors = [self.encoder.encode(f"{d.title} {d.snippet}") for d in docs]
        self._matrix = (
            np.vstack(vectors) if vectors else np.zeros((0, self.encoder.dim))
        )
        return self

    def __len__(self) -> int:
        return len(self._docs) if self._docs is not None else 0

    def search(self, query: str, k: int) -> list[SearchHit]:
        if self._docs is None:
            raise IndexNotBuilt("ingest a corpus before searching")
        if k < 0:
            raise ValueError("k must be non-negative")
        k = min(k, WEB_RESULT_CAP)
        if k == 0 or not self._docs:
            return []
        qvec = self.encoder.encode(query)

        def ranked(indices: list[int]) -> list[tuple[int, float]]:
            sub = self._matrix[indices]
            scores = sub @ qvec
            order = sorted(
                range(len(indices)),
                key=lambda j: (-scores[j], self._docs[indices[j]].url),
            )
            return [(indices[j], float(scores[j])) for j in order]

        positives = ranked(self._positives)
        negatives = ranked(self._negatives) if self.hard_negative_rate > 0 else []
        merged = _interleave(positives, negatives, self.hard_negative_rate)
        return [
            SearchHit(Source.WEB, score, self._docs[i]) for i, score in merged[:k]
        ]


def _interleave(positives: list, negatives: list, rate: float) -> list:
    """Inject one negative after every 1/rate positives (credit accumulator)."""
    if rate <= 0 or not negatives:
        return list(positives)
    out = []
    pool = iter(negatives)
    credit = 0.0
    for item in positives:
        out.append(item)
        credit += rate
        while credit >= 1.0:
            credit -= 1.0
            nxt = next(pool, None)
            if nxt is None:
                return out
            out.append(nxt)
    return out


class ImageKgIndex:
    """Cosine top-k over knowledge-graph entries keyed by image embedding."""

    def __init__(self):
        self._entries: list[KgEntry] | None = None
        self._matrix: np.ndarray | None = None

    @classmethod
    def ingest(cls, corpus_path: str | Path) -> "ImageKgIndex":
        index = cls()
        index.build(_read_jsonl(corpus_path, KgEntry.from_dict))
        return index

    def build(self, entries: list[KgEntry]) -> "ImageKgIndex":
        self._entries = list(entries)
        vectors = [e.image_embedding for e in entries]
        dim = vectors[0].shape[0] if vectors else 0
        self._matrix = np.vstack(vectors) if vectors else np.zeros((0, dim))
        return self

    def __len__(self) -> int:
        return len(self._entries) if self._entries is not None else 0

    @property
    def dim(self) -> int | None:
        if self._matrix is None or self._matrix.shape[0] == 0:
            return None
        return self._matrix.shape[1]

    def search(self, image_embedding: np.ndarray, k: int) -> list[SearchHit]:
        if self._entries is None:
            raise IndexNotBuilt("ingest a corpus before searching")
        if k < 0:
            raise ValueError("k must be non-negative")
        if k == 0 or not self._entries:
            return []
        query = np.asarray(image_embedding, dtype=np.float64)
        if query.shape[0] != self._matrix.shape[1]:
            raise DimensionMismatch(
                f"query dim {query.shape[0]} != index dim {self._matrix.shape[1]}"
            )
        ranked = _rank(self._matrix, [e.url for e in self._entries], query)
        return [
            SearchHit(Source.IMAGE_KG, score, self._entries[i])
            for i, score in ranked[:k]
        ]


@dataclass
class ImageRecord:
    """Fixture entry for one image: whole embedding plus annotated regions."""

    image_id: str
    whole_embedding: np.ndarray
    regions: list[dict] = field(default_factory=list)
    width: int = 640
    height: int = 480

    @classmethod
    def from_dict(cls, raw: dict) -> "ImageRecord":
        return cls(
            image_id=raw["image_id"],
            whole_embedding=np.asarray(raw["whole_embedding"], dtype=np.float64),
            regions=[
                {
                    "label": r["label"],
                    "bbox": tuple(r["bbox"]),
                    "embedding": np.asarray(r["embedding"], dtype=np.float64),
                    "confidence": float(r.get("confidence", 1.0)),
                }
                for r in raw.get("regions", [])
            ],
            width=int(raw.get("width", 640)),
            height=int(raw.get("height", 480)),
        )

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "whole_embedding": [float(x) for x in self.whole_embedding],
            "regions": [
                {
                    "label": r["label"],
                    "bbox": list(r["bbox"]),
                    "embedding": [float(x) for x in r["embedding"]],
                    "confidence": r.get("confidence", 1.0),
                }
                for r in self.regions
            ],
            "width": self.width,
            "height": self.height,
        }


class ImageStore:
    """In-memory lookup of image fixtures by image_id."""

    def __init__(self, records: list[ImageRecord] | None = None):
        self._records = {r.image_id: r for r in (records or [])}

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ImageStore":
        return cls(_read_jsonl(path, ImageRecord.from_dict))

    def get(self, image_id: str) -> ImageRecord | None:
        return self._records.get(image_id)

    def embedding(self, image_id: str) -> np.ndarray | None:
        record = self._records.get(image_id)
        return record.whole_embedding if record is not None else None

    def __len__(self) -> int:
        return len(self._records)


def unit_embedding_for(text: str, dim: int = 256) -> np.ndarray:
    """Convenience for fixtures: deterministic unit vector from a seed string."""
    return HashedTextEncoder(dim).encode(text)
