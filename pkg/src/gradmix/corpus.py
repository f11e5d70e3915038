"""Embedded example corpora: on-disk format, loading, and eval proportions.

A corpus lives in two files. The manifest is line-oriented JSON: the first
line is a header ``{"d_emb": ..., "count": ..., "blob": ...}`` and each
following line is one example record ``{"id", "domain_label", "split",
"token_count", "row", "text"?}``. The blob named by the header holds
``count`` embedding rows of ``d_emb`` little-endian float32 values each
(row-major, no header); a record's ``row`` indexes into it. Storage is
float32, all in-memory arithmetic is float64.
"""

from __future__ import annotations

import concurrent.futures
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from gradmix import _kernels

SPLITS = ("train", "eval")
MANIFEST_VERSION = 1


class CorpusError(Exception):
    """A corpus file is missing, malformed, or violates an invariant."""


class EmbeddingServiceError(Exception):
    """The embedding service failed or returned an unusable response."""


@dataclass(frozen=True, eq=False)
class Example:
    id: str
    embedding: np.ndarray  # float64, shape (d_emb,)
    domain_label: str
    split: str
    token_count: int
    text: str | None = None


@dataclass(frozen=True, eq=False)
class Corpus:
    """Immutable collection of examples with a fixed embedding dimension.

    ``domain_vocabulary`` lists the distinct domain labels in order of first
    appearance; it doubles as the class vocabulary for supervised training.
    """

    examples: tuple[Example, ...]
    d_emb: int
    domain_vocabulary: tuple[str, ...]

    @classmethod
    def from_examples(cls, examples) -> "Corpus":
        examples = tuple(examples)
        if not examples:
            raise CorpusError("corpus has no examples")
        d_emb = examples[0].embedding.shape[0]
        seen_labels: set[str] = set()
        vocab: list[str] = []
        splits = {s: 0 for s in SPLITS}
        for ex in examples:
            if ex.split not in SPLITS:
                raise CorpusError(f"example {ex.id!r}: unknown split {ex.split!r}")
            splits[ex.split] += 1
            if ex.token_count < 1:
                raise CorpusError(f"example {ex.id!r}: token_count must be >= 1")
            if ex.embedding.ndim != 1 or ex.embedding.shape[0] != d_emb:
                raise CorpusError(f"example {ex.id!r}: embedding dimension mismatch")
            if not np.all(np.isfinite(ex.embedding)):
                raise CorpusError(f"example {ex.id!r}: non-finite embedding")
            if ex.domain_label not in seen_labels:
                seen_labels.add(ex.domain_label)
                vocab.append(ex.domain_label)
        ids = [ex.id for ex in examples]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise CorpusError(f"duplicate example ids: {dup[:5]}")
        if splits["train"] == 0 or splits["eval"] == 0:
            raise CorpusError("corpus needs at least one train and one eval example")
        return cls(examples=examples, d_emb=int(d_emb), domain_vocabulary=tuple(vocab))

    def split_examples(self, split: str) -> list[Example]:
        return [ex for ex in self.examples if ex.split == split]

    @property
    def train_examples(self) -> list[Example]:
        return self.split_examples("train")

    @property
    def eval_examples(self) -> list[Example]:
        return self.split_examples("eval")

    def embedding_matrix(self, split: str | None = None) -> np.ndarray:
        exs = self.examples if split is None else self.split_examples(split)
        return np.ascontiguousarray([ex.embedding for ex in exs], dtype=np.float64)


def load_corpus(manifest_path) -> Corpus:
    """Load a corpus from its manifest, validating blob shape and contents."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise CorpusError(f"manifest not found: {manifest_path}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in (line.strip() for line in fh) if ln]
    if not lines:
        raise CorpusError(f"manifest is empty: {manifest_path}")
    try:
        header = json.loads(lines[0])
        records = [json.loads(ln) for ln in lines[1:]]
    except json.JSONDecodeError as e:
        raise CorpusError(f"manifest is not valid line-oriented JSON: {e}") from e
    for key in ("d_emb", "count", "blob"):
        if key not in header:
            raise CorpusError(f"manifest header missing {key!r}")
    d_emb, count = int(header["d_emb"]), int(header["count"])
    if d_emb < 1 or count < 1:
        raise CorpusError("manifest header: d_emb and count must be >= 1")
    if len(records) != count:
        raise CorpusError(
            f"manifest declares count={count} but has {len(records)} records"
        )

    blob_path = manifest_path.parent / str(header["blob"])
    if not blob_path.is_file():
        raise CorpusError(f"embedding blob not found: {blob_path}")
    raw = blob_path.read_bytes()
    expected = count * d_emb * 4
    if len(raw) != expected:
        raise CorpusError(
            f"blob {blob_path.name} is {len(raw)} bytes, expected {expected} "
            f"({count} rows x {d_emb} float32)"
        )
    rows = np.frombuffer(raw, dtype="<f4").reshape(count, d_emb).astype(np.float64)

    examples = []
    for rec in records:
        for key in ("id", "domain_label", "split", "token_count", "row"):
            if key not in rec:
                raise CorpusError(f"manifest record missing {key!r}: {rec}")
        row = int(rec["row"])
        if not 0 <= row < count:
            raise CorpusError(f"example {rec['id']!r}: row {row} out of range")
        emb = rows[row]
        if not np.all(np.isfinite(emb)):
            raise CorpusError(f"example {rec['id']!r}: non-finite embedding")
        examples.append(
            Example(
                id=str(rec["id"]),
                embedding=emb,
                domain_label=str(rec["domain_label"]),
                split=str(rec["split"]),
                token_count=int(rec["token_count"]),
                text=rec.get("text"),
            )
        )
    return Corpus.from_examples(examples)


def save_corpus(corpus: Corpus, manifest_path, blob_name: str | None = None) -> None:
    """Write manifest plus float32 blob; inverse of load_corpus."""
    manifest_path = Path(manifest_path)
    if blob_name is None:
        blob_name = manifest_path.stem + ".emb"
    emb = np.ascontiguousarray(corpus.embedding_matrix(), dtype="<f4")
    if not np.all(np.isfinite(emb)):
        raise CorpusError("embeddings do not fit float32 storage (non-finite)")
    header = {"d_emb": corpus.d_emb, "count": len(corpus.examples), "blob": blob_name}
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row, ex in enumerate(corpus.examples):
            rec = {
                "id": ex.id,
                "domain_label": ex.domain_label,
                "split": ex.split,
                "token_count": ex.token_count,
                "row": row,
            }
            if ex.text is not None:
                rec["text"] = ex.text
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    (manifest_path.parent / blob_name).write_bytes(emb.tobytes())


def eval_proportions(corpus: Corpus, partition, by_token: bool = False) -> np.ndarray:
    """Share of the eval split falling in each cluster.

    Eval examples not present in the partition's assignment are routed to
    their nearest centroid. Proportions count examples by default; with
    ``by_token`` each example contributes its token_count instead. Clusters
    without eval examples get weight 0.
    """
    evals = corpus.eval_examples
    if not evals:
        raise CorpusError("corpus has no eval examples")
    m = partition.k
    clusters = np.empty(len(evals), dtype=np.int64)
    missing = [i for i, ex in enumerate(evals) if ex.id not in partition.assignment]
    for i, ex in enumerate(evals):
        if ex.id in partition.assignment:
            clusters[i] = partition.assignment[ex.id]
    if missing:
        queries = np.ascontiguousarray(
            [evals[i].embedding for i in missing], dtype=np.float64
        )
        labels, _ = _kernels.assign_points(queries, partition.centroids)
        clusters[missing] = labels
    if clusters.max() >= m or clusters.min() < 0:
        raise CorpusError("partition assigns an eval example outside [0, k)")
    weights = (
        np.array([ex.token_count for ex in evals], dtype=np.float64)
        if by_token
        else np.ones(len(evals))
    )
    totals = np.bincount(clusters, weights=weights, minlength=m)
    return totals / totals.sum()


@dataclass(frozen=True)
class EmbeddingServiceConfig:
    """Connection settings for a remote embedding service."""

    endpoint_url: str
    model_name: str
    batch_size: int = 32
    timeout: float = 30.0
    auth_token: str | None = None
    parallelism: int = 1
    max_attempts: int = 3
    backoff_seconds: float = 1.0


def _post_batch(config: EmbeddingServiceConfig, batch: list[str]) -> list[list[float]]:
    headers = {}
    if config.auth_token:
        headers["Authorization"] = f"Bearer {config.auth_token}"
    payload = {"model": config.model_name, "input": batch}
    last_exc: Exception | None = None
    for attempt in range(config.max_attempts):
        if attempt > 0:
            time.sleep(config.backoff_seconds * 2 ** (attempt - 1))
        try:
            resp = requests.post(
                config.endpoint_url, json=payload, headers=headers,
                timeout=config.timeout,
            )
        except requests.RequestException as e:
            last_exc = e
            continue
        if resp.status_code >= 500:
            last_exc = EmbeddingServiceError(
                f"server error {resp.status_code} from {config.endpoint_url}"
            )
            continue
        if resp.status_code != 200:
            raise EmbeddingServiceError(
                f"request rejected with status {resp.status_code}"
            )
        try:
            body = resp.json()
            items = body["data"]
            ordered: list[list[float] | None] = [None] * len(batch)
            for item in items:
                ordered[int(item["index"])] = list(item["embedding"])
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise EmbeddingServiceError(f"malformed response: {e}") from e
        if any(v is None for v in ordered):
            raise EmbeddingServiceError(
                f"response covered {sum(v is not None for v in ordered)} of "
                f"{len(batch)} inputs"
            )
        return ordered  # type: ignore[return-value]
    raise EmbeddingServiceError(
        f"embedding request failed after {config.max_attempts} attempts: {last_exc}"
    )


def fetch_embeddings(config: EmbeddingServiceConfig, texts: list[str]) -> np.ndarray:
    """Embed texts via the service, preserving input order.

    Texts are sent in batches of ``config.batch_size``; batches may run
    concurrently up to ``config.parallelism`` but results are reassembled in
    input order. Responses are matched by per-request index. Returns a
    float64 array of shape (len(texts), d).
    """
    if not texts:
        raise ValueError("texts must be non-empty")
    batches = [
        list(texts[i : i + config.batch_size])
        for i in range(0, len(texts), config.batch_size)
    ]
    if config.parallelism > 1 and len(batches) > 1:
        with concurrent.futures.ThreadPoolExecutor(config.parallelism) as pool:
            results = list(pool.map(lambda b: _post_batch(config, b), batches))
    else:
        results = [_post_batch(config, b) for b in batches]
    vectors = [np.asarray(v, dtype=np.float64) for batch in results for v in batch]
    dims = {v.shape for v in vectors}
    if len(dims) != 1 or vectors[0].ndim != 1:
        raise EmbeddingServiceError(f"inconsistent embedding dimensions: {dims}")
    out = np.vstack(vectors)
    if not np.all(np.isfinite(out)):
        raise EmbeddingServiceError("service returned non-finite embedding values")
    return out
