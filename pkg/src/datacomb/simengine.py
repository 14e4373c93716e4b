"""Sparse incidence indexes and co-usage cosine similarity.

For each entity (dataset, topic tag, or referenced journal) the index holds
the sorted set of article positions that use it — a binary usage vector
stored sparsely in CSR form.  The similarity between two entities is the
cosine of their usage vectors:

    sim(a, b) = |articles(a) ∩ articles(b)| / sqrt(|articles(a)| * |articles(b)|)

which for binary vectors reduces to an intersection count over the sorted
column lists.  Intersection counts are memoized per canonical pair because
the co-usage graph is extremely sparse and the same pairs recur across
papers sharing entities.

An entity used by no article has an undefined cosine; it is defined as 0
against everything (including itself) and a warning is emitted, so scoring
stays total while data problems remain visible.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .corpus import Corpus, content_hash
from .errors import UnknownEntityError

INDEX_CACHE_VERSION = 1


class Mode(enum.Enum):
    """Which entity's usage vectors the index is built over."""

    DATASET = "dataset"
    TOPIC = "topic"
    JOURNAL = "journal"


@dataclass
class IncidenceIndex:
    """Immutable sparse binary entity-by-article incidence matrix.

    Column ``k`` (``indices[indptr[k]:indptr[k+1]]``) lists, strictly sorted
    and duplicate-free, the positions of the articles using entity
    ``entity_ids[k]``.
    """

    mode: Mode
    entity_ids: tuple[str, ...]
    article_ids: tuple[str, ...]
    indptr: np.ndarray
    indices: np.ndarray

    _entity_pos: dict[str, int] = field(default_factory=dict, repr=False)
    _article_pos: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._entity_pos = {eid: i for i, eid in enumerate(self.entity_ids)}
        self._article_pos = {aid: i for i, aid in enumerate(self.article_ids)}

    @property
    def article_count(self) -> int:
        return len(self.article_ids)

    @property
    def entity_count(self) -> int:
        return len(self.entity_ids)

    def position(self, entity_id: str) -> int:
        try:
            return self._entity_pos[entity_id]
        except KeyError:
            raise UnknownEntityError(
                f"unknown {self.mode.value} entity {entity_id!r}"
            ) from None

    def article_position(self, article_id: str) -> int:
        return self._article_pos[article_id]

    def column(self, pos: int) -> np.ndarray:
        return self.indices[self.indptr[pos] : self.indptr[pos + 1]]

    def column_size(self, pos: int) -> int:
        return int(self.indptr[pos + 1] - self.indptr[pos])


def build_incidence(corpus: Corpus, mode: Mode) -> IncidenceIndex:
    """Build the incidence index for one mode; deterministic given the corpus.

    Entity universes: all corpus datasets (Dataset mode — unused ones get
    empty columns), the union of topic tags carried by any dataset (Topic
    mode), and the union of journals referenced by any paper (Journal mode).
    """
    article_ids = tuple(p.id for p in corpus.papers)

    if mode is Mode.DATASET:
        entity_ids = tuple(sorted(corpus.datasets))
    elif mode is Mode.TOPIC:
        topics: set[str] = set()
        for ds in corpus.datasets.values():
            topics.update(ds.topics)
        entity_ids = tuple(sorted(topics))
    elif mode is Mode.JOURNAL:
        journals: set[str] = set()
        for p in corpus.papers:
            journals.update(p.referenced_journal_counts)
        entity_ids = tuple(sorted(journals))
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown mode {mode!r}")

    pos = {eid: i for i, eid in enumerate(entity_ids)}
    ent_parts: list[int] = []
    art_parts: list[int] = []
    for j, paper in enumerate(corpus.papers):
        if mode is Mode.DATASET:
            members = paper.dataset_ids
        elif mode is Mode.TOPIC:
            members = corpus.topic_union(paper)
        else:
            members = paper.referenced_journal_counts.keys()
        for eid in members:
            ent_parts.append(pos[eid])
            art_parts.append(j)

    n_entities = len(entity_ids)
    if ent_parts:
        ent = np.asarray(ent_parts, dtype=np.int64)
        art = np.asarray(art_parts, dtype=np.int64)
        order = np.lexsort((art, ent))
        ent = ent[order]
        art = art[order]
        counts = np.bincount(ent, minlength=n_entities)
        indptr = np.zeros(n_entities + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = art
    else:
        indptr = np.zeros(n_entities + 1, dtype=np.int64)
        indices = np.empty(0, dtype=np.int64)

    return IncidenceIndex(
        mode=mode,
        entity_ids=entity_ids,
        article_ids=article_ids,
        indptr=indptr,
        indices=indices,
    )


class SimilarityProvider:
    """Memoized cosine similarities over one incidence index.

    ``leave_one_out`` removes a focal article from both usage vectors before
    computing the cosine (sensitivity analysis); the memo always stores the
    unadjusted intersection counts, so toggling costs only two binary
    searches per column.
    """

    def __init__(self, index: IncidenceIndex, kernel=None):
        self.index = index
        self.kernel = kernel if kernel is not None else _kernels.active
        self._memo: dict[tuple[int, int], int] = {}
        self._warned: set[int] = set()

    def _warn_empty(self, pos: int) -> None:
        if pos not in self._warned:
            self._warned.add(pos)
            warnings.warn(
                f"{self.index.mode.value} entity {self.index.entity_ids[pos]!r} is used by "
                "no article; its similarity is defined as 0",
                stacklevel=3,
            )

    def intersection(self, pos_a: int, pos_b: int) -> int:
        """Memoized intersection count of two columns (canonical pair key)."""
        if pos_a == pos_b:
            return self.index.column_size(pos_a)
        key = (pos_a, pos_b) if pos_a < pos_b else (pos_b, pos_a)
        hit = self._memo.get(key)
        if hit is None:
            hit = int(self.kernel.intersect_size(self.index.column(pos_a), self.index.column(pos_b)))
            self._memo[key] = hit
        return hit

    def prefetch(self, pairs: list[tuple[int, int]]) -> None:
        """Batch-compute intersection counts for canonical position pairs."""
        missing = [p for p in pairs if p[0] != p[1] and p not in self._memo]
        if not missing:
            return
        left = np.fromiter((p[0] for p in missing), dtype=np.int64, count=len(missing))
        right = np.fromiter((p[1] for p in missing), dtype=np.int64, count=len(missing))
        sizes = self.kernel.intersect_size_many(self.index.indptr, self.index.indices, left, right)
        for p, s in zip(missing, sizes):
            self._memo[p] = int(s)

    def cosine_at(self, pos_a: int, pos_b: int, exclude_article: int | None = None) -> float:
        """Cosine similarity of two columns given by position."""
        na = self.index.column_size(pos_a)
        nb = self.index.column_size(pos_b)
        if na == 0:
            self._warn_empty(pos_a)
        if nb == 0:
            self._warn_empty(pos_b)
        if exclude_article is None:
            if na == 0 or nb == 0:
                return 0.0
            if pos_a == pos_b:
                return 1.0
            inter = self.intersection(pos_a, pos_b)
            return inter / math.sqrt(na * nb)
        # leave-one-out adjustment: drop the focal article from both columns
        in_a = _contains(self.index.column(pos_a), exclude_article)
        in_b = _contains(self.index.column(pos_b), exclude_article)
        na -= in_a
        nb -= in_b
        if na <= 0 or nb <= 0:
            return 0.0
        if pos_a == pos_b:
            return 1.0
        inter = self.intersection(pos_a, pos_b) - (in_a and in_b)
        return inter / math.sqrt(na * nb)

    def cosine(self, a: str, b: str, exclude_article: int | None = None) -> float:
        """Cosine similarity between two entities by id; in [0, 1], symmetric."""
        return self.cosine_at(self.index.position(a), self.index.position(b), exclude_article)

    def pairwise(self, ids: list[str]) -> np.ndarray:
        """Dense symmetric similarity block over distinct entity ids."""
        if len(set(ids)) != len(ids):
            raise ValueError("entity ids must be distinct")
        pos = [self.index.position(e) for e in ids]
        self.prefetch(
            [(min(a, b), max(a, b)) for i, a in enumerate(pos) for b in pos[i + 1 :]]
        )
        n = len(pos)
        block = np.empty((n, n), dtype=np.float64)
        for i in range(n):
            block[i, i] = self.cosine_at(pos[i], pos[i])
            for j in range(i + 1, n):
                s = self.cosine_at(pos[i], pos[j])
                block[i, j] = s
                block[j, i] = s
        return block


def _contains(column: np.ndarray, article: int) -> bool:
    k = int(np.searchsorted(column, article))
    return k < column.size and int(column[k]) == article


# --------------------------------------------------------------------------
# optional on-disk index cache
# --------------------------------------------------------------------------


def save_index(index: IncidenceIndex, path: str | Path, corpus_hash: str | None = None) -> None:
    """Persist an index; the header records a format version and corpus hash."""
    header = {
        "format_version": INDEX_CACHE_VERSION,
        "mode": index.mode.value,
        "corpus_hash": corpus_hash,
    }
    np.savez(
        path,
        header=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8),
        entity_ids=np.asarray(index.entity_ids, dtype=np.str_),
        article_ids=np.asarray(index.article_ids, dtype=np.str_),
        indptr=index.indptr,
        indices=index.indices,
    )


def load_index(path: str | Path, expected_hash: str | None = None) -> IncidenceIndex:
    """Load a cached index, checking format version and (optionally) corpus hash."""
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header.get("format_version") != INDEX_CACHE_VERSION:
            raise ValueError(f"unsupported index cache version {header.get('format_version')!r}")
        if expected_hash is not None and header.get("corpus_hash") != expected_hash:
            raise ValueError("index cache does not match the corpus content hash")
        return IncidenceIndex(
            mode=Mode(header["mode"]),
            entity_ids=tuple(str(e) for e in data["entity_ids"]),
            article_ids=tuple(str(a) for a in data["article_ids"]),
            indptr=data["indptr"].astype(np.int64),
            indices=data["indices"].astype(np.int64),
        )


def cached_incidence(corpus: Corpus, mode: Mode, cache_dir: str | Path | None) -> IncidenceIndex:
    """Build an index, round-tripping through the cache directory when given."""
    if cache_dir is None:
        return build_incidence(corpus, mode)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    chash = content_hash(corpus)
    path = cache_dir / f"incidence_{mode.value}_{chash[:16]}.npz"
    if path.is_file():
        try:
            return load_index(path, expected_hash=chash)
        except ValueError:
            path.unlink()
    index = build_incidence(corpus, mode)
    save_index(index, path, corpus_hash=chash)
    return index
