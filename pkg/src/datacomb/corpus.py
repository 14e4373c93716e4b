"""Corpus data model and line-delimited ingestion.

A corpus is three JSONL files (one object per line):

``datasets.jsonl``
    ``{"id", "title", "topics": [..]}``
``papers.jsonl``
    ``{"id", "year", "datasets": [..], "journal", "ref_journals": {jid: count},
    "authors": [..], "author_mean_cites", "disciplines": {name: weight},
    "cites": {"y3": int|null, "y5": .., "y10": ..},
    "altmetric": {"twitter": .., "wikipedia": .., "policy": .., "news": ..}|null}``
``journals.jsonl``
    ``{"id", "impact": real}``

Lines may carry an optional ``"v"`` schema-version key (currently 1).
Absent outcome fields are explicit nulls, never zeros: a null citation count
means the window extends past the corpus horizon and the paper is excluded
from fits on that window.

Loading is single-threaded per file; the resulting :class:`Corpus` is
immutable by convention and safe to share across readers. Papers and
datasets are held in canonical (id-sorted) order so that permuting input
lines cannot affect any downstream metric.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusFormatError, ReferentialIntegrityError

SCHEMA_VERSION = 1

CITATION_WINDOWS = (3, 5, 10)
ALTMETRIC_SOURCES = ("twitter", "wikipedia", "policy", "news")

DATASET_FILE = "datasets.jsonl"
PAPER_FILE = "papers.jsonl"
JOURNAL_FILE = "journals.jsonl"


@dataclass(frozen=True)
class DatasetRecord:
    """One curated dataset with its expert-assigned topic tags."""

    id: str
    title: str
    topics: frozenset[str]


@dataclass(frozen=True)
class PaperRecord:
    """One publication with its dataset usage, references, and outcomes.

    ``citations`` maps window length in years (3/5/10) to a count, or None
    when the window extends past the corpus horizon.  ``altmetric_counts``
    is None for papers predating online-attention tracking.
    """

    id: str
    year: int
    dataset_ids: frozenset[str]
    journal_id: str | None
    referenced_journal_counts: dict[str, int]
    author_ids: tuple[str, ...]
    author_mean_citations: float | None
    discipline_weights: dict[str, float]
    citations: dict[int, int | None]
    altmetric_counts: dict[str, int] | None

    @property
    def n_datasets(self) -> int:
        return len(self.dataset_ids)

    @property
    def total_references(self) -> int:
        return sum(self.referenced_journal_counts.values())


@dataclass
class Corpus:
    """A loaded corpus with all cross-references resolved.

    ``datasets`` is keyed by dataset id in sorted order; ``papers`` is sorted
    by paper id.  ``journal_impact`` covers every venue appearing on a paper
    (the value may be 0.0).
    """

    datasets: dict[str, DatasetRecord]
    papers: list[PaperRecord]
    journal_impact: dict[str, float]

    _paper_pos: dict[str, int] = field(default_factory=dict, repr=False)
    _usage_counts: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.papers.sort(key=lambda p: p.id)
        self.datasets = dict(sorted(self.datasets.items()))
        self._paper_pos = {p.id: i for i, p in enumerate(self.papers)}
        counts = {did: 0 for did in self.datasets}
        for p in self.papers:
            for did in p.dataset_ids:
                if did in counts:
                    counts[did] += 1
        self._usage_counts = counts

    def paper_position(self, paper_id: str) -> int:
        return self._paper_pos[paper_id]

    def get_paper(self, paper_id: str) -> PaperRecord:
        return self.papers[self._paper_pos[paper_id]]

    def dataset_usage_count(self, dataset_id: str) -> int:
        """Number of papers in the corpus that use the given dataset."""
        return self._usage_counts[dataset_id]

    def topic_union(self, paper: PaperRecord) -> frozenset[str]:
        """Union of topic tags over the paper's datasets."""
        out: set[str] = set()
        for did in paper.dataset_ids:
            ds = self.datasets.get(did)
            if ds is not None:
                out.update(ds.topics)
        return frozenset(out)

    @property
    def n_multi_dataset_papers(self) -> int:
        return sum(1 for p in self.papers if p.n_datasets >= 2)


@dataclass
class ValidationReport:
    """Outcome of :func:`validate`: violations are data, not failures."""

    errors: list[tuple[str, str]]
    warnings: list[tuple[str, str]]
    summary: dict[str, int]

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "errors": [list(e) for e in self.errors],
            "warnings": [list(w) for w in self.warnings],
            "summary": dict(self.summary),
        }


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError(path, line_no, "record is not an object")
            v = obj.get("v", SCHEMA_VERSION)
            if v != SCHEMA_VERSION:
                raise CorpusFormatError(path, line_no, f"unsupported schema version {v!r}")
            yield line_no, obj


def _require(obj: dict, key: str, path: Path, line_no: int):
    if key not in obj:
        raise CorpusFormatError(path, line_no, f"missing required field {key!r}")
    return obj[key]


def _parse_dataset(obj: dict, path: Path, line_no: int) -> DatasetRecord:
    did = _require(obj, "id", path, line_no)
    topics = obj.get("topics") or []
    if not isinstance(topics, list):
        raise CorpusFormatError(path, line_no, "'topics' must be a list")
    return DatasetRecord(id=str(did), title=str(obj.get("title", "")), topics=frozenset(map(str, topics)))


def _parse_citations(obj: dict) -> dict[int, int | None]:
    raw = obj.get("cites") or {}
    out: dict[int, int | None] = {}
    for w in CITATION_WINDOWS:
        val = raw.get(f"y{w}")
        out[w] = None if val is None else int(val)
    return out


def _parse_paper(obj: dict, path: Path, line_no: int) -> PaperRecord:
    pid = _require(obj, "id", path, line_no)
    year = _require(obj, "year", path, line_no)
    datasets = _require(obj, "datasets", path, line_no)
    if not isinstance(datasets, list):
        raise CorpusFormatError(path, line_no, "'datasets' must be a list")
    ref_raw = obj.get("ref_journals") or {}
    try:
        refs = {str(j): int(c) for j, c in ref_raw.items()}
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(path, line_no, "'ref_journals' counts must be integers") from exc
    alt_raw = obj.get("altmetric")
    altmetric = None
    if alt_raw is not None:
        altmetric = {src: int(alt_raw.get(src, 0)) for src in ALTMETRIC_SOURCES}
    amc = obj.get("author_mean_cites")
    journal = obj.get("journal")
    return PaperRecord(
        id=str(pid),
        year=int(year),
        dataset_ids=frozenset(map(str, datasets)),
        journal_id=None if journal is None else str(journal),
        referenced_journal_counts=refs,
        author_ids=tuple(map(str, obj.get("authors") or [])),
        author_mean_citations=None if amc is None else float(amc),
        discipline_weights={str(k): float(v) for k, v in (obj.get("disciplines") or {}).items()},
        citations=_parse_citations(obj),
        altmetric_counts=altmetric,
    )


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


def load_corpus(corpus_dir: str | Path) -> Corpus:
    """Load and cross-link the three corpus files under ``corpus_dir``.

    Raises :class:`CorpusFormatError` (with file and line number) on
    malformed lines and :class:`ReferentialIntegrityError` when a paper
    references a dataset or venue that does not exist.
    """
    corpus_dir = Path(corpus_dir)
    ds_path = corpus_dir / DATASET_FILE
    paper_path = corpus_dir / PAPER_FILE
    journal_path = corpus_dir / JOURNAL_FILE
    for p in (ds_path, paper_path, journal_path):
        if not p.is_file():
            raise FileNotFoundError(f"corpus file not found: {p}")

    datasets: dict[str, DatasetRecord] = {}
    for line_no, obj in _iter_jsonl(ds_path):
        rec = _parse_dataset(obj, ds_path, line_no)
        if rec.id in datasets:
            raise CorpusFormatError(ds_path, line_no, f"duplicate dataset id {rec.id!r}")
        datasets[rec.id] = rec

    journal_impact: dict[str, float] = {}
    for line_no, obj in _iter_jsonl(journal_path):
        jid = str(_require(obj, "id", journal_path, line_no))
        if jid in journal_impact:
            raise CorpusFormatError(journal_path, line_no, f"duplicate journal id {jid!r}")
        journal_impact[jid] = float(obj.get("impact", 0.0))

    papers: list[PaperRecord] = []
    seen: set[str] = set()
    for line_no, obj in _iter_jsonl(paper_path):
        rec = _parse_paper(obj, paper_path, line_no)
        if rec.id in seen:
            raise CorpusFormatError(paper_path, line_no, f"duplicate paper id {rec.id!r}")
        seen.add(rec.id)
        for did in sorted(rec.dataset_ids):
            if did not in datasets:
                raise ReferentialIntegrityError(
                    f"paper {rec.id!r} references unknown dataset {did!r}"
                )
        if rec.journal_id is not None and rec.journal_id not in journal_impact:
            raise ReferentialIntegrityError(
                f"paper {rec.id!r} published in unknown journal {rec.journal_id!r}"
            )
        papers.append(rec)

    return Corpus(datasets=datasets, papers=papers, journal_impact=dict(sorted(journal_impact.items())))


def validate(corpus: Corpus) -> ValidationReport:
    """Check every record invariant and return a full report.

    The error list is empty iff the corpus satisfies all type invariants;
    data-quality issues that downstream stages can tolerate (e.g. a dataset
    with no topic tags) are warnings.
    """
    errors: list[tuple[str, str]] = []
    warnings: list[tuple[str, str]] = []

    used: set[str] = set()
    for p in corpus.papers:
        if p.n_datasets == 0:
            errors.append((p.id, "paper uses no datasets"))
        for did in sorted(p.dataset_ids):
            used.add(did)
            if did not in corpus.datasets:
                errors.append((p.id, f"references unknown dataset {did!r}"))
        for jid, count in sorted(p.referenced_journal_counts.items()):
            if count < 1:
                errors.append((p.id, f"referenced journal {jid!r} has count {count} < 1"))
        for name, w in sorted(p.discipline_weights.items()):
            if not 0.0 <= w <= 1.0:
                errors.append((p.id, f"discipline weight {name!r}={w} outside [0, 1]"))
        if p.journal_id is not None and p.journal_id not in corpus.journal_impact:
            errors.append((p.id, f"journal {p.journal_id!r} missing from impact map"))
        for w, c in sorted(p.citations.items()):
            if c is not None and c < 0:
                errors.append((p.id, f"negative {w}-year citation count"))
        if p.altmetric_counts is not None:
            for src, c in sorted(p.altmetric_counts.items()):
                if c < 0:
                    errors.append((p.id, f"negative altmetric count for {src!r}"))

    for did, ds in corpus.datasets.items():
        if not ds.topics:
            warnings.append((did, "dataset has no topic tags"))
        if did not in used:
            warnings.append((did, "dataset used by no paper"))

    multi = corpus.n_multi_dataset_papers
    summary = {
        "papers": len(corpus.papers),
        "datasets": len(corpus.datasets),
        "multi_dataset_papers": multi,
        "single_dataset_papers": len(corpus.papers) - multi,
    }
    return ValidationReport(errors=errors, warnings=warnings, summary=summary)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def _dataset_to_obj(ds: DatasetRecord) -> dict:
    return {"v": SCHEMA_VERSION, "id": ds.id, "title": ds.title, "topics": sorted(ds.topics)}


def _paper_to_obj(p: PaperRecord) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "id": p.id,
        "year": p.year,
        "datasets": sorted(p.dataset_ids),
        "journal": p.journal_id,
        "ref_journals": dict(sorted(p.referenced_journal_counts.items())),
        "authors": list(p.author_ids),
        "author_mean_cites": p.author_mean_citations,
        "disciplines": dict(sorted(p.discipline_weights.items())),
        "cites": {f"y{w}": p.citations.get(w) for w in CITATION_WINDOWS},
        "altmetric": None
        if p.altmetric_counts is None
        else {src: p.altmetric_counts.get(src, 0) for src in ALTMETRIC_SOURCES},
    }


def write_corpus(corpus: Corpus, corpus_dir: str | Path) -> None:
    """Write the three corpus files in canonical order (byte-deterministic)."""
    corpus_dir = Path(corpus_dir)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    with open(corpus_dir / DATASET_FILE, "w", encoding="utf-8") as fh:
        for did in sorted(corpus.datasets):
            fh.write(json.dumps(_dataset_to_obj(corpus.datasets[did]), sort_keys=True) + "\n")
    with open(corpus_dir / PAPER_FILE, "w", encoding="utf-8") as fh:
        for p in corpus.papers:
            fh.write(json.dumps(_paper_to_obj(p), sort_keys=True) + "\n")
    with open(corpus_dir / JOURNAL_FILE, "w", encoding="utf-8") as fh:
        for jid in sorted(corpus.journal_impact):
            fh.write(
                json.dumps({"v": SCHEMA_VERSION, "id": jid, "impact": corpus.journal_impact[jid]}, sort_keys=True)
                + "\n"
            )


def content_hash(corpus: Corpus) -> str:
    """Deterministic hash of corpus content, used to key on-disk caches."""
    h = hashlib.sha256()
    for did in sorted(corpus.datasets):
        h.update(json.dumps(_dataset_to_obj(corpus.datasets[did]), sort_keys=True).encode())
    for p in corpus.papers:
        h.update(json.dumps(_paper_to_obj(p), sort_keys=True).encode())
    for jid in sorted(corpus.journal_impact):
        h.update(f"{jid}={corpus.journal_impact[jid]!r}".encode())
    return h.hexdigest()


def recompute_journal_impact(corpus: Corpus, snapshot_year: int = 2019) -> dict[str, float]:
    """Optional proxy-impact recompute: mean 3-year citations of each venue's
    papers published in ``snapshot_year``.

    Journals without papers in the snapshot year keep impact 0.0.  Returns a
    fresh map; the caller decides whether to swap it into the corpus.
    """
    totals: dict[str, list[int]] = {jid: [] for jid in corpus.journal_impact}
    for p in corpus.papers:
        if p.year != snapshot_year or p.journal_id is None:
            continue
        c = p.citations.get(3)
        if c is not None:
            totals.setdefault(p.journal_id, []).append(c)
    return {
        jid: (sum(vals) / len(vals) if vals else 0.0) for jid, vals in sorted(totals.items())
    }
