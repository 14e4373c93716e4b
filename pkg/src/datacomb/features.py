"""Control variables and design-matrix assembly for the regression suite.

Each model preset names an outcome, a population filter, and a covariate
set.  Conventions shared by all presets:

* natural logarithm throughout, so a coefficient b on a binary covariate
  reads as a (exp(b) - 1) * 100 percent outcome change;
* +0.01 offsets before logging author recognition and journal impact
  (both can be 0); counts (authors, datasets, use frequency) are >= 1 and
  are logged directly;
* publication year enters as right-closed five-year interval dummies with
  the earliest interval as the reference category;
* discipline weights enter as continuous columns, one per discipline
  observed in the included rows;
* atypicality-style covariates are z-normalized within the included rows
  (sample standard deviation), and the normalization population is recorded
  in the table metadata;
* rows missing any required field are dropped and counted, never imputed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import ALTMETRIC_SOURCES, Corpus, PaperRecord
from .errors import (
    DegeneratePopulationError,
    EmptyPopulationError,
    PercentileUndefinedError,
    YearOutOfRangeError,
)
from .metrics import AtypicalityScore

REC_OFFSET = 0.01  # added to author recognition before logging
IMPACT_OFFSET = 0.01  # added to journal impact before logging

DEFAULT_BIN_WIDTH = 5
DEFAULT_BIN_ANCHOR = 2019  # bins end on years aligned with this one


# --------------------------------------------------------------------------
# year bins
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class YearBins:
    """Right-closed intervals (edges[k], edges[k+1]]; bin 0 is the reference."""

    edges: tuple[int, ...]

    def __post_init__(self):
        if len(self.edges) < 2 or any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("edges must be strictly increasing with at least two values")

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    def labels(self) -> list[str]:
        return [f"({lo}, {hi}]" for lo, hi in zip(self.edges, self.edges[1:])]

    def bin_of(self, year: int) -> int:
        if not self.edges[0] < year <= self.edges[-1]:
            raise YearOutOfRangeError(
                f"year {year} outside configured range ({self.edges[0]}, {self.edges[-1]}]"
            )
        for k in range(self.n_bins):
            if year <= self.edges[k + 1]:
                return k
        raise AssertionError("unreachable")

    def dummies(self, year: int) -> np.ndarray:
        """Dummy vector over the non-reference bins (all zero for bin 0)."""
        out = np.zeros(self.n_bins - 1, dtype=np.float64)
        k = self.bin_of(year)
        if k > 0:
            out[k - 1] = 1.0
        return out

    @classmethod
    def for_range(
        cls,
        min_year: int,
        max_year: int,
        width: int = DEFAULT_BIN_WIDTH,
        anchor: int = DEFAULT_BIN_ANCHOR,
    ) -> "YearBins":
        """Aligned uniform grid covering [min_year, max_year]."""
        residue = anchor % width
        hi = max_year + ((residue - max_year) % width)
        lo = min_year - 1 - ((min_year - 1 - residue) % width)
        return cls(edges=tuple(range(lo, hi + 1, width)))


def year_bins(year: int, bins: YearBins) -> np.ndarray:
    """Dummy vector of ``year`` under the configured bins."""
    return bins.dummies(year)


# --------------------------------------------------------------------------
# hit flag
# --------------------------------------------------------------------------


def hit_flag(corpus: Corpus, top_fraction: float = 0.05) -> dict[str, int]:
    """Flag papers whose 3-year citations strictly exceed the nearest-rank
    (1 - top_fraction) percentile of all papers with a 3-year count.

    Strict exceedance keeps the flagged share at most ``top_fraction`` plus
    the tie mass at the threshold, and is deterministic.
    """
    values = [(p.id, p.citations.get(3)) for p in corpus.papers]
    values = [(pid, c) for pid, c in values if c is not None]
    if len(values) < 20:
        raise PercentileUndefinedError(
            f"hit-flag percentile needs at least 20 papers with 3-year citations, got {len(values)}"
        )
    counts = sorted(c for _, c in values)
    rank = math.ceil((1.0 - top_fraction) * len(counts))  # nearest-rank, 1-based
    threshold = counts[rank - 1]
    return {pid: int(c > threshold) for pid, c in values}


# --------------------------------------------------------------------------
# feature table
# --------------------------------------------------------------------------


@dataclass
class FeatureTable:
    """Named design matrix: one outcome column plus covariate columns."""

    row_ids: list[str]
    outcome_name: str
    outcome: np.ndarray
    column_names: list[str]
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(self.row_ids)

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.column_names.index(name)]

    def to_csv(self, path: str | Path) -> None:
        """Write rows as CSV plus a sidecar ``<stem>.meta.json``."""
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["paper_id", self.outcome_name, *self.column_names])
            for i, pid in enumerate(self.row_ids):
                writer.writerow(
                    [pid, repr(float(self.outcome[i])), *(repr(float(v)) for v in self.matrix[i])]
                )
        meta_path = path.with_suffix(".meta.json")
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureTable":
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        outcome_name = header[1]
        column_names = header[2:]
        row_ids = [r[0] for r in rows]
        outcome = np.array([float(r[1]) for r in rows], dtype=np.float64)
        matrix = np.array([[float(v) for v in r[2:]] for r in rows], dtype=np.float64)
        meta_path = path.with_suffix(".meta.json")
        metadata = {}
        if meta_path.is_file():
            metadata = json.loads(meta_path.read_text(encoding="utf-8"))
        return cls(
            row_ids=row_ids,
            outcome_name=outcome_name,
            outcome=outcome,
            column_names=column_names,
            matrix=matrix if rows else np.empty((0, len(column_names))),
            metadata=metadata,
        )


# --------------------------------------------------------------------------
# model presets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelPreset:
    """One regression specification: outcome, population, covariates."""

    name: str
    family: str  # "negbin" | "logistic" | "ols"
    outcome: str  # "citations" | "hit" | "altmetric:<source>" | "multi_flag" | "atypicality_z"
    population: str  # "all" | "multi" | "multi-topic" | "post2010-multi"
    covariates: tuple[str, ...]
    include_year_bins: bool = True
    include_disciplines: bool = True
    alpha: float | None = None  # fixed dispersion for count models


_CONTROLS = (
    "use_frequency_log",
    "num_authors_log",
    "author_recognition_log",
    "impact_factor_log",
)
_ATYP_BLOCK = ("atypicality", "num_datasets_log", "paper_novelty") + _CONTROLS

PRESETS: dict[str, ModelPreset] = {
    p.name: p
    for p in [
        # citations vs. whether a paper combines datasets at all
        ModelPreset("multi-flag", "negbin", "citations", "all", ("multi_flag",) + _CONTROLS, alpha=1.0),
        # citations vs. how many datasets are combined
        ModelPreset("dataset-count", "negbin", "citations", "all", ("num_datasets",) + _CONTROLS, alpha=1.0),
        # citations vs. atypicality of the combination, within combining papers
        ModelPreset("atypicality", "negbin", "citations", "multi", _ATYP_BLOCK, alpha=1.0),
        # adds topic atypicality; restricted to papers with >= 2 topic tags
        ModelPreset(
            "topic",
            "negbin",
            "citations",
            "multi-topic",
            ("atypicality", "topic_atypicality", "num_datasets_log", "paper_novelty") + _CONTROLS,
            alpha=0.25,
        ),
        # top-5% hit status vs. atypicality
        ModelPreset("hit", "logistic", "hit", "multi", _ATYP_BLOCK),
        # online-attention outcomes, post-2010 papers only
        *[
            ModelPreset(f"altmetric-{src}", "negbin", f"altmetric:{src}", "post2010-multi", _ATYP_BLOCK, alpha=1.0)
            for src in ALTMETRIC_SOURCES
        ],
        # who combines datasets: team size / experience
        ModelPreset(
            "team-size-logit",
            "logistic",
            "multi_flag",
            "all",
            ("num_authors_log", "use_frequency_log", "impact_factor_log"),
            include_year_bins=False,
            include_disciplines=False,
        ),
        ModelPreset(
            "team-exp-logit",
            "logistic",
            "multi_flag",
            "all",
            ("author_recognition_log", "use_frequency_log", "impact_factor_log"),
            include_year_bins=False,
            include_disciplines=False,
        ),
        ModelPreset(
            "team-size-ols",
            "ols",
            "atypicality_z",
            "multi",
            ("num_authors_log", "num_datasets_log", "use_frequency_log", "impact_factor_log"),
            include_year_bins=False,
            include_disciplines=False,
        ),
        ModelPreset(
            "team-exp-ols",
            "ols",
            "atypicality_z",
            "multi",
            ("author_recognition_log", "num_datasets_log", "use_frequency_log", "impact_factor_log"),
            include_year_bins=False,
            include_disciplines=False,
        ),
        # minimal spec used by the synthetic-corpus recovery loop
        ModelPreset(
            "recovery",
            "negbin",
            "citations",
            "all",
            ("multi_flag", "atypicality"),
            include_year_bins=False,
            include_disciplines=False,
            alpha=1.0,
        ),
    ]
}

# covariates whose value is a z-scored atypicality raw score, keyed by mode
_SCORE_COVARIATES = {
    "atypicality": "dataset",
    "topic_atypicality": "topic",
    "paper_novelty": "journal",
}


def _zscore_column(values: list[float], what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise DegeneratePopulationError(f"{what}: need at least 2 rows to normalize")
    sd = float(arr.std(ddof=1))
    if sd == 0.0:
        raise DegeneratePopulationError(f"{what}: zero variance in included rows")
    return (arr - arr.mean()) / sd


def _population_filter(preset: ModelPreset, corpus: Corpus):
    if preset.population == "all":
        return lambda p: True
    if preset.population == "multi":
        return lambda p: p.n_datasets >= 2
    if preset.population == "multi-topic":
        return lambda p: p.n_datasets >= 2 and len(corpus.topic_union(p)) >= 2
    if preset.population == "post2010-multi":
        return lambda p: p.year > 2010 and p.n_datasets >= 2 and p.altmetric_counts is not None
    raise ValueError(f"unknown population {preset.population!r}")


def build_features(
    corpus: Corpus,
    preset: ModelPreset | str,
    scores: dict[str, dict[str, AtypicalityScore]] | None = None,
    window: int = 3,
    year_range: tuple[int | None, int | None] | None = None,
    year_edges: tuple[int, ...] | None = None,
) -> FeatureTable:
    """Assemble the design matrix for one model preset.

    ``scores`` maps mode name ("dataset"/"topic"/"journal") to per-paper raw
    scores; it must cover the modes the preset's covariates need.
    ``year_range`` optionally restricts the population to ``lo <= year < hi``
    (either bound may be None), used for per-period analyses.
    """
    if isinstance(preset, str):
        try:
            preset = PRESETS[preset]
        except KeyError:
            raise ValueError(f"unknown model preset {preset!r}") from None
    scores = scores or {}

    needed_modes = sorted(
        {_SCORE_COVARIATES[c] for c in preset.covariates if c in _SCORE_COVARIATES}
    )
    if preset.outcome == "atypicality_z":
        needed_modes = sorted(set(needed_modes) | {"dataset"})
    for m in needed_modes:
        if m not in scores:
            raise ValueError(f"preset {preset.name!r} needs {m!r} scores, none supplied")

    flags = hit_flag(corpus) if preset.outcome == "hit" else None

    in_population = _population_filter(preset, corpus)
    lo, hi = year_range if year_range is not None else (None, None)

    population: list[PaperRecord] = []
    for p in corpus.papers:
        if lo is not None and p.year < lo:
            continue
        if hi is not None and p.year >= hi:
            continue
        if in_population(p):
            population.append(p)

    dropped: dict[str, int] = {}

    def drop(reason: str) -> None:
        dropped[reason] = dropped.get(reason, 0) + 1

    rows: list[PaperRecord] = []
    outcome_vals: list[float] = []
    for p in population:
        val = _outcome_value(p, preset, window, flags)
        if val is None:
            drop("missing outcome")
            continue
        reason = _missing_covariate(p, preset, corpus, scores)
        if reason is not None:
            drop(reason)
            continue
        rows.append(p)
        outcome_vals.append(val)

    if not rows:
        raise EmptyPopulationError(f"preset {preset.name!r}: no usable rows")

    names: list[str] = ["intercept"]
    cols: list[np.ndarray] = [np.ones(len(rows))]

    bins = None
    if preset.include_year_bins:
        if year_edges is not None:
            bins = YearBins(edges=tuple(year_edges))
        else:
            years = [p.year for p in rows]
            bins = YearBins.for_range(min(years), max(years))
        dummy = np.array([bins.dummies(p.year) for p in rows])
        labels = bins.labels()
        for k in range(1, bins.n_bins):
            col = dummy[:, k - 1]
            if col.any():  # skip intervals no included paper falls in
                names.append(f"year_bin{labels[k]}")
                cols.append(col)

    for cov in preset.covariates:
        if cov in _SCORE_COVARIATES:
            mode = _SCORE_COVARIATES[cov]
            raws = [scores[mode][p.id].raw for p in rows]
            cols.append(_zscore_column(raws, cov))
        else:
            cols.append(np.array([_plain_covariate(p, cov, corpus) for p in rows]))
        names.append(cov)

    if preset.include_disciplines:
        disciplines = sorted({d for p in rows for d in p.discipline_weights})
        for d in disciplines:
            col = np.array([p.discipline_weights.get(d, 0.0) for p in rows])
            if col.any():
                names.append(f"disc_{d}")
                cols.append(col)

    outcome = np.asarray(outcome_vals, dtype=np.float64)
    if preset.outcome == "atypicality_z":
        outcome = _zscore_column(list(outcome_vals), "outcome atypicality")

    metadata = {
        "preset": preset.name,
        "family": preset.family,
        "outcome": preset.outcome,
        "window": window if preset.outcome == "citations" else None,
        "alpha": preset.alpha,
        "population": preset.population,
        "year_range": [lo, hi],
        "population_count": len(population),
        "rows": len(rows),
        "dropped": len(population) - len(rows),
        "dropped_reasons": dict(sorted(dropped.items())),
        "reference_year_bin": bins.labels()[0] if bins is not None else None,
        "year_edges": list(bins.edges) if bins is not None else None,
        "offsets": {"author_recognition": REC_OFFSET, "impact_factor": IMPACT_OFFSET},
        "log_base": "e",
        "score_normalization": "z-score within included rows, sample sd (n-1)",
        "columns": names,
    }
    return FeatureTable(
        row_ids=[p.id for p in rows],
        outcome_name=preset.outcome if preset.outcome != "citations" else f"citations_{window}y",
        outcome=outcome,
        column_names=names,
        matrix=np.column_stack(cols),
        metadata=metadata,
    )


def _outcome_value(
    p: PaperRecord, preset: ModelPreset, window: int, flags: dict[str, int] | None
) -> float | None:
    if preset.outcome == "citations":
        c = p.citations.get(window)
        return None if c is None else float(c)
    if preset.outcome == "hit":
        f = flags.get(p.id) if flags else None
        return None if f is None else float(f)
    if preset.outcome.startswith("altmetric:"):
        src = preset.outcome.split(":", 1)[1]
        if p.altmetric_counts is None:
            return None
        return float(p.altmetric_counts.get(src, 0))
    if preset.outcome == "multi_flag":
        return float(p.n_datasets >= 2)
    if preset.outcome == "atypicality_z":
        return 0.0  # placeholder; replaced by the z-scored dataset score below
    raise ValueError(f"unknown outcome {preset.outcome!r}")


def _missing_covariate(
    p: PaperRecord,
    preset: ModelPreset,
    corpus: Corpus,
    scores: dict[str, dict[str, AtypicalityScore]],
) -> str | None:
    """Reason the row is unusable, or None if complete."""
    needed = set(preset.covariates)
    if preset.outcome == "atypicality_z":
        needed.add("atypicality")
    for cov in sorted(needed):
        if cov in _SCORE_COVARIATES:
            if p.id not in scores[_SCORE_COVARIATES[cov]]:
                return f"missing {cov}"
        elif cov == "num_authors_log":
            if not p.author_ids:
                return "no authors"
        elif cov == "author_recognition_log":
            if p.author_mean_citations is None:
                return "missing author recognition"
        elif cov == "impact_factor_log":
            if p.journal_id is None or p.journal_id not in corpus.journal_impact:
                return "missing impact factor"
        elif cov in ("use_frequency_log", "num_datasets", "num_datasets_log", "multi_flag"):
            if p.n_datasets == 0:
                return "no datasets"
    return None


def _plain_covariate(p: PaperRecord, cov: str, corpus: Corpus) -> float:
    if cov == "multi_flag":
        return float(p.n_datasets >= 2)
    if cov == "num_datasets":
        return float(p.n_datasets)
    if cov == "num_datasets_log":
        return math.log(p.n_datasets)
    if cov == "use_frequency_log":
        counts = [corpus.dataset_usage_count(d) for d in sorted(p.dataset_ids)]
        return math.log(sum(counts) / len(counts))
    if cov == "num_authors_log":
        return math.log(len(p.author_ids))
    if cov == "author_recognition_log":
        return math.log(p.author_mean_citations + REC_OFFSET)
    if cov == "impact_factor_log":
        return math.log(corpus.journal_impact[p.journal_id] + IMPACT_OFFSET)
    raise ValueError(f"unknown covariate {cov!r}")
