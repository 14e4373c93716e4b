"""Atypicality scores over dataset, topic, and referenced-journal pairings.

Each score is one minus a weighted sum of pairwise co-usage similarities
over the paper's entity set S:

    raw = 1 - sum_{(i,j)} D_ij * w_i * w_j

By default the sum runs over ALL ORDERED pairs including the diagonal, with
weights summing to one.  That makes the score a quadratic-entropy diversity
with distance 1 - D (the diagonal contributes zero dissimilarity) and gives
the sharp upper bound 1 - 1/N for uniform weights, attained exactly when all
off-diagonal similarities vanish.  Alternative pair-set conventions are kept
behind a switch for sensitivity analysis.

Weights are uniform (1/N) for dataset and topic scores; journal-pairing
novelty weights each journal by its share of the paper's references.
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

from .corpus import Corpus, PaperRecord
from .errors import (
    DegeneratePopulationError,
    EmptyTopicUnionError,
    NoReferencesError,
)
from .simengine import IncidenceIndex, Mode, SimilarityProvider, build_incidence


class PairConvention(enum.Enum):
    """Which (i, j) pairs enter the similarity sum."""

    ORDERED = "ordered"  # all ordered pairs including the diagonal (default)
    OFFDIAG = "offdiag"  # all ordered pairs with i != j
    UNORDERED = "unordered"  # unordered pairs i < j, diagonal excluded


@dataclass(frozen=True)
class AtypicalityScore:
    """One score value with its mode, pair-set convention, and normalization state."""

    paper_id: str
    mode: Mode
    raw: float
    normalized: float | None
    n_entities: int
    convention: PairConvention = PairConvention.ORDERED

    @property
    def degenerate(self) -> bool:
        """Single-entity papers score 0 by construction and are excluded
        from atypicality regressions by default."""
        return self.n_entities < 2


def _pair_sum(
    provider: SimilarityProvider,
    positions: Sequence[int],
    weights: Sequence[float],
    convention: PairConvention,
    exclude_article: int | None,
) -> float:
    provider.prefetch(
        [
            (min(a, b), max(a, b))
            for i, a in enumerate(positions)
            for b in positions[i + 1 :]
        ]
    )
    total = 0.0
    n = len(positions)
    for i in range(n):
        for j in range(i + 1, n):
            d = provider.cosine_at(positions[i], positions[j], exclude_article)
            if convention is PairConvention.UNORDERED:
                total += d * weights[i] * weights[j]
            else:
                total += 2.0 * d * weights[i] * weights[j]
    if convention is PairConvention.ORDERED:
        for i in range(n):
            d = provider.cosine_at(positions[i], positions[i], exclude_article)
            total += d * weights[i] * weights[i]
    return total


def _score(
    provider: SimilarityProvider,
    paper: PaperRecord,
    entity_ids: Sequence[str],
    weights: Sequence[float],
    convention: PairConvention,
    leave_one_out: bool,
) -> AtypicalityScore:
    exclude = (
        provider.index.article_position(paper.id) if leave_one_out else None
    )
    positions = [provider.index.position(e) for e in entity_ids]
    raw = 1.0 - _pair_sum(provider, positions, weights, convention, exclude)
    return AtypicalityScore(
        paper_id=paper.id,
        mode=provider.index.mode,
        raw=raw,
        normalized=None,
        n_entities=len(entity_ids),
        convention=convention,
    )


def dataset_atypicality(
    paper: PaperRecord,
    provider: SimilarityProvider,
    convention: PairConvention = PairConvention.ORDERED,
    leave_one_out: bool = False,
) -> AtypicalityScore:
    """Atypicality of the paper's dataset combination (uniform weights 1/N)."""
    if provider.index.mode is not Mode.DATASET:
        raise ValueError("provider must be built in dataset mode")
    ids = sorted(paper.dataset_ids)
    w = [1.0 / len(ids)] * len(ids)
    return _score(provider, paper, ids, w, convention, leave_one_out)


def topic_atypicality(
    paper: PaperRecord,
    corpus: Corpus,
    provider: SimilarityProvider,
    convention: PairConvention = PairConvention.ORDERED,
    leave_one_out: bool = False,
) -> AtypicalityScore:
    """Atypicality over the union of topic tags of the paper's datasets."""
    if provider.index.mode is not Mode.TOPIC:
        raise ValueError("provider must be built in topic mode")
    ids = sorted(corpus.topic_union(paper))
    if not ids:
        raise EmptyTopicUnionError(f"paper {paper.id!r}: datasets carry no topic tags")
    w = [1.0 / len(ids)] * len(ids)
    return _score(provider, paper, ids, w, convention, leave_one_out)


def paper_novelty(
    paper: PaperRecord,
    provider: SimilarityProvider,
    convention: PairConvention = PairConvention.ORDERED,
    leave_one_out: bool = False,
) -> AtypicalityScore:
    """Novelty of the paper's referenced-journal pairings, weighted by
    each journal's share of the paper's references."""
    if provider.index.mode is not Mode.JOURNAL:
        raise ValueError("provider must be built in journal mode")
    total = paper.total_references
    if total < 1:
        raise NoReferencesError(f"paper {paper.id!r} references no journals")
    ids = sorted(paper.referenced_journal_counts)
    w = [paper.referenced_journal_counts[j] / total for j in ids]
    return _score(provider, paper, ids, w, convention, leave_one_out)


def zscore(
    scores: Iterable[AtypicalityScore],
    population: Callable[[AtypicalityScore], bool] | None = None,
) -> list[AtypicalityScore]:
    """Z-normalize raw scores within an analysis population.

    ``population`` selects which scores form the population (default: the
    non-degenerate ones, i.e. papers combining at least two entities).
    Returns new score objects for the population only, with ``normalized``
    filled; uses the sample standard deviation (n - 1 divisor).
    """
    if population is None:
        population = lambda s: not s.degenerate  # noqa: E731
    member = [s for s in scores if population(s)]
    if len(member) < 2:
        raise DegeneratePopulationError(
            f"population has {len(member)} member(s); need at least 2"
        )
    raws = [s.raw for s in member]
    mean = statistics.fmean(raws)
    sd = math.sqrt(sum((r - mean) ** 2 for r in raws) / (len(raws) - 1))
    if sd == 0.0:
        raise DegeneratePopulationError("population raw scores have zero variance")
    return [replace(s, normalized=(s.raw - mean) / sd) for s in member]


def score_corpus(
    corpus: Corpus,
    mode: Mode,
    provider: SimilarityProvider | None = None,
    index: IncidenceIndex | None = None,
    convention: PairConvention = PairConvention.ORDERED,
    leave_one_out: bool = False,
) -> tuple[list[AtypicalityScore], list[tuple[str, str]]]:
    """Score every paper in the corpus under one mode.

    Papers whose score is undefined (no topic tags in topic mode, no
    references in journal mode) are skipped and returned with a reason.
    """
    if provider is None:
        provider = SimilarityProvider(index if index is not None else build_incidence(corpus, mode))
    scores: list[AtypicalityScore] = []
    skipped: list[tuple[str, str]] = []
    for paper in corpus.papers:
        try:
            if mode is Mode.DATASET:
                scores.append(dataset_atypicality(paper, provider, convention, leave_one_out))
            elif mode is Mode.TOPIC:
                scores.append(topic_atypicality(paper, corpus, provider, convention, leave_one_out))
            else:
                scores.append(paper_novelty(paper, provider, convention, leave_one_out))
        except (EmptyTopicUnionError, NoReferencesError) as exc:
            skipped.append((paper.id, str(exc)))
    return scores, skipped
