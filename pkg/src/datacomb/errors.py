"""Exception types shared across the package.

Everything raised on purpose derives from :class:`DatacombError`, so callers
(and the CLI) can distinguish data/model problems from genuine bugs.
"""


class DatacombError(Exception):
    """Base class for all errors raised by datacomb."""


# --- corpus ingestion ---------------------------------------------------


class CorpusFormatError(DatacombError):
    """A corpus file line could not be parsed or violates the line schema."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class ReferentialIntegrityError(DatacombError):
    """A record references an entity that does not exist in the corpus."""


# --- similarity engine --------------------------------------------------


class UnknownEntityError(DatacombError):
    """An entity id was queried that the incidence index does not contain."""


# --- metrics ------------------------------------------------------------


class EmptyTopicUnionError(DatacombError):
    """A paper's datasets carry no topic tags, so the topic score is undefined."""


class NoReferencesError(DatacombError):
    """A paper references no journals, so the pairing-novelty score is undefined."""


class DegeneratePopulationError(DatacombError):
    """A normalization population is too small or has zero variance."""


# --- feature construction ------------------------------------------------


class EmptyPopulationError(DatacombError):
    """No rows survive the population filter of a model."""


class PercentileUndefinedError(DatacombError):
    """The hit-flag percentile is requested on too small a population."""


class YearOutOfRangeError(DatacombError):
    """A publication year falls outside the configured year bins."""


# --- model fitting -------------------------------------------------------


class RankDeficiencyError(DatacombError):
    """The design matrix does not have full column rank."""


class NonConvergenceError(DatacombError):
    """The optimizer exhausted its iteration budget without converging."""


class SeparationError(DatacombError):
    """Logistic outcome is (quasi-)separable; the MLE does not exist."""


class BoundaryError(DatacombError):
    """The MLE lies on the parameter-space boundary (e.g. all-zero counts)."""


class InvalidOutcomeError(DatacombError):
    """Outcome column violates the family's requirements."""


# --- matching ------------------------------------------------------------


class InsufficientPairsError(DatacombError):
    """Fewer than two usable matched pairs for a statistical test."""


# --- synthesis -----------------------------------------------------------


class InfeasibleConfigError(DatacombError):
    """A synthetic-corpus configuration cannot be realized."""


# --- pipeline ------------------------------------------------------------


class ConfigError(DatacombError):
    """A pipeline configuration violates its invariants."""


class PipelineError(DatacombError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
