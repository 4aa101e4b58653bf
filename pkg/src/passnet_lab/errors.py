"""Exception hierarchy.

Every error carries the CLI exit code of its class: 2 for configuration
problems, 3 for data problems, 4 for numeric failures. The CLI prints
``<ClassName>: <message>`` as a single line, so messages must not
contain newlines.
"""

from __future__ import annotations


class PassnetLabError(Exception):
    exit_code = 3


class ConfigError(PassnetLabError):
    exit_code = 2


class DataError(PassnetLabError):
    exit_code = 3


class NumericError(PassnetLabError):
    exit_code = 4


# -- ingest ----------------------------------------------------------------


class MalformedInput(DataError):
    pass


class MissingStarters(DataError):
    def __init__(self, match_id: str, detail: str):
        super().__init__(f"match {match_id}: {detail}")
        self.match_id = match_id
        self.detail = detail


class DuplicateMatch(DataError):
    pass


# -- passing networks ------------------------------------------------------


class UnresolvableSubstitution(DataError):
    pass


class NoPositions(DataError):
    pass


# -- features --------------------------------------------------------------


class InsufficientHistory(DataError):
    pass


# -- models ----------------------------------------------------------------


class TooFewRows(DataError):
    pass


class FeatureMismatch(DataError):
    pass


class DegenerateData(NumericError):
    pass


class NonFiniteFeature(NumericError):
    pass


# -- unsupervised ----------------------------------------------------------


class EmptyData(DataError):
    pass


class KTooLarge(DataError):
    pass


class SingleCluster(DataError):
    pass


class LengthMismatch(DataError):
    pass


# -- explainability --------------------------------------------------------


class InvalidRepeats(DataError):
    pass


class TooManyFeaturesForExact(DataError):
    pass


class EmptyBackground(DataError):
    pass


# -- league analyses -------------------------------------------------------


class ZeroVariance(NumericError):
    pass


class TooShort(DataError):
    pass


class MissingTeam(DataError):
    pass


class UnknownLeague(DataError):
    pass


# -- pipeline --------------------------------------------------------------


class MissingArtifact(DataError):
    def __init__(self, artifact: str, stage: str):
        super().__init__(f"missing artifact {artifact!r}; run 'passnet-lab {stage}' first")
        self.artifact = artifact
        self.stage = stage
