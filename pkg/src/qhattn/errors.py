"""Exception classes shared across the package.

The CLI maps these onto distinct process exit codes, so keep the
classification stable: configuration problems, dataset ingestion problems,
and numerical failures are separate families.
"""


class QhattnError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(QhattnError):
    """Invalid configuration: bad qubit counts, parameter sizes, flag combos."""


class CircuitError(QhattnError):
    """Malformed circuit construction: non-unitary payloads, qubit index
    collisions, or out-of-range indices."""


class EncodingError(QhattnError):
    """Feature vector cannot be amplitude-encoded (e.g. zero norm)."""


class IngestError(QhattnError):
    """Dataset file is missing, truncated, or malformed."""


class NumericalError(QhattnError):
    """A numerical invariant was violated at runtime (rank collapse, drift)."""
