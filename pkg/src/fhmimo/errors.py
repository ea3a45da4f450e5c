"""Exception taxonomy.

Everything raised on purpose derives from :class:`FhmimoError` so the CLI can
map failures to exit codes (config problems -> 2, numerical/estimation
failures -> 3).
"""


class FhmimoError(Exception):
    """Base class for all deliberate failures in this package."""


class ConfigError(FhmimoError):
    """Invalid or inconsistent configuration input."""


class NonIntegerOrthogonality(ConfigError):
    """B*T/K is not a positive integer, so hop tones are not orthogonal."""


class TooManyAntennas(ConfigError):
    """More transmit antennas than sub-bands (need M < K)."""


class OddL(ConfigError):
    """Samples per hop is odd; the half-hop probe transform needs it even."""


class FrameTooShort(ConfigError):
    """Not enough hops to fit pilots plus the requested probe rows."""


class EstimationError(FhmimoError):
    """Base class for runtime estimation failures (exit code 3)."""


class PeakCollision(EstimationError):
    """Fewer resolvable spectral peaks than transmit antennas."""


class DivZero(EstimationError):
    """A ratio-chain denominator is exactly zero."""


class EmptySet(EstimationError):
    """No usable unit-curvature terms for the folding estimator."""


class NoConsistentTuple(EstimationError):
    """Remainder candidates never agree within the consistency gate."""


class NeitherApplicable(EstimationError):
    """Sequence supports neither phase estimator (both term sets empty)."""


class DegenerateSpectrum(EstimationError):
    """Spatial spectrum is numerically zero; no direction peak exists."""


class ProbeMissing(EstimationError):
    """Schedule lacks the silent-antenna probe rows the estimator needs."""


class NullingViolated(EstimationError):
    """A probe hop carries a frequency that breaks half-hop nulling."""


class CompositeTooSmall(EstimationError):
    """A per-antenna composite gain sits below the destructive-fade floor."""


class OutOfRange(EstimationError):
    """Combination index outside the codebook domain (decoded as erasure)."""
