"""Exception types shared across the package.

``ValidationError`` subclasses signal bad inputs or violated preconditions
(CLI exit code 2); the remaining ``FreqpanelError`` subclasses signal
numerical or runtime failures (CLI exit code 1).
"""


class FreqpanelError(Exception):
    """Base class for all package errors."""


class ValidationError(FreqpanelError):
    """Invalid input or violated precondition."""


# -- series ------------------------------------------------------------
class NoPreCutoffData(ValidationError):
    """Fewer than two observations before the demeaning cutoff year."""


class MissingWeights(ValidationError):
    """Operation requires panel weights but none are attached."""


class LagTooLarge(ValidationError):
    """Requested autocorrelation lag is not smaller than the sample size."""


class AxisMismatch(ValidationError):
    """Series or panels do not share the required unit/year axes."""


# -- fractional UC model -----------------------------------------------
class NonInvertiblePolynomial(ValidationError):
    """Lag polynomial has a root on or inside the unit circle."""


class SingularSystem(FreqpanelError):
    """Smoother system is numerically singular."""


class SingularCovariance(FreqpanelError):
    """Implied covariance matrix is not positive definite."""


class OptimizerFailed(FreqpanelError):
    """No start produced a finite, improving objective value."""


# -- low-frequency filters ---------------------------------------------
class QTooLarge(ValidationError):
    """Number of cosine basis functions exceeds T/2."""


class SampleTooShort(ValidationError):
    """Sample too short for the requested filter configuration."""


# -- factor analysis ----------------------------------------------------
class DegenerateRank(FreqpanelError):
    """Data matrix carries no extractable factor (zero variation)."""


class IncompatibleAxes(ValidationError):
    """Factor model and series were built on incompatible axes."""


# -- panel regression ----------------------------------------------------
class RankDeficientDesign(FreqpanelError):
    """Regressor matrix is rank deficient after the within transformation."""


class ExplosiveDynamics(ValidationError):
    """Autoregressive coefficient is not inside the unit circle."""


# -- inference ------------------------------------------------------------
class TooFewClusters(ValidationError):
    """Clustered variance needs at least two clusters per dimension."""


class TooFewEstimates(ValidationError):
    """Density summary needs at least five estimates."""


class BootstrapDegenerate(FreqpanelError):
    """Bootstrap replications produced non-finite estimates."""


# -- Monte Carlo ----------------------------------------------------------
class MissingCalibration(ValidationError):
    """Monte Carlo design lacks a required calibration input."""


# -- ingestion -------------------------------------------------------------
class MalformedRecord(ValidationError):
    """Fixed-width record has the wrong length or an unparseable field."""


class UnknownElementCode(ValidationError):
    """Record carries an element code outside the known table."""


class MissingYearCoverage(ValidationError):
    """Units do not share a common consecutive year range."""


class NonPositiveLevel(ValidationError):
    """Log growth rates require strictly positive levels."""


class EmptyIntersection(ValidationError):
    """Datasets have no overlapping years."""
