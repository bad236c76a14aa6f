"""Exception hierarchy shared across the toolkit."""


class ConfflatError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ConfflatError):
    """Evaluation point outside (or too close to the boundary of) the chart box."""


class EvaluationError(ConfflatError):
    """Evaluator produced non-finite output."""


class ImmersionError(ConfflatError):
    """Differential is rank deficient at the evaluation point."""


class FrameError(ConfflatError):
    """Normal-frame construction or transport broke down."""


class DimensionError(ConfflatError):
    """Operation requested below its minimal dimension."""


class NotApplicable(ConfflatError):
    """Check does not apply to the given input (reported, not a failure)."""


class FlatNormalBundleError(ConfflatError):
    """Shape operators fail to commute beyond tolerance."""


class ClusterAmbiguityError(ConfflatError):
    """Eigenvalue clustering gap too close to the tolerance to resolve."""


class RankError(ConfflatError):
    """Numerical rank decision ambiguous (singular-value gap below tolerance)."""


class NetError(ConfflatError):
    """Supplied coordinate net is not orthogonal within tolerance."""


class QuasiumbilicError(ConfflatError):
    """Frame directions fail pairwise orthogonality (input not conformally flat)."""


class ConformalStructureError(ConfflatError):
    """Immersion is not isometric for the declared conformal metric."""


class ModelMembershipError(ConfflatError):
    """Vector does not lie on the light-cone model set."""


class PoleError(ConfflatError):
    """Projection from the cone requested at a point mapping near infinity."""


class SingularTransformError(ConfflatError):
    """Ribaucour direction field is null at some grid point."""


class DegenerateTransformError(ConfflatError):
    """Transformed map fails to be an immersion."""


class DegenerateInputError(ConfflatError):
    """Input lacks the curvature-line rigidity the solver requires."""


class DimensionAmbiguityError(ConfflatError):
    """No clear plateau in the singular-value spectrum."""

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class ConfigError(ConfflatError):
    """Malformed scenario configuration."""


class CurveError(ConfflatError):
    """Curve fails a construction prerequisite (e.g. not unit speed)."""


class NonProperError(ConfflatError):
    """Number of principal normals varies across the sample set."""

    def __init__(self, message, strata=None):
        super().__init__(message)
        self.strata = strata
