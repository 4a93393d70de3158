"""Exception hierarchy; every error carries the CLI exit code it maps to"""

from typing import Optional


class PidCertifyError(Exception):
    """Base error with a human-readable detail and an exit code"""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class DimensionError(PidCertifyError, ValueError):
    """Array shapes do not fit together"""


class DomainError(PidCertifyError, ValueError):
    """Argument outside the domain of an operation"""


class PlantConstructionError(PidCertifyError, ValueError):
    """Built-in plant parameters violate the requested class"""

    def __init__(self, detail: str, bound: str):
        super().__init__(detail)
        self.bound = bound


class PlantEvaluationError(PidCertifyError):
    """The plant produced a non-finite value"""

    def __init__(self, detail: str, point: Optional[dict] = None):
        super().__init__(detail)
        self.point = point or {}


class NotConservativeError(PidCertifyError):
    """f(., 0) has a non-symmetric Jacobian on the integration path"""


class NotAHessianFieldError(PidCertifyError):
    """Matrix field is not symmetric or fails the integrability condition"""


class QuadratureError(PidCertifyError):
    """Quadrature did not agree with its refinement"""


class StiffnessError(PidCertifyError):
    """Adaptive integrator step size underflowed"""


class RegionError(PidCertifyError):
    """Gains are outside the region an operation requires"""

    exit_code = 2

    def __init__(self, detail: str, inequality: str, margin: float):
        super().__init__(detail)
        self.inequality = inequality
        self.margin = margin


class CertificateInvalidError(PidCertifyError):
    """A certificate inequality failed"""

    exit_code = 2

    def __init__(self, detail: str, inequality: str, margin: float):
        super().__init__(detail)
        self.inequality = inequality
        self.margin = margin


class CertificateInapplicableError(PidCertifyError):
    """The certificate does not apply to this plant or mode"""


class NoCounterexampleError(PidCertifyError):
    """Refusal to search for instability inside the necessary region"""

    exit_code = 2


class UsageError(PidCertifyError):
    """Invalid run configuration"""

    def __init__(self, detail: str, field: str = ""):
        super().__init__(f"{field}: {detail}" if field else detail)
        self.field = field
