"""
Exception hierarchy for cycle normal-form computations
Every error carries a stable machine code used in CLI error documents
"""


class CycleNFError(Exception):
    code = 'error'

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        return {
            'code': self.code,
            'message': self.message,
            'details': {k: _plain(v) for k, v in self.details.items()},
        }


def _plain(value):
    """Make detail values JSON friendly"""
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, 'tolist'):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class InvalidInput(CycleNFError):
    code = 'invalid_input'


class NumericallySingular(CycleNFError):
    code = 'numerically_singular'


class ConstraintInconsistent(CycleNFError):
    code = 'constraint_inconsistent'


class KernelDimensionMismatch(CycleNFError):
    code = 'kernel_dimension_mismatch'


class NoConvergence(CycleNFError):
    code = 'no_convergence'


class PeriodCollapse(CycleNFError):
    code = 'period_collapse'


class ResonanceGuardTripped(CycleNFError):
    code = 'resonance_guard_tripped'


class AmbiguousPairing(CycleNFError):
    code = 'ambiguous_pairing'


class NormalizationDegenerate(CycleNFError):
    code = 'normalization_degenerate'


class DependencyMissing(CycleNFError):
    code = 'dependency_missing'


class MissingHigherOrder(CycleNFError):
    code = 'missing_higher_order'


class BoundaryDegenerate(CycleNFError):
    code = 'boundary_degenerate'


class DomainViolation(CycleNFError):
    code = 'domain_violation'


class Divergence(CycleNFError):
    code = 'divergence'


class CriticalityCheckFailed(CycleNFError):
    code = 'criticality_check_failed'


class InvalidCoefficients(CycleNFError):
    code = 'invalid_coefficients'
