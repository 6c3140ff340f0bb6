"""Exception hierarchy shared by all rabiqpt modules."""


class RabiQPTError(Exception):
    """Base class for every error raised by rabiqpt."""


class DomainError(RabiQPTError, ValueError):
    """Input outside the documented evaluation domain."""


class DegenerateResonance(RabiQPTError):
    """The selected sideband detuning is exactly zero, so the max-ratio rule diverges."""


class ZeroEffectiveCavity(RabiQPTError):
    """The effective cavity frequency vanishes and the frequency ratio is undefined."""


class ZeroCritical(RabiQPTError):
    """The critical coupling is zero, so reduced couplings cannot be formed."""


class AmbiguousBoundary(RabiQPTError):
    """Point sits on a phase boundary within the classification tolerance."""


class OutOfPhaseDomain(RabiQPTError):
    """A closed-form expression was evaluated outside its phase region."""


class NeedsEpsilonSign(RabiQPTError):
    """The anisotropy is undefined (g_r = 0) but the formula depends on it."""


class BoundaryTooClose(RabiQPTError):
    """A finite-difference stencil would straddle a phase boundary."""


class NoTransition(RabiQPTError):
    """A path that was expected to cross a phase boundary does not."""


class Indeterminate(RabiQPTError):
    """Neither the first- nor the second-order test fired for a crossing."""


class CutoffTooSmall(RabiQPTError):
    """Fock truncation leaks probability into the top levels."""


class StepSizeFailure(RabiQPTError):
    """The integrator could not keep the norm within tolerance."""


class NotConverged(RabiQPTError):
    """A convergence sequence was exhausted without meeting its criterion."""


class HilbertSpaceTooLarge(RabiQPTError):
    """Dense matrix requested beyond the supported size."""


class UnknownPreset(RabiQPTError, KeyError):
    """No figure preset with that name."""


class InvalidSweepSpec(RabiQPTError, ValueError):
    """Sweep specification violates its invariants."""
