"""Exception hierarchy shared across the package."""


class InhibnetError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(InhibnetError):
    """Invalid model configuration or CLI/service input."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else []


class DomainError(InhibnetError):
    """Argument outside the mathematical validity region of a formula."""


class SpectralError(InhibnetError):
    """Spectral analysis cannot be performed (unbounded gamma, reducible W)."""


class ConvergenceError(InhibnetError):
    """An iterative scheme failed to reach its tolerance."""


class CapExceededError(InhibnetError):
    """Backward clan exploration exceeded the event cap.

    Carries the clan-size trajectory observed before giving up; a cap hit
    signals the configuration is likely at or below the critical ratio,
    or the cap is too small.
    """

    def __init__(self, cap, size_trajectory):
        super().__init__(f"clan exploration exceeded the cap of {cap} events")
        self.cap = cap
        self.size_trajectory = list(size_trajectory)


class ExcessiveCapFailuresError(InhibnetError):
    """More than the tolerated fraction of stationary samples hit the cap.

    Strong signal that the configuration is not subcritical (or the cap
    is far too small); results would be biased if failures were dropped.
    """

    def __init__(self, failures, n_samples, cap):
        super().__init__(
            f"{failures} of {n_samples} samples exceeded the cap of {cap} events; "
            "the model is likely not subcritical"
        )
        self.failures = failures
        self.n_samples = n_samples
        self.cap = cap


class UnresolvedDependencyError(InhibnetError):
    """Forward replay needed a neuron state that was never determined.

    Violates the replay ordering invariant; should be unreachable.
    """
