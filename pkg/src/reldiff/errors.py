"""Exception types shared across the package."""


class RelDiffError(Exception):
    """Base class for all package errors."""


class InvalidInputError(RelDiffError):
    """Non-finite or malformed numeric input."""


class DomainError(RelDiffError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateFrameError(RelDiffError):
    """Frame matrix is rank deficient and cannot be orthonormalized."""


class UnsupportedModeError(RelDiffError):
    """Requested eigenmode index has no shipped closed form."""


class EmptySampleError(RelDiffError):
    """Statistic requested on an empty sample."""


class NumericBlowupError(RelDiffError):
    """A stochastic step produced non-finite values.

    Carries the particle and step index of the first offending update so a
    failing run can be reproduced from its noise stream.
    """

    def __init__(self, particle: int, step: int, message: str = ""):
        self.particle = int(particle)
        self.step = int(step)
        text = message or f"non-finite state for particle {particle} at step {step}"
        super().__init__(text)


class ConfigError(RelDiffError):
    """Run configuration failed to parse or validate."""
