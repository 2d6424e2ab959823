"""Exception types shared across the package.

Each class carries the CLI exit code it maps to.
"""


class Se2Error(Exception):
    exit_code = 1


class ConfigurationError(Se2Error, ValueError):
    """Invalid parameters, shapes, or step sizes."""

    exit_code = 2


class DomainError(Se2Error, ValueError):
    """Input data outside the domain an operation is defined on."""

    exit_code = 2


class BlowupError(Se2Error, RuntimeError):
    """Reverse-time diffusion started to diverge."""

    exit_code = 3

    def __init__(self, message, step=None, iteration=None):
        super().__init__(message)
        self.step = step
        self.iteration = iteration


class ImageIOError(Se2Error, OSError):
    exit_code = 4
