"""Exception types mapped onto the CLI exit codes."""


class NumericalError(RuntimeError):
    """A quadrature, sampling or search routine failed to converge."""


class ConfigError(ValueError):
    """Invalid run configuration; carries every violation at once."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(
            f"  - {v}" for v in self.violations))
