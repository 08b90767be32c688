"""Exception types shared across the simulator."""


class NumericalFailure(RuntimeError):
    """Integration lost unitarity beyond the configured tolerance.

    Usually fixed by lowering the step size (raise ``steps_per_radian``).
    """


class TruncationFailure(RuntimeError):
    """Population reached the top of the Fock basis.

    Usually fixed by enlarging the cavity cutoff.
    """


class InfeasibleError(ValueError):
    """No gate parameters exist under the given constraints."""


class ConfigError(ValueError):
    """A run configuration key is unknown, missing or invalid."""
