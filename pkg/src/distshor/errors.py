"""Exception hierarchy shared by the planner, simulators and CLI."""


class DistShorError(Exception):
    """Base class for all package errors."""


class PlanError(DistShorError, ValueError):
    """Invalid node plan parameters (e.g. k does not divide L)."""


class CorrectionMismatch(DistShorError):
    """No correction bit in {-1, 0, +1} aligns the overlap of node ``u``.

    Happens only when the measured outcomes fall outside the high-probability
    event; the driver is expected to retry the quantum stage.
    """

    def __init__(self, u: int, last_two: int, first_two: int):
        self.u = u
        self.last_two = last_two
        self.first_two = first_two
        super().__init__(
            f"no correction bit for node {u}: overlap {last_two:02b} vs {first_two:02b}"
        )


class QubitCapExceeded(DistShorError):
    """A dense simulation would exceed the configured qubit cap."""


class OracleCapExceeded(DistShorError):
    """Brute-force order oracle refused a modulus above its cap."""


class OrderNotFound(DistShorError):
    """No continued-fraction candidate verified as the order."""


class AttemptsExhausted(DistShorError):
    """The factoring driver ran out of attempts."""
