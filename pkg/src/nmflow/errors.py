"""Exception hierarchy shared by the simulation modules."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to deliver the requested accuracy."""


class QuadratureError(NumericalError):
    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(f"{message} (value={value!r}, error estimate={error!r})")
        self.value = value
        self.error = error


class SingularRateError(NumericalError):
    """A time-local rate diverges because the amplitude function vanishes."""

    def __init__(self, t, amplitude):
        super().__init__(f"rate is singular at t={t!r} (|G|={abs(amplitude):.3e})")
        self.t = t
        self.amplitude = amplitude


class HorizonError(NumericalError):
    """The requested time horizon overflows an exponential factor."""


class IntegrationError(NumericalError):
    def __init__(self, message, t_fail):
        super().__init__(f"{message} (t={t_fail!r})")
        self.t_fail = t_fail


class AccuracyWarning(UserWarning):
    pass


class WeakCouplingWarning(UserWarning):
    pass
