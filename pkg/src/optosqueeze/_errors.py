class SingularSystemError(ArithmeticError):
    """A frequency-domain response matrix is (numerically) singular."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
