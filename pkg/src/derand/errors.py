"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside the range an operation supports."""


class CapExceeded(ValueError):
    """An exhaustive computation would exceed the configured enumeration cap."""

    def __init__(self, what, size, cap):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(
            f"{what}: {size} items exceeds the enumeration cap of {cap}; "
            "raise DERAND_CAP or switch to a sampled mode"
        )


class InfeasibleError(ValueError):
    """No candidate satisfies the requested constraint."""
