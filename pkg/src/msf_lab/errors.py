class MsfLabError(Exception):
    pass


class PatchError(MsfLabError, ValueError):
    """Invalid patch request (bad radius, modulus, slot...)."""


class CapExceeded(MsfLabError):
    """A configured size cap (vertices, cycles, slots) would be exceeded."""


class ConfigError(MsfLabError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
