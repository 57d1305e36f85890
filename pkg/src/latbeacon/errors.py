class BeaconError(Exception):
    """Raised for configuration and precondition failures.

    ``kind`` is a short stable identifier such as ``"invalid-params"`` so
    callers can branch on it without parsing messages.
    """

    def __init__(self, kind: str, message: str = ""):
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind


class DecodeError(BeaconError):
    pass
