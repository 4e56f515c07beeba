"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class FormatError(ValueError):
    """A Netpbm file could not be parsed.

    Parameters
    ----------
    message : str
        What went wrong.
    offset : int
        Byte offset in the input at which the problem was detected.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class TooLargeError(InvalidArgumentError):
    """The instance is too large for exhaustive enumeration."""
