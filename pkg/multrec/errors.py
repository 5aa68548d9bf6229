from typing import Optional


class MultrecError(Exception):
    """Generic error for multrec"""


class InvalidInputError(MultrecError):
    """Error raised when invalid user input provided to multrec"""


class RangeError(MultrecError):
    """Error raised when an argument or a range exceeds a budget

    RangeError should be raised whenever a computation would leave the
    configured budgets, such as factorizing an argument above 2**63 or
    summing over a prime window larger than the sieve cap. The message
    names the budget that was exceeded.
    """


class NoSolutionError(MultrecError):
    """Error raised when a system of congruences is inconsistent"""


class UnsupportedError(MultrecError):
    """Error raised when a construction is not available for the input

    UnsupportedError is raised for well-formed requests that the
    construction cannot serve, such as a cyclic character modulo a power
    of two.
    """


class PreconditionError(MultrecError):
    """Error raised when the hypotheses of a construction do not hold

    PreconditionError should be raised when the gcd or window conditions
    needed by the Q-trick decomposition or by the character-shift
    identities are violated. The message names the violated condition.
    """


class CertificateError(MultrecError):
    """Error raised when an exact identity or certificate check fails

    Args:
        message: Description of the failure
        identity: Name of the identity which failed
        witness: An integer witnessing the failure, if one is known
    """

    def __init__(
        self,
        message: str,
        identity: Optional[str] = None,
        witness: Optional[int] = None,
    ):
        super().__init__(message)
        self.identity = identity
        self.witness = witness


class GrammarError(InvalidInputError):
    """Error raised when a function description cannot be parsed

    Args:
        message: Description of the failure
        offset: Byte offset into the description where parsing failed
    """

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class UnknownNameError(GrammarError):
    """Error raised when a function description uses an unknown name"""


class UnexpectedTokenTypeError(MultrecError):
    """Error raised when an unexpected token is seen after parsing

    UnexpectedTokenTypeError should be raised when performing
    post-processing steps over input which has already been processed by
    the grammar. In general, this should not happen unless there is a bug
    caused by a mismatch between the grammar and the current code logic.
    """
