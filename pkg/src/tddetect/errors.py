"""Error taxonomy shared across the package.

UsageError maps to CLI exit code 1, DataError to 2; anything else is an
internal error (3).
"""


class UsageError(Exception):
    pass


class DataError(Exception):
    pass
