"""Exception hierarchy. Each class carries the CLI exit code for its category."""


class ContainmentError(Exception):
    exit_code = 1


class ParseError(ContainmentError):
    exit_code = 3


class ValidationError(ContainmentError):
    exit_code = 4


class CapacityError(ContainmentError):
    exit_code = 5
