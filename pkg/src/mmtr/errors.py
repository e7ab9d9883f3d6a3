"""Exception hierarchy; the CLI maps each class to an exit code."""


class MmtrError(Exception):
    exit_code = 1


class ConfigError(MmtrError, ValueError):
    exit_code = 1


class DataError(MmtrError, ValueError):
    exit_code = 2


class NumericError(MmtrError, ArithmeticError):
    exit_code = 3
