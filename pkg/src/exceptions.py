# src/exceptions.py - Error hierarchy for tiltlab


class TiltlabError(Exception):
    """Base class for all tiltlab errors"""


class UsageError(TiltlabError):
    """Invalid arguments, flags, handles or model strings (CLI exit code 1)"""


class GraphModelError(UsageError):
    """Unknown graph family, foreign vertex handle or non-adjacent edge"""


class ConfigError(UsageError):
    """Malformed or unknown configuration entries"""


class DivergenceError(TiltlabError):
    """Quantity evaluated at or above the threshold where it diverges"""


class OracleDomainError(TiltlabError):
    """Oracle asked outside its domain (negative discriminant, divergent tail)"""
