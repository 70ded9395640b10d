"""Piecewise-smooth vector fields: classification, regularization, sliding
certificates, blow-up and hybrid integration."""

from ._core import (
    Config,
    ConfigError,
    EvaluationError,
    Expr,
    NotSliding,
    SyntaxError,
    ValidationFailure,
    load_config,
    parse,
    parse_config,
    run,
)

__all__ = [
    "Config",
    "ConfigError",
    "EvaluationError",
    "Expr",
    "NotSliding",
    "SyntaxError",
    "ValidationFailure",
    "load_config",
    "parse",
    "parse_config",
    "run",
]
