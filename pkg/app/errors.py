from typing import Optional

from pydantic import ValidationError


class QRNGError(Exception):
    """Base error carrying a message plus a field -> message mapping."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if not self.details:
            return self.message
        parts = ", ".join(f"{field}: {msg}" for field, msg in self.details.items())
        return f"{self.message} ({parts})"


class DomainError(QRNGError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConfigError(QRNGError, ValueError):
    """Invalid parameter record; details name the offending field."""


class DataError(QRNGError, ValueError):
    """Malformed or mismatched distribution / sample data."""


def validation_details(exc: ValidationError) -> dict:
    """Flatten pydantic errors into {"field -> sub": message}"""
    details = {}
    for error in exc.errors():
        loc = error["loc"][1:] if error["loc"] and error["loc"][0] == "body" else error["loc"]
        field = " -> ".join(str(x) for x in loc) or "__root__"
        details[field] = error["msg"]
    return details


def config_error_from_validation(exc: ValidationError) -> ConfigError:
    details = validation_details(exc)
    fields = ", ".join(details)
    return ConfigError(f"Invalid configuration: {fields}", details)
