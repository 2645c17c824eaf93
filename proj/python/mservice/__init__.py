"""Python bindings for the sponsored SMS/USSD maternal health service."""

from ._core import (
    MServiceError,
    Service,
    is_gsm_basic,
    parse_ussd_code,
    segment_message,
    validate_msisdn,
)

__all__ = [
    "MServiceError",
    "Service",
    "is_gsm_basic",
    "parse_ussd_code",
    "segment_message",
    "validate_msisdn",
]
