# Test helpers
from .assertions import (
    assert_command_failed,
    assert_command_success,
    assert_holds,
    assert_interpolates,
    assert_output_contains,
)

__all__ = [
    "assert_command_failed",
    "assert_command_success",
    "assert_holds",
    "assert_interpolates",
    "assert_output_contains",
]
