"""Fee and waiting tax mechanism for transaction fee markets."""

from ._core import (
    check,
    check_suites,
    default_params,
    existing,
    jain_index,
    params,
    simulate,
    solve,
    sweep,
    waiting_rate,
)

__all__ = [
    "check",
    "check_suites",
    "default_params",
    "existing",
    "jain_index",
    "params",
    "simulate",
    "solve",
    "sweep",
    "waiting_rate",
]
