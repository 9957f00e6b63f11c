"""Global resource limits."""

import os

DEFAULT_MAX_DIM = 2**14


def max_dim() -> int:
    """Largest dense matrix dimension the library will allocate.

    Overridable through the KNITSIM_MAX_DIM environment variable.
    """
    raw = os.environ.get("KNITSIM_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    value = int(raw)
    if value < 2:
        raise ValueError("KNITSIM_MAX_DIM must be at least 2")
    return value


class ResourceError(RuntimeError):
    """Requested dimension exceeds the configured cap."""


def check_dim(dim: int) -> int:
    if dim > max_dim():
        raise ResourceError(f"dimension {dim} exceeds cap {max_dim()}")
    return dim
