"""Input validation helpers."""

import numbers

import numpy as np

from .errors import DomainError

MAX_SEED = 2**64 - 1


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise DomainError(f"{name} must be an integer >= 1, got {value!r}")
    return int(value)


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or not 0 <= seed <= MAX_SEED:
        raise DomainError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def check_observations(X) -> np.ndarray:
    """Coerce to a finite complex array of shape ``(n, 3)`` with ``n >= 2``.

    sklearn's ``check_array`` rejects complex input, hence this helper.
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != 3:
        raise DomainError(f"expected observations of shape (n, 3), got {X.shape}")
    if X.shape[0] < 2:
        raise DomainError("need at least two observations")
    X = X.astype(complex, copy=False)
    if not np.all(np.isfinite(X)):
        raise DomainError("observations must be finite")
    return X
