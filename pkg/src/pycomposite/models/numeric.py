from typing import Callable

import numpy as np

FD_STEP = 1e-6


def central_difference(
    fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step: float = FD_STEP
) -> np.ndarray:
    """Central-difference derivative of ``fn`` at ``x``.

    The result has shape ``fn(x).shape + x.shape``, so the last axis indexes
    the differentiation variable (``dbeta[i, l, k] = d beta[i, l] / d x[k]``).
    """
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fn(x), dtype=float)
    out = np.zeros(f0.shape + x.shape)

    for k in range(x.size):
        dx = np.zeros_like(x)
        dx.flat[k] = step
        forward = np.asarray(fn(x + dx), dtype=float)
        backward = np.asarray(fn(x - dx), dtype=float)
        out[..., k] = (forward - backward) / (2 * step)

    return out


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """Max absolute deviation scaled by the expected magnitude (floored at 1)."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if actual.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(expected))))
    return float(np.max(np.abs(actual - expected))) / scale
