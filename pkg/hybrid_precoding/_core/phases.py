"""b-bit phase grid of the phase shifters."""
from typing import Union

import numpy as np

from hybrid_precoding.exceptions import DomainError

TWO_PI = 2.0 * np.pi


def phase_grid(bits: int) -> np.ndarray:
    """Return the 2^b grid phases nu * 2pi / 2^b."""
    if bits < 1:
        raise DomainError(f"Resolution must be at least one bit, got {bits}.")
    return TWO_PI * np.arange(2**bits) / 2**bits


def quantize_phase(alpha: Union[float, np.ndarray], bits: int) -> Union[float, np.ndarray]:
    """Round phases to the nearest point of the b-bit grid.

    Angles are first reduced modulo 2pi. An exact tie goes to the lower grid index and
    the index 2^b wraps back to 0.

    :param alpha: Phase or array of phases in radians.
    :param bits: Resolution b.
    :return: Grid phases with the shape of `alpha`.
    """
    if bits < 1:
        raise DomainError(f"Resolution must be at least one bit, got {bits}.")
    levels = 2**bits
    step = TWO_PI / levels
    wrapped = np.mod(np.asarray(alpha, dtype=float), TWO_PI)
    index = np.mod(np.ceil(wrapped / step - 0.5), levels)
    grid = index * step
    return float(grid) if grid.ndim == 0 else grid
