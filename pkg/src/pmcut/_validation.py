"""Input validation helpers shared by the public entry points."""
import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .errors import InvalidArgumentError

LUMA = np.array([0.299, 0.587, 0.114])


def check_gray_image(img, *, allow_rgb=False):
    """Return ``img`` as a float64 2-D array with values in [0, 1].

    With ``allow_rgb`` a ``(m, n, 3)`` array is converted to luminance first.
    Integer arrays are taken as 8-bit samples and divided by 255.
    """
    arr = np.asarray(img)
    if arr.ndim == 3 and allow_rgb and arr.shape[2] == 3:
        arr = arr.astype(float) @ LUMA
        if np.issubdtype(np.asarray(img).dtype, np.integer):
            arr = arr / 255.0
    elif np.issubdtype(arr.dtype, np.integer):
        arr = arr / 255.0
    if arr.ndim != 2:
        raise InvalidArgumentError(f"expected a 2-D gray image, got shape {arr.shape}")
    try:
        arr = check_array(arr, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
    except ValueError as exc:
        raise InvalidArgumentError(str(exc)) from exc
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidArgumentError("intensities must lie in [0, 1]")
    return arr


def check_count(value, name, *, minimum=1):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < minimum:
        raise InvalidArgumentError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_nonnegative(value, name):
    if value is None:
        return None
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise InvalidArgumentError(f"{name} must be a finite nonnegative number, got {value!r}")
    return value
