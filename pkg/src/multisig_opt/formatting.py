"""Fixed-precision rendering shared by the CSV, policy and CLI outputs."""

import math

SIG_DIGITS = 9


def fmt_real(x: float) -> str:
    """Render with 9 significant digits; infinities as ``inf``/``-inf``."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{SIG_DIGITS}g")


def quantize(x: float) -> float:
    """Round ``x`` to the value that :func:`fmt_real` would print."""
    return float(fmt_real(x))


def fmt_bool(flag: bool) -> str:
    return "true" if flag else "false"
