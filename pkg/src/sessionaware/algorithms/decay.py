"""Position-decay schemes used for session matching, item scoring and rule weights."""

import math

SCHEMES = ("same", "linear", "div", "quadratic", "log")


def position_weight(scheme: str, position: int, length: int) -> float:
    """Weight of the item at 1-based ``position`` in a session of ``length``.

    The last position always gets the largest weight.
    """
    if scheme == "same":
        return 1.0
    if scheme == "linear":
        return max(0.0, 1.0 - 0.1 * (length - position))
    if scheme == "div":
        return position / length
    if scheme == "quadratic":
        return (position / length) ** 2
    if scheme == "log":
        return 1.0 / math.log10(length - position + 1.7)
    raise ValueError(f"unknown decay scheme {scheme!r}")


def distance_weight(scheme: str, distance: int) -> float:
    """Weight of a sequential rule whose items are ``distance`` steps apart."""
    if scheme == "same":
        return 1.0
    if scheme == "linear":
        return max(0.0, 1.0 - 0.1 * distance)
    if scheme == "div":
        return 1.0 / distance
    if scheme == "quadratic":
        return 1.0 / (distance * distance)
    if scheme == "log":
        return 1.0 / math.log10(distance + 1.7)
    raise ValueError(f"unknown decay scheme {scheme!r}")
