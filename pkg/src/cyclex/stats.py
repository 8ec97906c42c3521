from typing import Sequence

import numpy as np


def five_number(values: Sequence[float]) -> tuple[float, float, float, float, float]:
    """min, quartiles (linear interpolation) and max."""
    q = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
    return tuple(float(x) for x in q)


def fmt(x: float) -> str:
    return f"{x:.3f}"
