from dataclasses import dataclass
from typing import Callable

import numpy as np

VALIDITY_FRACTION = 0.95


@dataclass(frozen=True)
class CharacteristicSolution:
    """Inviscid Burgers solution u_t + 3 u u_x = 0 carried by a periodic profile.

    `profile(x)` and `slope(x)` evaluate u0 and u0' at arbitrary points;
    `shock_time` is 1 / (3 max(-u0')) or inf.
    """

    profile: Callable
    slope: Callable
    period: float
    shock_time: float
    amplitude: float

    @property
    def valid_until(self):
        return VALIDITY_FRACTION * self.shock_time

    def is_valid_time(self, t):
        return 0.0 <= t and (np.isinf(self.shock_time) or t < self.valid_until)
