import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

INTEGRATORS = ("auto", "rk4", "if_rk4")
SLOPE_SCALE = 1.6


@dataclass(frozen=True)
class ModelParams:
    """Filter width alpha, dissipation nu * Lambda^gamma, dealiasing flag.

    alpha = 0 selects the Burgers limit of the filtered equation. Any finite
    alpha >= 0 is accepted; run configs and the zero-filter study restrict it
    to (0, 1).
    """

    alpha: float = 0.1
    nu: float = 0.0
    gamma: float = 2.0
    dealias: bool = True

    def __post_init__(self):
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be finite and nonnegative, got {self.alpha}")
        if self.nu < 0.0:
            raise ValueError(f"nu must be nonnegative, got {self.nu}")
        if not 0.0 <= self.gamma <= 2.0:
            raise ValueError(f"gamma must lie in [0, 2], got {self.gamma}")

    @property
    def is_burgers(self):
        return self.alpha == 0.0

    def with_alpha(self, alpha):
        return replace(self, alpha=float(alpha))


@dataclass(frozen=True)
class StepControl:
    """Time-stepping and breaking controls.

    `t_end = None` takes the horizon from the initial data (see
    dynamics_helpers.default_horizon). `breaking_slope_threshold = None` scales
    the slope trigger with the grid: a steepening front reaches
    -SLOPE_SCALE * xi_kept^(2/3) on the dealiased band only as it breaks.
    """

    cfl: float = 0.3
    dt_max: float = 1e-2
    t_end: Optional[float] = 0.1
    save_every: int = 1
    breaking_slope_threshold: Optional[float] = None
    norm_cap: float = 1e6
    tail_fraction_threshold: float = 0.1
    norm_indices: Tuple[float, ...] = (2.0, 1.0)
    integrator: str = "auto"
    fixed_dt: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.t_end is not None and not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not self.dt_max > 0.0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if int(self.save_every) < 1:
            raise ValueError(f"save_every must be >= 1, got {self.save_every}")
        threshold = self.breaking_slope_threshold
        if threshold is not None and not threshold < 0.0:
            raise ValueError("breaking_slope_threshold must be negative")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}")
        if not self.norm_indices:
            raise ValueError("norm_indices must name at least one Sobolev index")
        object.__setattr__(self, "save_every", int(self.save_every))
        object.__setattr__(
            self, "norm_indices", tuple(float(s) for s in self.norm_indices)
        )

    @property
    def cap_index(self):
        return self.norm_indices[0]

    def slope_threshold(self, grid):
        if self.breaking_slope_threshold is not None:
            return self.breaking_slope_threshold
        kept = 2.0 * grid.max_frequency / 3.0
        return -SLOPE_SCALE * kept ** (2.0 / 3.0)

    def uses_integrating_factor(self, params):
        if self.integrator == "auto":
            return params.nu > 0.0
        return self.integrator == "if_rk4"

    def replace(self, **changes):
        return replace(self, **changes)
